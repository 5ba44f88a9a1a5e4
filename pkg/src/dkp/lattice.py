"""Fields A, B on the torus Z/N x Z/M, plus state-file I/O.

Grids are stored as complex arrays of shape ``(N, M)`` so that ``A[n, m]``
reads like ``A(n, m)``.  Flattened vectors use the m-major order, i.e. site
``(n, m)`` lives at position ``m * N + n``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .errors import ConstraintError, InvariantError, StateFileError

STATE_VERSION = 1

PathLike = Union[str, Path]


@dataclass(frozen=True)
class TorusIndex:
    n: int
    m: int
    N: int
    M: int

    def __post_init__(self):
        object.__setattr__(self, "n", self.n % self.N)
        object.__setattr__(self, "m", self.m % self.M)

    def __add__(self, other: "TorusIndex") -> "TorusIndex":
        if (self.N, self.M) != (other.N, other.M):
            raise ValueError("indices live on different tori")
        return TorusIndex(self.n + other.n, self.m + other.m, self.N, self.M)

    def __neg__(self) -> "TorusIndex":
        return TorusIndex(-self.n, -self.m, self.N, self.M)

    def __sub__(self, other: "TorusIndex") -> "TorusIndex":
        return self + (-other)

    @property
    def flat(self) -> int:
        """Position in an m-major flattened vector."""
        return self.m * self.N + self.n

    def as_tuple(self) -> Tuple[int, int]:
        return (self.n, self.m)


def canonical_index(n: int, m: int, N: int, M: int) -> TorusIndex:
    """Reduce ``(n, m)`` to its representative in ``[0, N) x [0, M)``."""
    return TorusIndex(n, m, N, M)


def check_dimensions(N: int, M: int) -> None:
    """Raise ConstraintError unless N, M >= 2 and gcd(N, M) == 1."""
    if int(N) != N or int(M) != M:
        raise ConstraintError(f"N and M must be integers, got N={N!r}, M={M!r}")
    if N < 2 or M < 2:
        raise ConstraintError(
            f"N and M must both be at least 2 (got N={N}, M={M}); "
            "M=1 is the periodic Toda reduction and is not supported"
        )
    if math.gcd(N, M) != 1:
        raise ConstraintError(f"gcd(N, M) must be 1, got gcd({N}, {M}) = {math.gcd(N, M)}")


def _frozen(array, N: int, M: int, name: str) -> np.ndarray:
    arr = np.array(array, dtype=complex, copy=True)
    if arr.shape != (N, M):
        raise InvariantError(f"{name} must have shape ({N}, {M}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvariantError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LatticeState:
    """Phase point of the lattice system: the periodic fields A and B."""

    N: int
    M: int
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        check_dimensions(self.N, self.M)
        object.__setattr__(self, "A", _frozen(self.A, self.N, self.M, "A"))
        object.__setattr__(self, "B", _frozen(self.B, self.N, self.M, "B"))
        zeros = np.argwhere(self.B == 0)
        if len(zeros):
            n, m = (int(v) for v in zeros[0])
            raise InvariantError(f"B({n},{m}) = 0; every B entry must be nonzero")

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticeState):
            return NotImplemented
        return (
            (self.N, self.M) == (other.N, other.M)
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.B, other.B)
        )

    __hash__ = None

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.N, self.M)

    def replace(self, A=None, B=None) -> "LatticeState":
        return LatticeState(self.N, self.M, self.A if A is None else A, self.B if B is None else B)

    def translate(self, a: int, b: int) -> "LatticeState":
        """State whose value at (n, m) is this state's value at (n + a, m + b)."""
        shift = (-a, -b)
        return self.replace(np.roll(self.A, shift, axis=(0, 1)), np.roll(self.B, shift, axis=(0, 1)))


def random_state(
    N: int,
    M: int,
    seed: int,
    a_radius: float = 1.0,
    b_annulus: Tuple[float, float] = (0.5, 1.5),
) -> LatticeState:
    """Seeded generic state.

    A is uniform on the complex disk of radius ``a_radius``; B has modulus
    uniform in ``b_annulus`` and a uniform phase.
    """
    check_dimensions(N, M)
    b_min, b_max = b_annulus
    if not 0 < b_min <= b_max:
        raise ValueError(f"b_annulus must satisfy 0 < min <= max, got {b_annulus}")
    if a_radius < 0:
        raise ValueError("a_radius must be non-negative")
    rng = np.random.default_rng(seed)
    radius = a_radius * np.sqrt(rng.uniform(size=(N, M)))
    A = radius * np.exp(2j * np.pi * rng.uniform(size=(N, M)))
    B = rng.uniform(b_min, b_max, size=(N, M)) * np.exp(2j * np.pi * rng.uniform(size=(N, M)))
    return LatticeState(N, M, A, B)


def _grid_to_json(grid: np.ndarray) -> list:
    N, M = grid.shape
    return [[[float(grid[n, m].real), float(grid[n, m].imag)] for n in range(N)] for m in range(M)]


def _grid_from_json(rows, N: int, M: int, name: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != M:
        raise StateFileError(f"{name} must be a list of {M} rows (one per m)")
    grid = np.empty((N, M), dtype=complex)
    for m, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != N:
            raise StateFileError(f"{name}[{m}] must hold {N} entries")
        for n, pair in enumerate(row):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)
            ):
                raise StateFileError(f"{name}[{m}][{n}] must be a [re, im] pair of numbers")
            grid[n, m] = complex(pair[0], pair[1])
    return grid


def state_to_dict(state: LatticeState) -> dict:
    return {
        "version": STATE_VERSION,
        "N": state.N,
        "M": state.M,
        "A": _grid_to_json(state.A),
        "B": _grid_to_json(state.B),
    }


def state_from_dict(data) -> LatticeState:
    if not isinstance(data, dict):
        raise StateFileError("state file must contain a JSON object")
    for key in ("version", "N", "M", "A", "B"):
        if key not in data:
            raise StateFileError(f"state file is missing field {key!r}")
    if data["version"] != STATE_VERSION:
        raise StateFileError(f"unsupported state file version {data['version']!r}")
    N, M = data["N"], data["M"]
    if not (isinstance(N, int) and isinstance(M, int)) or isinstance(N, bool) or isinstance(M, bool):
        raise StateFileError("N and M must be integers")
    check_dimensions(N, M)
    A = _grid_from_json(data["A"], N, M, "A")
    B = _grid_from_json(data["B"], N, M, "B")
    return LatticeState(N, M, A, B)


def dumps_state(state: LatticeState) -> str:
    return json.dumps(state_to_dict(state), indent=1) + "\n"


def save_state(state: LatticeState, path: PathLike) -> None:
    Path(path).write_text(dumps_state(state), encoding="utf-8")


def load_state(path: PathLike) -> LatticeState:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise StateFileError(f"{path}: not valid JSON ({exc})") from exc
    return state_from_dict(data)
