"""Sign functions kappa, rho, phi on the torus and the Euclid-parity rule.

kappa and rho are pinned down by difference constraints along the orbit of
(-1, 1), which generates Z/N x Z/M when gcd(N, M) = 1.  A constraint set is a
mapping ``{(i, j): c}`` meaning ``f(i - 1, j + 1) - f(i, j) = c``; at every
other site the difference is zero.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .errors import DegenerateError, InternalError
from .lattice import check_dimensions

Jumps = Dict[Tuple[int, int], int]

KAPPA_JUMPS: Jumps = {(1, -1): -1, (1, 0): 1, (0, -1): 1, (0, 0): -1}
RHO_JUMPS: Jumps = {(-1, -1): 1, (1, 0): 1, (0, -1): -1, (0, 0): -1}


@dataclass(frozen=True, eq=False)
class SignTable:
    N: int
    M: int
    values: np.ndarray
    kind: str

    def __post_init__(self):
        vals = np.array(self.values, dtype=int, copy=True)
        if vals.shape != (self.N, self.M):
            raise ValueError(f"values must have shape ({self.N}, {self.M})")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __call__(self, n: int, m: int) -> int:
        return int(self.values[n % self.N, m % self.M])

    def __eq__(self, other) -> bool:
        if not isinstance(other, SignTable):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.values, other.values)

    __hash__ = None

    def in_sign_set(self) -> bool:
        return bool(np.all(np.abs(self.values) <= 1))

    def rows(self) -> List[Tuple[int, int, int]]:
        """(n, m, value) triples, m outer and n inner."""
        return [(n, m, int(self.values[n, m])) for m in range(self.M) for n in range(self.N)]


def orbit(N: int, M: int) -> List[Tuple[int, int]]:
    """The sites (-a, a) for a = 0, ..., NM - 1, reduced to the torus."""
    return [((-a) % N, a % M) for a in range(N * M)]


def _reduced_jumps(N: int, M: int, jumps: Jumps) -> Dict[Tuple[int, int], int]:
    out: Dict[Tuple[int, int], int] = {}
    for (i, j), c in jumps.items():
        key = (i % N, j % M)
        out[key] = out.get(key, 0) + c
    return out


def walk_constraints(N: int, M: int, jumps: Jumps, start: int = 0) -> np.ndarray:
    """Solve the difference constraints by walking the (-1, 1) orbit from f(0, 0) = start.

    Raises DegenerateError if the walk does not close up, i.e. if the forcing
    constants do not sum to zero around the cycle.
    """
    check_dimensions(N, M)
    steps = _reduced_jumps(N, M, jumps)
    values = np.zeros((N, M), dtype=int)
    n, m = 0, 0
    values[n, m] = start
    for _ in range(N * M):
        nxt = ((n - 1) % N, (m + 1) % M)
        value = values[n, m] + steps.get((n, m), 0)
        if nxt == (0, 0):
            if value != start:
                raise DegenerateError("difference constraints are inconsistent around the orbit")
            break
        values[nxt] = value
        n, m = nxt
    return values


def constraint_violations(table: SignTable, jumps: Jumps) -> List[Tuple[int, int]]:
    """Sites where ``f(i - 1, j + 1) - f(i, j)`` differs from the prescribed jump."""
    steps = _reduced_jumps(table.N, table.M, jumps)
    bad = []
    for i in range(table.N):
        for j in range(table.M):
            if table(i - 1, j + 1) - table(i, j) != steps.get((i, j), 0):
                bad.append((i, j))
    return bad


def build_kappa(N: int, M: int) -> SignTable:
    values = walk_constraints(N, M, KAPPA_JUMPS, start=0)
    table = SignTable(N, M, values, "kappa")
    if not table.in_sign_set():
        raise InternalError(f"kappa left {{-1, 0, 1}} for (N, M) = ({N}, {M})")
    return table


def build_rho(N: int, M: int) -> SignTable:
    """rho(n, m) = kappa(n + 1, m) + kappa(n, m) + [(n, m) = (0, 0)] - [(n, m) = (-1, 0)]."""
    kappa = build_kappa(N, M)
    values = kappa.values + np.roll(kappa.values, -1, axis=0)
    values[0, 0] += 1
    values[N - 1, 0] -= 1
    table = SignTable(N, M, values, "rho")
    if not table.in_sign_set():
        bad = np.argwhere(np.abs(values) > 1)[0]
        raise InternalError(f"rho({bad[0]},{bad[1]}) = {values[tuple(bad)]} for (N, M) = ({N}, {M})")
    return table


def build_phi(N: int, M: int) -> SignTable:
    """phi(n, m) = -rho(-n - 1, -m) - rho(-n, -m)."""
    rho = build_rho(N, M)
    values = np.empty((N, M), dtype=int)
    for n in range(N):
        for m in range(M):
            values[n, m] = -rho(-n - 1, -m) - rho(-n, -m)
    table = SignTable(N, M, values, "phi")
    if not table.in_sign_set():
        bad = np.argwhere(np.abs(values) > 1)[0]
        raise InternalError(f"phi({bad[0]},{bad[1]}) = {values[tuple(bad)]} for (N, M) = ({N}, {M})")
    return table


class Case(enum.Enum):
    CASE1 = 1  # (1, 0) strictly precedes (-1, 0) along (-1, 1), (-2, 2), ...
    CASE2 = 2

    def opposite(self) -> "Case":
        return Case.CASE2 if self is Case.CASE1 else Case.CASE1


def sequence_case(N: int, M: int) -> Case:
    """Decide the case by walking (-1, 1), (-2, 2), ... directly.

    CASE1 requires (1, 0) to come strictly first.  For N = 2 the two sites
    coincide and the walk lands on CASE2, which is the list construction
    that reproduces kappa there.
    """
    check_dimensions(N, M)
    plus, minus = (1 % N, 0), ((-1) % N, 0)
    for a in range(1, N * M + 1):
        site = ((-a) % N, a % M)
        if site == minus:
            return Case.CASE2
        if site == plus:
            return Case.CASE1
    raise InternalError("orbit of (-1, 1) missed (1, 0)")


def euclid_steps(N: int, M: int) -> int:
    """Number of division steps of the Euclidean algorithm on the ordered pair (N, M)."""
    steps = 0
    a, b = N, M
    while b:
        a, b = b, a % b
        steps += 1
    return steps


def euclid_case(N: int, M: int) -> Case:
    """Predict the case from the parity of ``euclid_steps(N, M)``.

    An even step count gives CASE1.  The parity convention was fixed by
    comparison with :func:`sequence_case` on (N, M) = (3, 2).
    """
    check_dimensions(N, M)
    return Case.CASE1 if euclid_steps(N, M) % 2 == 0 else Case.CASE2


def kappa_from_case_lists(N: int, M: int) -> SignTable:
    """Build kappa from the explicit two-list description instead of the walk.

    In case 1, kappa is -1 on (-1, 1), (-2, 2), ... up to and including (1, 0)
    and +1 on the negated sites; in case 2 the lists stop at (0, -1) and (0, 1).
    Everything else is 0.
    """
    case = sequence_case(N, M)
    stop = (1 % N, 0) if case is Case.CASE1 else (0, (-1) % M)
    values = np.zeros((N, M), dtype=int)
    for a in range(1, N * M):
        site = ((-a) % N, a % M)
        values[site] = -1
        values[(a % N, (-a) % M)] = 1
        if site == stop:
            break
    return SignTable(N, M, values, "kappa")
