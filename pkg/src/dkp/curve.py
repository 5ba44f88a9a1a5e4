"""The operator W(alpha, beta), its determinant and the spectral curve.

``W`` is NM x NM with rows and columns ordered m-major.  Block (0, 0) is
``-beta * I``, the other diagonal blocks are ``-I``, and block (m + 1, m) is
the N x N matrix X(m): ``-A(i, m)`` on the diagonal, ``-B(i, m)`` below it,
``1`` above it, with the corner entries replaced by ``-B(0, m) / alpha`` at
(0, N - 1) and ``alpha`` at (N - 1, 0).

``alpha**M * det W`` is a polynomial of degree 2M in alpha and N in beta, so
the curve is recovered exactly (up to roundoff) by sampling on a grid of
roots of unity and taking a 2-D DFT.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from .lattice import LatticeState, check_dimensions

SUPPORT_REL_TOL = 1e-9

Exponent = Tuple[int, int]


def default_workers() -> int:
    env = os.environ.get("DKP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def block_X(state: LatticeState, m: int, alpha: complex) -> np.ndarray:
    """The N x N block X(m)(alpha).

    Entries are accumulated, so for N = 2 the coinciding super- and
    sub-diagonal positions carry the sum of both contributions.
    """
    if alpha == 0:
        raise ZeroDivisionError("alpha must be nonzero")
    N = state.N
    m = m % state.M
    X = np.zeros((N, N), dtype=complex)
    for i in range(N):
        X[i, i] += -state.A[i, m]
        if i == 0:
            X[0, N - 1] += -state.B[0, m] / alpha
        else:
            X[i, i - 1] += -state.B[i, m]
        if i == N - 1:
            X[N - 1, 0] += alpha
        else:
            X[i, i + 1] += 1.0
    return X


def assemble_W(state: LatticeState, alpha: complex, beta: complex) -> np.ndarray:
    if alpha == 0:
        raise ZeroDivisionError("alpha must be nonzero (corner entry -B(0, m)/alpha)")
    N, M = state.N, state.M
    W = np.zeros((N * M, N * M), dtype=complex)
    for m in range(M):
        rows = slice(m * N, (m + 1) * N)
        W[rows, rows] = -np.eye(N) * (beta if m == 0 else 1.0)
    for m in range(M):
        r = ((m + 1) % M) * N
        c = m * N
        W[r:r + N, c:c + N] = block_X(state, m, alpha)
    return W


def alpha_derivative_W(state: LatticeState, alpha: complex) -> np.ndarray:
    """Entrywise d W / d alpha."""
    N, M = state.N, state.M
    dW = np.zeros((N * M, N * M), dtype=complex)
    for m in range(M):
        r = ((m + 1) % M) * N
        c = m * N
        dW[r + N - 1, c] += 1.0
        dW[r, c + N - 1] += state.B[0, m] / alpha**2
    return dW


def det_W(state: LatticeState, alpha: complex, beta: complex) -> complex:
    return complex(np.linalg.det(assemble_W(state, alpha, beta)))


def beta_zero_sign(N: int, M: int) -> int:
    """Sign of the block-cyclic permutation: det W(alpha, 0) = sign * prod_m det X(m)."""
    return -1 if (N * (M - 1)) % 2 else 1


def split_product(state: LatticeState, alpha: complex) -> complex:
    """``beta_zero_sign * prod_m det X(m)(alpha)``, which equals ``det W(alpha, 0)``."""
    prod = complex(beta_zero_sign(state.N, state.M))
    for m in range(state.M):
        prod *= complex(np.linalg.det(block_X(state, m, alpha)))
    return prod


@dataclass(frozen=True, eq=False)
class CurvePolynomial:
    """Coefficients c[i][j] of alpha**i beta**j in det W.

    ``coeffs[i + M, j]`` holds c[i][j] for i in [-M, M] and j in [0, N].
    """

    N: int
    M: int
    coeffs: np.ndarray
    rel_tol: float = SUPPORT_REL_TOL

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex, copy=True)
        if c.shape != (2 * self.M + 1, self.N + 1):
            raise ValueError(f"coeffs must have shape ({2 * self.M + 1}, {self.N + 1})")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def coeff(self, i: int, j: int) -> complex:
        if not (-self.M <= i <= self.M and 0 <= j <= self.N):
            return 0j
        return complex(self.coeffs[i + self.M, j])

    @property
    def threshold(self) -> float:
        return self.rel_tol * float(np.max(np.abs(self.coeffs)))

    def support(self) -> FrozenSet[Exponent]:
        tau = self.threshold
        idx = np.argwhere(np.abs(self.coeffs) > tau)
        return frozenset((int(k) - self.M, int(j)) for k, j in idx)

    def truncated(self) -> np.ndarray:
        """Coefficient array with everything off the support set to zero."""
        c = np.array(self.coeffs)
        c[np.abs(c) <= self.threshold] = 0
        return c

    def alpha_polynomial(self, beta: complex, truncate: bool = True) -> np.ndarray:
        """Coefficients (low to high) of ``alpha**M * det W`` as a polynomial in alpha."""
        c = self.truncated() if truncate else self.coeffs
        powers = np.asarray(beta, dtype=complex) ** np.arange(self.N + 1)
        return c @ powers

    def __call__(self, alpha: complex, beta: complex) -> complex:
        """Evaluate det W(alpha, beta) from the coefficients."""
        poly = self.alpha_polynomial(beta, truncate=False)
        return complex(np.polynomial.polynomial.polyval(alpha, poly) / alpha**self.M)

    def items(self) -> List[Tuple[int, int, complex]]:
        return [
            (i, j, self.coeff(i, j)) for i in range(-self.M, self.M + 1) for j in range(self.N + 1)
        ]


def curve_polynomial(
    state: LatticeState,
    rel_tol: float = SUPPORT_REL_TOL,
    workers: Optional[int] = None,
) -> CurvePolynomial:
    N, M = state.N, state.M
    P, Q = 2 * M + 1, N + 1
    alphas = np.exp(2j * np.pi * np.arange(P) / P)
    betas = np.exp(2j * np.pi * np.arange(Q) / Q)

    def sample(p: int) -> np.ndarray:
        a = alphas[p]
        return np.array([a**M * det_W(state, a, b) for b in betas])

    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, P)) as pool:
            rows = list(pool.map(sample, range(P)))
    else:
        rows = [sample(p) for p in range(P)]
    values = np.array(rows)
    coeffs = np.fft.fft2(values) / (P * Q)
    return CurvePolynomial(N, M, coeffs, rel_tol)


def support(curve: CurvePolynomial) -> FrozenSet[Exponent]:
    return curve.support()


def expected_support(N: int, M: int) -> FrozenSet[Exponent]:
    """Exponents (i, j) that appear in det W for generic A, B.

    The coefficient of alpha**i beta**j has degree NM - |i| N - j M in the
    grading deg A = 1, deg B = 2, so it can occur only when that is >= 0.
    """
    pts: Set[Exponent] = set()
    for i in range(-M, M + 1):
        for j in range(N + 1):
            if (M - abs(i)) * N - j * M >= 0:
                pts.add((i, j))
    return frozenset(pts)


def degree_list(N: int, M: int) -> List[List[int]]:
    """Rows of admissible coefficient degrees, ordered from alpha**M down to alpha**-M."""
    rows = []
    for k in range(1, 2 * M + 2):
        if k <= M + 1:
            top, count = (k - 1) * N, (k - 1) * N // M
        else:
            kk = k - M - 1
            top, count = (M + kk) * N, (M - kk) * N // M
        rows.append([top - i * M for i in range(count + 1)])
    return rows


def special_state(N: int, M: int) -> LatticeState:
    """A = 0 and B at the site (a mod N, a mod M) equal to eta**a, eta = exp(2 pi i / NM)."""
    check_dimensions(N, M)
    eta = np.exp(2j * np.pi / (N * M))
    B = np.empty((N, M), dtype=complex)
    for a in range(N * M):
        B[a % N, a % M] = eta**a
    return LatticeState(N, M, np.zeros((N, M)), B)


@dataclass(frozen=True)
class NewtonPolygon:
    points: Tuple[Exponent, ...]
    vertices: Tuple[Exponent, ...]
    interior: Tuple[Exponent, ...]

    @property
    def interior_count(self) -> int:
        return len(self.interior)


def _cross(o: Exponent, a: Exponent, b: Exponent) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Sequence[Exponent]) -> List[Exponent]:
    """Counter-clockwise hull vertices (monotone chain, collinear points dropped)."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: List[Exponent] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Exponent] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def interior_lattice_points(vertices: Sequence[Exponent]) -> List[Exponent]:
    if len(vertices) < 3:
        return []
    xs = [v[0] for v in vertices]
    ys = [v[1] for v in vertices]
    inside = []
    for x in range(min(xs), max(xs) + 1):
        for y in range(min(ys), max(ys) + 1):
            p = (x, y)
            if all(
                _cross(vertices[k], vertices[(k + 1) % len(vertices)], p) > 0
                for k in range(len(vertices))
            ):
                inside.append(p)
    return inside


def newton_polygon(points: Sequence[Exponent]) -> NewtonPolygon:
    hull = convex_hull(points)
    return NewtonPolygon(tuple(sorted(points)), tuple(hull), tuple(interior_lattice_points(hull)))


def newton_genus(curve: CurvePolynomial) -> Tuple[NewtonPolygon, int]:
    """Newton polygon of ``alpha**M * det W`` and its interior lattice-point count.

    For a generic state the count equals the genus (N - 1) M.  A support
    smaller than the generic one triggers a warning.
    """
    supp = curve.support()
    if supp != expected_support(curve.N, curve.M):
        warnings.warn(
            f"non-generic support: {len(supp)} terms instead of "
            f"{len(expected_support(curve.N, curve.M))}",
            RuntimeWarning,
            stacklevel=2,
        )
    poly = newton_polygon([(i + curve.M, j) for i, j in supp])
    return poly, poly.interior_count


def genus(N: int, M: int) -> int:
    return (N - 1) * M


@dataclass(frozen=True, eq=False)
class BetaZeroSpectrum:
    """Roots (R_m, S_m) of ``alpha * det X(m)(alpha)`` for each block m."""

    roots: np.ndarray  # shape (M, 2)
    quadratics: np.ndarray  # shape (M, 3), coefficients low to high
    double_root: Tuple[bool, ...] = field(default=())

    @property
    def points(self) -> np.ndarray:
        return self.roots.reshape(-1)


def block_quadratic(state: LatticeState, m: int) -> np.ndarray:
    """Coefficients (low to high) of ``alpha * det X(m)(alpha)``, which has degree 2."""
    nodes = np.exp(2j * np.pi * np.arange(3) / 3)
    values = np.array([a * np.linalg.det(block_X(state, m, a)) for a in nodes])
    return np.fft.fft(values) / 3


def _quadratic_roots(c0: complex, c1: complex, c2: complex) -> Tuple[complex, complex]:
    disc = np.sqrt(complex(c1 * c1 - 4 * c2 * c0))
    # choose the sign that avoids cancellation, then use Vieta for the other root
    q = -0.5 * (c1 + disc) if abs(c1 + disc) >= abs(c1 - disc) else -0.5 * (c1 - disc)
    r1 = q / c2
    r2 = c0 / q if q != 0 else r1
    return complex(r1), complex(r2)


def beta_zero_spectrum(state: LatticeState, double_tol: float = 1e-8) -> BetaZeroSpectrum:
    quads = np.array([block_quadratic(state, m) for m in range(state.M)])
    roots = np.array([_quadratic_roots(*q) for q in quads])
    doubles = tuple(
        bool(abs(r[0] - r[1]) <= double_tol * max(1.0, abs(r[0]), abs(r[1]))) for r in roots
    )
    if any(doubles):
        warnings.warn("beta = 0 spectrum has a double root (non-generic state)", RuntimeWarning, stacklevel=2)
    return BetaZeroSpectrum(roots, quads, doubles)


def scaled_state(state: LatticeState, lam: complex) -> LatticeState:
    """(A, B) -> (lam A, lam**2 B), the weighting under which det W is homogeneous."""
    return state.replace(lam * state.A, lam**2 * state.B)


def scaling_error(state: LatticeState, alpha: complex, beta: complex, lam: complex) -> float:
    """Relative gap in det W(lam^N alpha, lam^M beta; lam A, lam^2 B) = lam^(NM) det W(alpha, beta; A, B)."""
    N, M = state.N, state.M
    lhs = det_W(scaled_state(state, lam), lam**N * alpha, lam**M * beta)
    rhs = lam ** (N * M) * det_W(state, alpha, beta)
    return abs(lhs - rhs) / abs(rhs)


def special_support(N: int, M: int) -> FrozenSet[Exponent]:
    return frozenset({(M, 0), (0, N), (-M, 0)})


def special_exponent_sum(N: int, M: int) -> int:
    """Exponent s with prod B = eta**s for the special state."""
    return N * M * (N * M - 1) // 2
