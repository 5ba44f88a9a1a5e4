"""Points on the spectral curve and the kernel vector Psi of W there."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .curve import CurvePolynomial, assemble_W
from .errors import DegenerateError
from .lattice import LatticeState, TorusIndex

GENERIC_REL_TOL = 1e-12
ROOT_SEPARATION = 1e-8
KERNEL_GAP = 1e3


@dataclass(frozen=True)
class CurvePoint:
    alpha: complex
    beta: complex
    residual: float
    clustered: bool = False


@dataclass(frozen=True, eq=False)
class KernelVector:
    """Psi in ker W(alpha, beta), m-major, scaled so that Psi(0, 0) = 1."""

    N: int
    M: int
    alpha: complex
    beta: complex
    psi: np.ndarray
    singular_gap: float

    def __call__(self, n: int, m: int) -> complex:
        """Psi on the covering lattice, using the alpha/beta quasi-periodicity."""
        k, n0 = divmod(n, self.N)
        l, m0 = divmod(m, self.M)
        return complex(self.alpha**k * self.beta**l * self.psi[m0 * self.N + n0])

    @property
    def grid(self) -> np.ndarray:
        return self.psi.reshape(self.M, self.N).T


def _polish(coeffs: np.ndarray, root: complex, iterations: int = 3) -> complex:
    """Newton refinement on the polynomial (low-to-high coefficients).

    A step is accepted only while it lowers the residual.
    """
    deriv = np.polynomial.polynomial.polyder(coeffs)
    best = root
    best_val = abs(np.polynomial.polynomial.polyval(root, coeffs))
    for _ in range(iterations):
        d = np.polynomial.polynomial.polyval(best, deriv)
        if d == 0:
            break
        cand = best - np.polynomial.polynomial.polyval(best, coeffs) / d
        val = abs(np.polynomial.polynomial.polyval(cand, coeffs))
        if not val < best_val:
            break
        best, best_val = cand, val
    return complex(best)


def _roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of a polynomial whose roots may span many orders of magnitude.

    Large roots come from the companion matrix of ``coeffs`` and small roots
    from that of the reversed polynomial, where they are large.
    """
    direct = np.roots(coeffs[::-1])
    with np.errstate(divide="ignore", invalid="ignore"):
        inverse = 1.0 / np.roots(coeffs)
    big = direct[np.abs(direct) >= 1.0]
    small = inverse[np.abs(inverse) < 1.0]
    if len(big) + len(small) == len(coeffs) - 1:
        return np.concatenate([big, small])
    return direct


def relative_residual(coeffs: np.ndarray, alpha: complex) -> float:
    """|p(alpha)| / sum_k |c_k| |alpha|^k, the backward error of a root."""
    k = np.arange(len(coeffs))
    scale = np.sum(np.abs(coeffs) * np.abs(alpha) ** k)
    return float(abs(np.polynomial.polynomial.polyval(alpha, coeffs)) / scale)


def curve_points_at_beta(curve: CurvePolynomial, beta: complex) -> List[CurvePoint]:
    """The 2M roots alpha of ``alpha**M det W(alpha, beta)`` at fixed beta.

    Coefficients below the support threshold are dropped first: at large
    |beta| their roundoff would otherwise be multiplied by beta**N.
    """
    coeffs = curve.alpha_polynomial(beta, truncate=True)
    mag = float(np.max(np.abs(curve.coeffs)))
    if abs(coeffs[-1]) <= GENERIC_REL_TOL * mag or abs(coeffs[0]) <= GENERIC_REL_TOL * mag:
        raise DegenerateError(f"beta = {beta}: extreme alpha-coefficient vanishes")
    roots = [_polish(coeffs, r) for r in _roots(coeffs)]
    points = []
    for idx, r in enumerate(roots):
        others = [abs(r - s) for j, s in enumerate(roots) if j != idx]
        clustered = min(others) <= ROOT_SEPARATION * max(1.0, abs(r))
        points.append(CurvePoint(r, complex(beta), relative_residual(coeffs, r), clustered))
    return points


def kernel_vector(state: LatticeState, point: CurvePoint) -> KernelVector:
    W = assemble_W(state, point.alpha, point.beta)
    _, s, vh = np.linalg.svd(W)
    gap = float(s[-2] / s[-1]) if s[-1] > 0 else float("inf")
    if gap < KERNEL_GAP:
        raise DegenerateError(
            f"kernel is not numerically one-dimensional (sigma ratio {gap:.3g} < {KERNEL_GAP:g})"
        )
    psi = vh[-1].conj()
    if abs(psi[0]) <= 1e-12 * np.linalg.norm(psi):
        raise DegenerateError("Psi(0, 0) vanishes; cannot normalize")
    psi = psi / psi[0]
    psi[0] = 1.0
    return KernelVector(state.N, state.M, point.alpha, point.beta, psi, gap)


def kernel_residual(state: LatticeState, kv: KernelVector) -> float:
    """||W Psi|| / ||W|| (spectral norm)."""
    W = assemble_W(state, kv.alpha, kv.beta)
    return float(np.linalg.norm(W @ kv.psi) / np.linalg.norm(W, 2))


def recurrence_residuals(state: LatticeState, kv: KernelVector) -> np.ndarray:
    """Per-site relative residual of Psi(n,m+1) = Psi(n+1,m) - A Psi(n,m) - B Psi(n-1,m)."""
    N, M = state.N, state.M
    out = np.empty((N, M))
    for n in range(N):
        for m in range(M):
            terms = np.array([
                kv(n, m + 1),
                -kv(n + 1, m),
                state.A[n, m] * kv(n, m),
                state.B[n, m] * kv(n - 1, m),
            ])
            out[n, m] = abs(terms.sum()) / np.abs(terms).max()
    return out


def _march_m(state: LatticeState, row0: np.ndarray, alpha: complex) -> np.ndarray:
    """Advance a row in m for M steps, wrapping n with Psi(n + N) = alpha Psi(n)."""
    N = state.N
    row = row0.astype(complex)
    for m in range(state.M):
        ext = np.concatenate([[row[-1] / alpha], row, [alpha * row[0]]])
        row = ext[2:] - state.A[:, m] * ext[1:-1] - state.B[:, m] * ext[:-2]
    return row


def _march_n(state: LatticeState, col_prev: np.ndarray, col: np.ndarray, beta: complex) -> Tuple[np.ndarray, np.ndarray]:
    """Advance two columns in n for N steps, wrapping m with Psi(m + M) = beta Psi(m)."""
    for n in range(state.N):
        up = np.concatenate([col[1:], [beta * col[0]]])
        nxt = up + state.A[n, :] * col + state.B[n, :] * col_prev
        col_prev, col = col, nxt
    return col_prev, col


def quasi_periodicity_check(state: LatticeState, kv: KernelVector) -> float:
    """Worst relative mismatch in Psi(n + N, m) = alpha Psi(n, m) and Psi(n, m + M) = beta Psi(n, m).

    Psi is pushed through the recurrence on the covering lattice: M steps in
    m from the row m = 0 (uses alpha only at the n-wraparound), and N steps
    in n from the columns n = -1, 0 (uses beta only at the m-wraparound).
    """
    grid = kv.grid
    alpha, beta = kv.alpha, kv.beta
    row_M = _march_m(state, grid[:, 0], alpha)
    err_m = np.abs(row_M - beta * grid[:, 0]).max() / np.abs(beta * grid[:, 0]).max()
    col_m1 = np.array([kv(-1, m) for m in range(state.M)])
    prev, last = _march_n(state, col_m1, grid[0, :], beta)
    target_prev, target = alpha * col_m1, alpha * grid[0, :]
    scale = max(np.abs(target).max(), np.abs(target_prev).max())
    err_n = max(np.abs(last - target).max(), np.abs(prev - target_prev).max()) / scale
    return float(max(err_m, err_n))


def minor_ratio(
    state: LatticeState,
    point: CurvePoint,
    row: TorusIndex,
    col1: TorusIndex,
    col2: TorusIndex,
) -> complex:
    """Psi(col1) / Psi(col2) as a ratio of signed minors of W taken from one row.

    The cofactor signs (-1)**(row + col) make this the ratio of two entries
    of a column of adj(W), which spans ker W on the curve.
    """
    W = assemble_W(state, point.alpha, point.beta)
    r = row.flat

    def cofactor(col: TorusIndex) -> complex:
        c = col.flat
        minor = np.delete(np.delete(W, r, axis=0), c, axis=1)
        return (-1) ** (r + c) * complex(np.linalg.det(minor))

    if col1 == col2:
        return 1.0 + 0j
    num, den = cofactor(col1), cofactor(col2)
    s = np.linalg.svd(W, compute_uv=False)
    scale = float(np.prod(s[:-1]))
    if abs(den) <= 1e-12 * scale:
        raise DegenerateError(f"minor for row {row.as_tuple()}, column {col2.as_tuple()} vanishes")
    return num / den


def branch_split(curve: CurvePolynomial, beta: complex) -> Tuple[np.ndarray, np.ndarray]:
    """Roots at large |beta| split into (|alpha| > 1, |alpha| < 1) branches."""
    alphas = np.array([p.alpha for p in curve_points_at_beta(curve, beta)])
    return alphas[np.abs(alphas) > 1], alphas[np.abs(alphas) < 1]


@dataclass(frozen=True)
class BranchRatios:
    radius: float
    large: np.ndarray  # alpha**M / beta**N on the large branch
    small: np.ndarray  # alpha**M * beta**N on the small branch


def branch_ratios(curve: CurvePolynomial, radius: float, phase: float = 0.3) -> BranchRatios:
    beta = radius * np.exp(1j * phase)
    large, small = branch_split(curve, beta)
    N, M = curve.N, curve.M
    return BranchRatios(radius, large**M / beta**N, small**M * beta**N)


def limiting_ratios(curve: CurvePolynomial) -> Tuple[complex, complex]:
    """Limits of the branch ratios from the dominant terms of the curve.

    Large branch: c[M,0] alpha^2M + c[0,N] alpha^M beta^N ~ 0.
    Small branch: c[0,N] alpha^M beta^N + c[-M,0] ~ 0 (after clearing alpha^M).
    """
    M, N = curve.M, curve.N
    return (
        -curve.coeff(0, N) / curve.coeff(M, 0),
        -curve.coeff(-M, 0) / curve.coeff(0, N),
    )


def stabilization(values_a: Sequence[complex], values_b: Sequence[complex]) -> float:
    """Worst relative change when each value in ``values_b`` is matched to its nearest in ``values_a``."""
    a = np.asarray(values_a)
    worst = 0.0
    for v in values_b:
        nearest = a[np.argmin(np.abs(a - v))]
        worst = max(worst, abs(v - nearest) / abs(v))
    return float(worst)
