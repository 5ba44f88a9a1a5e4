"""The discrete KP flow and its conservation diagnostics.

    dA(n,m)/dt = B(n,m) - B(n+1,m) + (sum_{k,l} kappa(k-n, l-m) A(k,l)) A(n,m)
    dB(n,m)/dt = (sum_{k,l} rho(k-n, l-m) A(k,l)) B(n,m)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .curve import CurvePolynomial, curve_polynomial
from .errors import DegenerateError
from .kappa import SignTable, build_kappa, build_rho
from .lattice import LatticeState

DRIFT_FLOOR = 1e-12
B_UNDERFLOW = 1e-300


@dataclass(frozen=True, eq=False)
class FlowDerivative:
    dA: np.ndarray
    dB: np.ndarray


def correlate(kernel: np.ndarray, A: np.ndarray) -> np.ndarray:
    """S(n, m) = sum_{a,b} kernel(a, b) A(n + a, m + b) on the torus."""
    out = np.zeros(A.shape, dtype=complex)
    for a, b in np.argwhere(kernel != 0):
        out += kernel[a, b] * np.roll(A, (-a, -b), axis=(0, 1))
    return out


def _rhs(A: np.ndarray, B: np.ndarray, kappa: np.ndarray, rho: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    dA = B - np.roll(B, -1, axis=0) + correlate(kappa, A) * A
    dB = correlate(rho, A) * B
    return dA, dB


def _tables(state: LatticeState, kappa: Optional[SignTable], rho: Optional[SignTable]):
    kappa = build_kappa(state.N, state.M) if kappa is None else kappa
    rho = build_rho(state.N, state.M) if rho is None else rho
    for t in (kappa, rho):
        if (t.N, t.M) != (state.N, state.M):
            raise ValueError(f"{t.kind} table is for ({t.N}, {t.M}), state is ({state.N}, {state.M})")
    return kappa, rho


def flow_rhs(state: LatticeState, kappa: Optional[SignTable] = None, rho: Optional[SignTable] = None) -> FlowDerivative:
    kappa, rho = _tables(state, kappa, rho)
    dA, dB = _rhs(state.A, state.B, kappa.values, rho.values)
    return FlowDerivative(dA, dB)


def _rhs_log(A: np.ndarray, U: np.ndarray, kappa: np.ndarray, rho: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vector field in the variables (A, U = log B)."""
    B = np.exp(U)
    dA = B - np.roll(B, -1, axis=0) + correlate(kappa, A) * A
    dU = correlate(rho, A)
    return dA, dU


def rk4_step(A, U, dt, kappa, rho):
    """One classical RK4 step in (A, log B).

    Both sum(A) and sum(log B) have vanishing time derivative as linear
    functionals, and RK4 preserves linear invariants, so sum(A) and prod(B)
    are kept to roundoff.
    """
    k1 = _rhs_log(A, U, kappa, rho)
    k2 = _rhs_log(A + 0.5 * dt * k1[0], U + 0.5 * dt * k1[1], kappa, rho)
    k3 = _rhs_log(A + 0.5 * dt * k2[0], U + 0.5 * dt * k2[1], kappa, rho)
    k4 = _rhs_log(A + dt * k3[0], U + dt * k3[1], kappa, rho)
    A = A + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    U = U + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return A, U


def conserved_vector(state: LatticeState, curve: Optional[CurvePolynomial] = None) -> np.ndarray:
    """All (2M + 1)(N + 1) curve coefficients, ordered by (i, j) with i from -M."""
    curve = curve_polynomial(state) if curve is None else curve
    return curve.coeffs.reshape(-1).copy()


def coefficient_labels(N: int, M: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(-M, M + 1) for j in range(N + 1)]


def _rel(value, ref) -> float:
    return float(abs(value - ref) / max(abs(ref), DRIFT_FLOOR))


@dataclass
class DriftReport:
    """Relative drift of the curve coefficients along a trajectory.

    Only coefficients in the support of the initial curve are tracked; the
    rest are structurally zero and carry pure roundoff.
    """

    dt: float
    steps: int
    tracked: List[Tuple[int, int]]
    initial: np.ndarray
    scale: np.ndarray
    record_steps: List[int] = field(default_factory=list)
    drifts: List[np.ndarray] = field(default_factory=list)
    sum_A_drift: List[float] = field(default_factory=list)
    prod_B_drift: List[float] = field(default_factory=list)

    @property
    def times(self) -> List[float]:
        return [s * self.dt for s in self.record_steps]

    @property
    def max_drift(self) -> float:
        return float(max((d.max() for d in self.drifts), default=0.0))

    @property
    def max_sum_A_drift(self) -> float:
        return max(self.sum_A_drift, default=0.0)

    @property
    def max_prod_B_drift(self) -> float:
        return max(self.prod_B_drift, default=0.0)

    def per_coefficient_max(self) -> Dict[Tuple[int, int], float]:
        stacked = np.max(np.array(self.drifts), axis=0) if self.drifts else np.zeros(len(self.tracked))
        return {ij: float(v) for ij, v in zip(self.tracked, stacked)}


def integrate(
    state: LatticeState,
    dt: float,
    steps: int,
    record_every: int = 10,
    kappa: Optional[SignTable] = None,
    rho: Optional[SignTable] = None,
    workers: Optional[int] = None,
) -> Tuple[LatticeState, DriftReport]:
    """Fixed-step classical RK4, recording coefficient drift every ``record_every`` steps.

    B is advanced through log B (the B equation is linear in log B), which
    keeps B nonzero and prod(B) conserved.  The final step is always recorded.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if steps < 1 or record_every < 1:
        raise ValueError("steps and record_every must be at least 1")
    kappa, rho = _tables(state, kappa, rho)
    curve0 = curve_polynomial(state, workers=workers)
    tracked = sorted(curve0.support())
    c0 = np.array([curve0.coeff(i, j) for i, j in tracked])
    report = DriftReport(dt, steps, tracked, c0, np.maximum(np.abs(c0), DRIFT_FLOOR))
    sum_A0 = state.A.sum()
    prod_B0 = np.prod(state.B)

    A, U = np.array(state.A), np.log(state.B)
    B = np.array(state.B)
    for step in range(1, steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            A, U = rk4_step(A, U, dt, kappa.values, rho.values)
            B = np.exp(U)
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise DegenerateError(f"flow blew up at step {step}")
        if np.min(np.abs(B)) < B_UNDERFLOW:
            raise DegenerateError(f"|B| underflowed at step {step}")
        if step % record_every == 0 or step == steps:
            current = LatticeState(state.N, state.M, A, B)
            curve = curve_polynomial(current, workers=workers)
            c = np.array([curve.coeff(i, j) for i, j in tracked])
            report.record_steps.append(step)
            report.drifts.append(np.abs(c - c0) / report.scale)
            report.sum_A_drift.append(_rel(A.sum(), sum_A0))
            report.prod_B_drift.append(_rel(np.prod(B), prod_B0))
    return LatticeState(state.N, state.M, A, B), report
