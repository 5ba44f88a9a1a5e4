"""Acceptance criteria, one test per criterion.

Each test records a single ``CRITERION k: PASS|FAIL ...`` line, printed at the
end of the pytest run.  ``python3 tests/test_acceptance.py`` prints the same
lines without pytest.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES  # noqa: E402
from dkp.curve import (  # noqa: E402
    beta_zero_sign,
    block_X,
    curve_polynomial,
    det_W,
    expected_support,
    genus,
    newton_genus,
    scaling_error,
    special_state,
    special_support,
)
from dkp.eigen import (  # noqa: E402
    branch_ratios,
    branch_split,
    curve_points_at_beta,
    kernel_residual,
    kernel_vector,
    minor_ratio,
    recurrence_residuals,
    stabilization,
)
from dkp.flow import integrate  # noqa: E402
from dkp.kappa import (  # noqa: E402
    KAPPA_JUMPS,
    RHO_JUMPS,
    Case,
    build_kappa,
    build_rho,
    constraint_violations,
    euclid_case,
)
from dkp.lattice import TorusIndex, random_state  # noqa: E402
from oracles import first_position  # noqa: E402

SIZES = [(3, 2), (5, 2), (4, 3), (5, 3)]
KAPPA_32 = {(0, 0): 0, (1, 0): -1, (2, 0): 1, (0, 1): 0, (1, 1): 1, (2, 1): -1}
RHO_32 = {(0, 0): 0, (1, 0): 0, (2, 0): 0, (0, 1): 1, (1, 1): 0, (2, 1): -1}


def coprime_pairs(limit):
    return [(N, M) for N in range(3, limit + 1) for M in range(2, N) if math.gcd(N, M) == 1]


def crit1():
    start = time.perf_counter()
    bad = []
    for N, M in coprime_pairs(12):
        k, r = build_kappa(N, M), build_rho(N, M)
        if constraint_violations(k, KAPPA_JUMPS) or constraint_violations(r, RHO_JUMPS):
            bad.append((N, M, "relations"))
        if k(0, 0) != 0:
            bad.append((N, M, "kappa(0,0)"))
        if any(k(n, m) != -k(-n, -m) for n in range(N) for m in range(M)):
            bad.append((N, M, "antisymmetry"))
    k, r = build_kappa(3, 2), build_rho(3, 2)
    if {(n, m): k(n, m) for n in range(3) for m in range(2)} != KAPPA_32:
        bad.append((3, 2, "kappa table"))
    if {(n, m): r(n, m) for n in range(3) for m in range(2)} != RHO_32:
        bad.append((3, 2, "rho table"))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 1.0
    return ok, f"{len(coprime_pairs(12))} pairs, failures={bad}, runtime={elapsed:.3f}s"


def crit2():
    worst = 0.0
    rng = np.random.default_rng(2024)
    for N, M in SIZES:
        for seed in range(50):
            s = random_state(N, M, seed)
            for lam in (2.0, 1 + 1j):
                a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
                worst = max(worst, scaling_error(s, a, b, lam))
    return worst < 1e-10, f"max relative error {worst:.2e} (tol 1e-10), 50 seeds x 4 sizes x 2 lambdas"


def crit3():
    bad = []
    for N, M in SIZES:
        for seed in range(5):
            supp = curve_polynomial(random_state(N, M, seed)).support()
            if supp != expected_support(N, M) or supp != {(-i, j) for i, j in supp}:
                bad.append((N, M, seed))
    return not bad, f"mismatches={bad} over 4 sizes x 5 seeds"


def crit4():
    worst, bad = 0.0, []
    for N, M in [(3, 2), (5, 2), (4, 3)]:
        c = curve_polynomial(special_state(N, M))
        supp = c.support()
        if supp != special_support(N, M) or supp != {(M, 0), (0, N), (-M, 0)}:
            bad.append((N, M))
        for e in supp:
            worst = max(worst, abs(abs(c.coeff(*e)) - 1))
    return not bad and worst < 1e-10, f"support mismatches={bad}, max ||c|-1|={worst:.2e}"


def crit5():
    # the product of block determinants carries the sign of the block-cyclic
    # permutation, (-1)**(N(M-1)); it is +1 whenever N is even or M is odd
    worst = 0.0
    rng = np.random.default_rng(5)
    for N, M in SIZES:
        for seed in range(5):
            s = random_state(N, M, seed)
            for _ in range(20):
                a = complex(*rng.normal(size=2))
                prod = beta_zero_sign(N, M) * np.prod([np.linalg.det(block_X(s, m, a)) for m in range(M)])
                d = det_W(s, a, 0)
                worst = max(worst, abs(d - prod) / abs(d))
    return worst < 1e-10, f"max relative error {worst:.2e} (tol 1e-10), signed by (-1)^(N(M-1))"


def crit6():
    ok, parts = True, []
    for N, M in [(3, 2), (4, 3)]:
        for seed in range(3):
            s = random_state(N, M, seed)
            start = time.perf_counter()
            _, r1 = integrate(s, 1e-3, 1000, record_every=10)
            elapsed = time.perf_counter() - start
            _, r2 = integrate(s, 5e-4, 2000, record_every=20)
            ratio = r1.max_drift / r2.max_drift
            good = (
                r1.max_drift < 1e-8
                and r1.max_sum_A_drift < 1e-10
                and r1.max_prod_B_drift < 1e-10
                and 12 <= ratio <= 20
                and elapsed < 30
            )
            ok &= good
            parts.append(
                f"({N},{M}) seed {seed}: drift {r1.max_drift:.2e} sumA {r1.max_sum_A_drift:.1e} "
                f"prodB {r1.max_prod_B_drift:.1e} halving {ratio:.2f} {elapsed:.1f}s {'ok' if good else 'FAIL'}"
            )
    return ok, "; ".join(parts)


def crit7():
    bad = []
    pairs = coprime_pairs(8)
    for N, M in pairs:
        _, count = newton_genus(curve_polynomial(random_state(N, M, seed=0)))
        if count != (N - 1) * M or count != genus(N, M):
            bad.append((N, M, count))
    poly, count32 = newton_genus(curve_polynomial(random_state(3, 2, seed=1)))
    hand = set(poly.interior) == {(1, 1), (2, 1), (3, 1), (2, 2)}
    return not bad and count32 == 4 and hand, f"{len(pairs)} pairs, failures={bad}, (3,2) count={count32}"


def crit8():
    worst = {"kernel": 0.0, "recurrence": 0.0, "minor": 0.0, "row": 0.0}
    rng = np.random.default_rng(8)
    npts = 0
    for N, M in SIZES:
        s = random_state(N, M, seed=0)
        c = curve_polynomial(s)
        for _ in range(10):
            beta = complex(*rng.normal(size=2))
            for p in curve_points_at_beta(c, beta):
                npts += 1
                kv = kernel_vector(s, p)
                worst["kernel"] = max(worst["kernel"], kernel_residual(s, kv))
                worst["recurrence"] = max(worst["recurrence"], recurrence_residuals(s, kv).max())
                r1, r2, k, a = (TorusIndex(int(rng.integers(N)), int(rng.integers(M)), N, M) for _ in range(4))
                if k == a:
                    k = TorusIndex(a.n + 1, a.m, N, M)
                ratio = kv.psi[k.flat] / kv.psi[a.flat]
                m1, m2 = minor_ratio(s, p, r1, k, a), minor_ratio(s, p, r2, k, a)
                worst["minor"] = max(worst["minor"], abs(m1 - ratio) / abs(ratio))
                worst["row"] = max(worst["row"], abs(m1 - m2) / abs(m1))
    ok = (worst["kernel"] < 1e-9 and worst["recurrence"] < 1e-8
          and worst["minor"] < 1e-8 and worst["row"] < 1e-8)
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    return ok, f"{npts} points: {detail}"


def crit9():
    ok, parts = True, []
    for N, M in SIZES:
        c = curve_polynomial(random_state(N, M, seed=0))
        counts = []
        for radius in (1e4, 1e6):
            big, small = branch_split(c, radius * np.exp(0.3j))
            counts.append((len(big), len(small)))
        r4, r6 = branch_ratios(c, 1e4), branch_ratios(c, 1e6)
        st_large = stabilization(r4.large, r6.large)
        st_small = stabilization(r4.small, r6.small)
        good = all(cnt == (M, M) for cnt in counts) and st_large < 0.01 and st_small < 0.01
        ok &= good
        parts.append(f"({N},{M}) counts {counts} stabilization large {st_large:.2%} small {st_small:.2%}"
                     f" {'ok' if good else 'FAIL'}")
    return ok, "; ".join(parts)


def crit10():
    bad = []
    pairs = [(N, M) for N in range(2, 21) for M in range(2, 21) if N != M and math.gcd(N, M) == 1]
    for N, M in pairs:
        direct = Case.CASE1 if first_position(N, M, (1, 0)) < first_position(N, M, (-1, 0)) else Case.CASE2
        if euclid_case(N, M) is not direct or euclid_case(M, N) is not direct.opposite():
            bad.append((N, M))
    return not bad, f"{len(pairs)} ordered pairs, mismatches={bad}"


CRITERIA = [crit1, crit2, crit3, crit4, crit5, crit6, crit7, crit8, crit9, crit10]


def report(k):
    ok, detail = CRITERIA[k - 1]()
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok, line


@pytest.mark.acceptance
@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k):
    ok, line = report(k)
    assert ok, line


if __name__ == "__main__":
    results = [report(k)[0] for k in range(1, 11)]
    sys.exit(0 if all(results) else 1)
