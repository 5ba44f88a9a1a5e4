"""Command-line interface: ``dkp {random,kappa,curve,flow,check,eigen}``.

Exit codes: 0 success, 1 check failure, 2 usage or parse error,
3 invariant violation in input data.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import curve as curve_mod
from .eigen import (
    curve_points_at_beta,
    kernel_residual,
    kernel_vector,
    quasi_periodicity_check,
    recurrence_residuals,
)
from .errors import ConstraintError, DKPError, InvariantError, StateFileError
from .flow import flow_rhs, integrate
from .kappa import build_kappa, build_phi, build_rho
from .lattice import LatticeState, dumps_state, load_state, random_state, save_state

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _cplx(z) -> List[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _positive(kind):
    def parse(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return parse


def _complex_pair(text: str) -> complex:
    try:
        re_s, im_s = text.split(",")
        return complex(float(re_s), float(im_s))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}") from exc


def _load(path: str) -> LatticeState:
    if not Path(path).is_file():
        raise UsageError(f"state file not found: {path}")
    return load_state(path)


def cmd_random(args) -> int:
    try:
        state = random_state(args.N, args.M, args.seed, args.a_radius, (args.b_min, args.b_max))
    except (ConstraintError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if args.out:
        save_state(state, args.out)
    else:
        sys.stdout.write(dumps_state(state))
    return EXIT_OK


def cmd_kappa(args) -> int:
    try:
        tables = [build_kappa(args.N, args.M), build_rho(args.N, args.M), build_phi(args.N, args.M)]
    except ConstraintError as exc:
        raise UsageError(str(exc)) from exc
    rows = [(n, m) + tuple(t(n, m) for t in tables) for m in range(args.M) for n in range(args.N)]
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "m", "kappa", "rho", "phi"])
        writer.writerows(rows)
        _emit(buf.getvalue(), args.out)
    else:
        data = {"N": args.N, "M": args.M, "rows": [dict(zip(["n", "m", "kappa", "rho", "phi"], r)) for r in rows]}
        _emit(json.dumps(data, indent=1) + "\n", args.out)
    return EXIT_OK


def curve_report(state: LatticeState, rel_tol: float) -> dict:
    curve = curve_mod.curve_polynomial(state, rel_tol=rel_tol)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        poly, count = curve_mod.newton_genus(curve)
    generic = curve.support() == curve_mod.expected_support(state.N, state.M)
    return {
        "N": state.N,
        "M": state.M,
        "threshold": curve.threshold,
        "coefficients": [{"i": i, "j": j, "re": c.real, "im": c.imag} for i, j, c in curve.items()],
        "support": sorted([list(e) for e in curve.support()]),
        "hull": [list(v) for v in poly.vertices],
        "interior_count": count,
        "genus_expected": curve_mod.genus(state.N, state.M),
        "generic_support": generic,
        "warnings": ["non-generic support"] if not generic else [str(w.message) for w in caught],
    }


def cmd_curve(args) -> int:
    state = _load(args.state)
    report = curve_report(state, args.threshold)
    if args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["i", "j", "re", "im"])
        for c in report["coefficients"]:
            writer.writerow([c["i"], c["j"], _fmt(c["re"]), _fmt(c["im"])])
        Path(args.csv).write_text(buf.getvalue(), encoding="utf-8")
    _emit(json.dumps(report, indent=1) + "\n", args.out)
    if report["warnings"]:
        print("warning: " + "; ".join(report["warnings"]), file=sys.stderr)
    return EXIT_OK


def cmd_flow(args) -> int:
    state = _load(args.state)
    final, report = integrate(state, args.dt, args.steps, args.record_every)
    if args.final_state:
        save_state(final, args.final_state)
    labels = [f"c[{i},{j}]" for i, j in report.tracked]
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["step", "time", "max_rel_drift"] + labels)
        for step, t, d in zip(report.record_steps, report.times, report.drifts):
            writer.writerow([step, _fmt(t), _fmt(d.max())] + [_fmt(x) for x in d])
        text = buf.getvalue()
    else:
        text = json.dumps(
            {
                "dt": args.dt,
                "steps": args.steps,
                "record_every": args.record_every,
                "max_rel_drift": report.max_drift,
                "max_sum_A_drift": report.max_sum_A_drift,
                "max_prod_B_drift": report.max_prod_B_drift,
                "per_coefficient": [
                    {"i": i, "j": j, "max_rel_drift": v} for (i, j), v in report.per_coefficient_max().items()
                ],
            },
            indent=1,
        ) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def run_checks(state: LatticeState, seed: int = 0) -> List[dict]:
    """Structural checks on one state; each entry has name, status and detail."""
    N, M = state.N, state.M
    rng = np.random.default_rng(seed)
    results = []

    def add(name, ok, detail, status=None):
        results.append({"name": name, "status": status or ("pass" if ok else "fail"), "detail": detail})

    worst = 0.0
    for lam in (2.0, 1 + 1j):
        for _ in range(5):
            a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            worst = max(worst, curve_mod.scaling_error(state, a, b, lam))
    add("scaling_law", worst < 1e-10, {"max_rel_error": worst})

    curve = curve_mod.curve_polynomial(state)
    supp = curve.support()
    mirrored = frozenset((-i, j) for i, j in supp)
    add("support_symmetry", supp == mirrored, {"support_size": len(supp)})

    expected = curve_mod.expected_support(N, M)
    special = curve_mod.special_support(N, M)
    if supp == expected:
        add("support_count", True, {"support_size": len(supp), "branch": "generic"})
    elif supp == special:
        add("support_count", True, {"support_size": len(supp), "branch": "special three-term support"})
    else:
        add("support_count", False, {"support_size": len(supp), "expected": len(expected)})

    worst = 0.0
    for _ in range(20):
        a = complex(*rng.normal(size=2))
        d = curve_mod.det_W(state, a, 0)
        worst = max(worst, abs(d - curve_mod.split_product(state, a)) / abs(d))
    add("beta_zero_split", worst < 1e-10, {"max_rel_error": worst})

    if supp == expected:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, count = curve_mod.newton_genus(curve)
        add("newton_genus", count == curve_mod.genus(N, M), {"interior_count": count, "genus": curve_mod.genus(N, M)})
    else:
        add("newton_genus", True, {"reason": "non-generic support"}, status="skipped")

    d = flow_rhs(state)
    scale_A = max(np.abs(d.dA).max(), 1e-300)
    sum_dA = abs(d.dA.sum()) / scale_A
    log_rates = d.dB / state.B
    sum_dB = abs(log_rates.sum()) / max(np.abs(log_rates).max(), 1e-300)
    add(
        "rhs_identities",
        sum_dA < 1e-13 * state.A.size and sum_dB < 1e-13 * state.A.size,
        {"sum_dA_rel": sum_dA, "sum_dB_over_B_rel": sum_dB},
    )
    return results


def cmd_check(args) -> int:
    state = _load(args.state)
    results = run_checks(state)
    failed = [r["name"] for r in results if r["status"] == "fail"]
    report = {"passed": not failed, "checks": results}
    if failed:
        report["first_failure"] = failed[0]
    _emit(json.dumps(report, indent=1) + "\n", args.out)
    if failed:
        print(f"check failed: {failed[0]}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_eigen(args) -> int:
    state = _load(args.state)
    curve = curve_mod.curve_polynomial(state)
    points = []
    for p in curve_points_at_beta(curve, args.beta):
        entry = {"alpha": _cplx(p.alpha), "residual": p.residual, "clustered": p.clustered}
        try:
            kv = kernel_vector(state, p)
        except DKPError as exc:
            entry["error"] = str(exc)
        else:
            entry["kernel_residual"] = kernel_residual(state, kv)
            entry["recurrence_residual"] = float(recurrence_residuals(state, kv).max())
            entry["quasi_periodicity_residual"] = quasi_periodicity_check(state, kv)
        points.append(entry)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["alpha_re", "alpha_im", "residual", "kernel_residual", "recurrence_residual"])
        for e in points:
            writer.writerow([_fmt(e["alpha"][0]), _fmt(e["alpha"][1]), _fmt(e["residual"]),
                             _fmt(e.get("kernel_residual", float("nan"))),
                             _fmt(e.get("recurrence_residual", float("nan")))])
        text = buf.getvalue()
    else:
        text = json.dumps({"beta": _cplx(args.beta), "points": points}, indent=1) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dkp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("random", help="write a seeded random state file")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--a-radius", type=float, default=1.0)
    p.add_argument("--b-min", type=float, default=0.5)
    p.add_argument("--b-max", type=float, default=1.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("kappa", help="print the kappa, rho, phi tables")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("curve", help="extract the spectral curve of a state")
    p.add_argument("state")
    p.add_argument("--threshold", type=_positive(float), default=curve_mod.SUPPORT_REL_TOL,
                   help="relative zero threshold for the support")
    p.add_argument("--out")
    p.add_argument("--csv", help="also write coefficients as CSV")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("flow", help="integrate the flow and report curve drift")
    p.add_argument("state")
    p.add_argument("--dt", type=_positive(float), default=1e-3)
    p.add_argument("--steps", type=_positive(int), default=1000)
    p.add_argument("--record-every", type=_positive(int), default=10)
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--out")
    p.add_argument("--final-state")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("check", help="run the structural checks on a state")
    p.add_argument("state")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eigen", help="curve points and kernel vectors at fixed beta")
    p.add_argument("state")
    p.add_argument("--beta", type=_complex_pair, required=True, help="RE,IM")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eigen)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for attr in ("out", "csv", "final_state"):
        target = getattr(args, attr, None)
        if target and not Path(target).resolve().parent.is_dir():
            print(f"error: output directory does not exist for {target}", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StateFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"error: invalid input data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DKPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
