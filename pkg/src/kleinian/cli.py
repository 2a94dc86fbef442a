"""Command-line front end.

    kleinian periods     --curve c27 --digits 30
    kleinian verify      --set app_b_34 --seed 7 --trials 3 --tol 1e-6
    kleinian basis-rank  --curve c34 --pole-order 3
    kleinian addition    --curve c34 --formula 3t3v --tol 1e-5
    kleinian sw          --curve c27
    kleinian audit       --set bilinear34

``--curve`` takes a JSON curve file or a tag (c23, c27, c34, c34r, c29); a
tag draws random coefficients from ``--seed``.  Exit codes: 0 all checks
pass, 1 a relation fails, 2 only ambiguous transcriptions unresolved, 10 and
above operational errors (usage errors give 10).  A JSON report is written
even on failure, except for usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import traceback
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import relationdb as rdb
from .curvedef import NAMED, CapabilityError, ValidationError, load_curve, make_curve, random_lambda, \
    schur_weierstrass

EXIT_OK, EXIT_FAIL, EXIT_AMBIGUOUS = 0, 1, 2
EXIT_CODES = {"validation": 10, "capability": 11, "sampling": 12, "calibration": 13, "integrity": 14,
              "parse": 15, "internal": 19}


def _error_kind(exc: BaseException) -> str:
    from .thetasigma import CalibrationError
    if isinstance(exc, rdb.IntegrityError):
        return "integrity"
    if isinstance(exc, rdb.ParseError):
        return "parse"
    if isinstance(exc, rdb.SamplingError):
        return "sampling"
    if isinstance(exc, CalibrationError):
        return "calibration"
    if isinstance(exc, CapabilityError):
        return "capability"
    if isinstance(exc, (ValidationError, ValueError)):
        return "validation"
    return "internal"


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def resolve_curve(curve_arg: str | None, seed: int, default_tag: str | None = None):
    curve_arg = curve_arg or default_tag
    if curve_arg is None:
        raise ValidationError("--curve is required")
    if curve_arg in NAMED:
        n, s = NAMED[curve_arg]
        lam = random_lambda(n, s, np.random.default_rng(seed), restricted=(curve_arg == "c34r"))
        return make_curve(n, s, lam, name=curve_arg)
    if not Path(curve_arg).exists():
        raise ValidationError(f"curve file {curve_arg!r} not found")
    return load_curve(curve_arg)


def build_context(curve, digits: int, seed: int):
    from .abelfunc import EvalContext
    from .periods import compute_periods
    from .thetasigma import calibrate
    periods = compute_periods(curve, precision_digits=digits)
    cal = calibrate(curve, periods, seed=seed)
    return EvalContext(curve, periods, cal, precision_digits=digits)


def _set_threads(n: int | None):
    if not n:
        return
    try:
        import numba
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except ImportError:
        pass


# ---------------------------------------------------------------------------
# commands; each returns (exit code, report dict)

def cmd_periods(args):
    from .periods import compute_periods
    curve = resolve_curve(args.curve, args.seed)
    p = compute_periods(curve, precision_digits=args.digits)
    return EXIT_OK, {"command": "periods", "curve": curve.to_json(), "periods": p.to_json()}


def _curve_tag_for_set(name: str) -> str:
    if name in rdb.BASIS_SETS:
        return rdb.BASIS_SETS[name][0]
    rs = rdb.load_set(name)
    return "c34r" if rs.meta.get("restricted") else rs.curve


def cmd_verify(args):
    if not args.set:
        raise ValidationError("verify needs --set")
    curve = resolve_curve(args.curve, args.seed, _curve_tag_for_set(args.set))
    ctx = build_context(curve, args.digits, args.seed)
    if args.set in rdb.BASIS_SETS:
        tag, order = rdb.BASIS_SETS[args.set]
        rep = rdb.basis_rank(ctx, order, seed=args.seed)
        ok = rep["rank"] == rep["expected_dim"]
        return (EXIT_OK if ok else EXIT_FAIL), {"command": "verify", "set": args.set, "basis_rank": rep}
    rs = rdb.load_set(args.set)
    report = rdb.verify_set(ctx, rs, trials=args.trials, tol=args.tol, seed=args.seed)
    out = {"command": "verify", "calibration": _calibration_summary(ctx), **report.to_json()}
    return report.exit_code(), out


def cmd_basis_rank(args):
    curve = resolve_curve(args.curve, args.seed)
    ctx = build_context(curve, args.digits, args.seed)
    rep = rdb.basis_rank(ctx, args.pole_order, seed=args.seed)
    out = {"command": "basis-rank", **rep}
    if curve.key == (2, 7) and args.pole_order == 3:
        out["dependent_pair"] = rdb.dependent_pair_check(ctx, seed=args.seed)
    ok = rep["rank"] == rep["expected_dim"]
    return (EXIT_OK if ok else EXIT_FAIL), out


def cmd_addition(args):
    if not args.formula:
        raise ValidationError("addition needs --formula")
    default = {"2t2v": "c34", "3t3v": "c34", "4t2v": "c34r"}.get(args.formula)
    curve = resolve_curve(args.curve, args.seed, default)
    rs = rdb.addition_set_for(args.formula, curve)
    ctx = build_context(curve, args.digits, args.seed)
    report = rdb.verify_addition(ctx, rs, trials=args.trials, tol=args.tol, seed=args.seed)
    out = {"command": "addition", "formula": args.formula, **report.to_json()}
    return report.exit_code(), out


def cmd_sw(args):
    from .exactpoly import to_text
    curve = resolve_curve(args.curve, args.seed)
    text = to_text(schur_weierstrass(curve))
    print(text)
    return EXIT_OK, {"command": "sw", "curve": list(curve.key), "polynomial": text}


def cmd_audit(args):
    if not args.set:
        raise ValidationError("audit needs --set")
    rs = rdb.load_set(args.set)
    out = {"command": "audit", "set": rs.name, "count": len(rs.relations),
           "declared_count": rs.declared_count, "weights": rdb.audit_weights(rs)}
    ok = out["weights"]["all_ok"]
    if rs.name.startswith("bilinear"):
        out["parity"] = rdb.audit_parity(rs)
        ok = ok and out["parity"]["all_odd"]
    if rs.name in ("app_c_quad27", "app_d_quad34"):
        out["lint"] = rdb.lint_quadratic(rs)
        ok = ok and out["lint"]["all_ok"]
    return (EXIT_OK if ok else EXIT_FAIL), out


def _calibration_summary(ctx) -> dict:
    fit = ctx.calibration.fit_report.get("kappa_fit", {})
    return {"kappa_identified": fit.get("identified"), "kappa_residual": fit.get("final_residual"),
            "fit_relations": ctx.calibration.fit_report.get("fit_relations", []),
            "normalization_relative_difference":
                ctx.calibration.fit_report.get("normalization", {}).get("relative_difference")}


COMMANDS = {"periods": cmd_periods, "verify": cmd_verify, "basis-rank": cmd_basis_rank,
            "addition": cmd_addition, "sw": cmd_sw, "audit": cmd_audit}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kleinian", description="Abelian functions of trigonal and "
                                "hyperelliptic curves: periods, sigma calibration and relation checks")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--curve")
    p.add_argument("--set")
    p.add_argument("--formula", choices=["2t2v", "3t3v", "4t2v"])
    p.add_argument("--pole-order", type=int, choices=[2, 3, 4], default=2)
    p.add_argument("--digits", type=int, default=30)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse uses 2, which means "ambiguous" here
        return EXIT_OK if exc.code in (0, None) else EXIT_CODES["validation"]
    _set_threads(args.threads)
    out_path = Path(args.out or f"kleinian_{args.command.replace('-', '_')}.json")
    t0 = time.perf_counter()
    try:
        code, report = COMMANDS[args.command](args)
    except Exception as exc:  # every failure still produces a report
        kind = _error_kind(exc)
        code = EXIT_CODES[kind]
        report = {"command": args.command, "error": {"kind": kind, "code": code, "message": str(exc)}}
        if kind == "internal":
            report["error"]["traceback"] = traceback.format_exc()
        print(f"error ({kind}): {exc}", file=sys.stderr)
    report["exit_code"] = code
    out_path.write_text(json.dumps(to_jsonable(report), indent=1, sort_keys=True) + "\n")
    if args.command != "sw":
        summary = report.get("summary") or {k: report[k] for k in ("rank", "expected_dim") if k in report}
        print(f"{args.command}: exit {code} {json.dumps(to_jsonable(summary))} "
              f"({time.perf_counter() - t0:.1f}s) -> {out_path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
