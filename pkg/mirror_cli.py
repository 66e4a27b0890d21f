# mirror_cli.py
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from dotenv import load_dotenv

from config_loader import load_config, options_from_env, resolve_config_path
from electrostatics import ContactError
from equilibrium_solver import (
    MODEL_BENDING,
    MODELS,
    EquilibriumPoint,
    regime_report,
    solve_point,
    sweep,
    theta_grid,
)
from geometry import ConfigError, section_properties
from pullin_detector import PullInNotFound, find_pullin, solve_for_voltage
from results_writer import (
    DEFAULT_SHAPE_SAMPLES,
    RESULTS_DIR,
    curve_frame,
    sample_shape,
    write_curve_csv,
    write_shape_csv,
)
from scaling_study import run_scaling_study
from self_checks import run_self_checks

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONVERGENCE = 3
EXIT_CONTACT = 4


class ConvergenceError(RuntimeError):
    """A requested operating point did not converge within max_iterations."""


# -----------------------------
# Argument parsing
# -----------------------------
def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="reference", help="Device JSON file, or a name under ./configs")
    common.add_argument("--load-tol", type=float, default=None, help="Relative tolerance on the equivalent load")
    common.add_argument("--max-iter", type=int, default=None, help="Fixed-point iteration cap")
    common.add_argument("--relax", type=float, default=None, help="Load relaxation factor in (0, 1]")
    common.add_argument("--quad-points", type=int, default=None, help="Simpson points per electrode segment (odd)")
    common.add_argument("--jobs", type=int, default=None, help="Parallel workers for sweeps (-1 = all cores)")
    common.add_argument("--debug", action="store_true", help="Print solver diagnostics")

    parser = argparse.ArgumentParser(
        prog="mirror_cli",
        description="Static tilt, bending and pull-in of an electrostatic torsional micromirror.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="Voltage-tilt curve over a uniform tilt grid")
    p.add_argument("--points", type=int, default=None, help="Grid points (default 200)")
    p.add_argument("--theta-max", type=float, default=None, help="Largest tilt in rad (default 0.98 theta_geo)")
    p.add_argument("--model", choices=MODELS, default=MODEL_BENDING)
    p.add_argument("--out", default=None, help="Curve CSV path")
    p.add_argument("--progress", action="store_true", help="Show a progress bar")

    p = sub.add_parser("pullin", parents=[common], help="Pull-in voltage, angle and deflection")
    p.add_argument("--model", choices=MODELS, default=MODEL_BENDING)

    p = sub.add_parser("shape", parents=[common], help="Deformed axis at one operating point")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--theta", type=float, help="Tilt in rad")
    target.add_argument("--voltage", type=float, help="Applied voltage in V")
    p.add_argument("--samples", type=int, default=DEFAULT_SHAPE_SAMPLES, help="Points along the axis")
    p.add_argument("--out", default=None, help="Shape CSV path")

    sub.add_parser("check", parents=[common], help="Run the numerical self-checks")

    p = sub.add_parser("scale", parents=[common], help="Pull-in of uniformly scaled copies of the device")
    p.add_argument("--factors", type=float, nargs="+", required=True, help="Scale factors")
    p.add_argument("--model", choices=MODELS, default=MODEL_BENDING)
    p.add_argument("--out", default=None, help="Optional CSV path for the summary")

    return parser


def _print_point(point: EquilibriumPoint) -> None:
    print(f"theta    = {point.theta:.9g} rad ({point.theta_deg:.6f} deg)")
    print(f"voltage  = {point.voltage:.9g} V")
    print(f"w_eq     = {point.w_eq:.9g} N/m")
    print(f"u_max    = {point.u_max:.9g} m")
    print(f"iterations = {point.iterations} (converged: {point.converged})")


def _require_converged(point: EquilibriumPoint) -> None:
    if not point.converged:
        raise ConvergenceError(
            f"fixed point did not converge at theta={point.theta:.6g} rad after {point.iterations} iterations"
        )


# -----------------------------
# Subcommands
# -----------------------------
def _cmd_sweep(args, config, props, opts, stem: str) -> int:
    grid = theta_grid(config, opts, theta_max=args.theta_max, n_points=args.points)
    curve = sweep(config, props, grid, opts, args.model, progress=args.progress, debug=args.debug)

    out = Path(args.out) if args.out else RESULTS_DIR / f"{stem}_{args.model}_curve.csv"
    write_curve_csv(curve, out)

    df = curve_frame(curve)
    print(f"{args.model} sweep: {len(df)}/{len(grid)} points written to {out}")
    if len(df):
        print(f"  V range {df['voltage_v'].min():.6g} .. {df['voltage_v'].max():.6g} V")
    n_bad = int((~df["converged"]).sum())
    if n_bad:
        print(f"WARN: {n_bad} point(s) did not converge (see the 'converged' column)")
    if curve.truncated_reason:
        print(f"WARN: curve truncated at theta={curve.truncated_theta:.6g} rad: {curve.truncated_reason}")
    return EXIT_OK


def _cmd_pullin(args, config, props, opts) -> int:
    res = find_pullin(config, props, opts, args.model, debug=args.debug)
    _require_converged(res.point)

    print(f"model     = {res.model}")
    print(f"V_PI      = {res.v_pullin:.9g} V")
    print(f"theta_PI  = {res.theta_pullin:.9g} rad ({res.theta_pullin_deg:.6f} deg)")
    print(f"u_max_PI  = {res.u_max_pullin:.9g} m")

    report = regime_report(config, res.point)
    print(f"u_max/gap = {report['u_max_over_gap']:.4f}")
    print(f"L_m/W_m   = {report['aspect_ratio']:.2f}")
    for w in report["warnings"]:
        print(f"WARN: {w}")
    return EXIT_OK


def _cmd_shape(args, config, props, opts, stem: str) -> int:
    if args.theta is not None:
        if args.theta >= config.theta_geo:
            raise ContactError(
                f"theta={args.theta:.6g} rad puts the electrode edge on the plate (geometric limit {config.theta_geo:.6g} rad)"
            )
        point = solve_point(config, props, args.theta, opts, MODEL_BENDING, debug=args.debug)
    else:
        point = solve_for_voltage(config, props, args.voltage, opts, MODEL_BENDING, debug=args.debug)
    _require_converged(point)

    out = Path(args.out) if args.out else RESULTS_DIR / f"{stem}_shape.csv"
    write_shape_csv(sample_shape(point.shape, args.samples), out)

    _print_point(point)
    print(f"shape written to {out}")
    return EXIT_OK


def _cmd_check(args, config, opts) -> int:
    results = run_self_checks(config, opts, debug=args.debug)
    for r in results:
        print(f"[{'ok' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"ERROR: {len(failed)}/{len(results)} self-check(s) failed", file=sys.stderr)
        return EXIT_CONVERGENCE
    print(f"All {len(results)} self-checks passed.")
    return EXIT_OK


def _cmd_scale(args, config, opts) -> int:
    df = run_scaling_study(config, args.factors, opts, args.model, debug=args.debug)
    print(df.to_string(index=False))
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(out, index=False, float_format="%.17g", lineterminator="\n")
        print(f"summary written to {out}")
    n_missing = int(df["v_pullin_v"].isna().sum())
    if n_missing:
        print(f"WARN: {n_missing} scale factor(s) are contact-limited (no interior pull-in)")
    return EXIT_OK


# -----------------------------
# Entry point
# -----------------------------
def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        path = resolve_config_path(args.config)
        config = load_config(path)
        opts = options_from_env(
            {
                "load_rel_tol": args.load_tol,
                "max_iterations": args.max_iter,
                "relaxation": args.relax,
                "quad_points": args.quad_points,
                "n_jobs": args.jobs,
            }
        )
        props = section_properties(config)
        stem = path.stem

        if args.command == "sweep":
            return _cmd_sweep(args, config, props, opts, stem)
        if args.command == "pullin":
            return _cmd_pullin(args, config, props, opts)
        if args.command == "shape":
            return _cmd_shape(args, config, props, opts, stem)
        if args.command == "check":
            return _cmd_check(args, config, opts)
        if args.command == "scale":
            return _cmd_scale(args, config, opts)
        parser.error(f"unknown command {args.command!r}")
    except (ContactError, PullInNotFound) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_CONTACT
    except ConvergenceError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ConfigError, ValueError, OSError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    return EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(cli_main(argv))


if __name__ == "__main__":
    main()
