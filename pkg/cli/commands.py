"""
cli/commands.py
───────────────
The four epiwave commands and the argparse front end.

  analyze     r0, equilibria, c* and lambda*          → summary.csv
  dispersion  sampled dispersion curve                → dispersion.csv
  simulate    reaction-diffusion run and diagnostics  → snap_<t>.csv, front.csv,
                                                         report_*.csv, manifest.csv
  certify     upper/lower wave profile certificate    → report_certificate.csv

Exit codes: 0 ok, 1 certificate failed, 2 config parse, 3 invalid params,
4 bad dispersion range, 5 solver instability, 6 speed or r0 not supercritical.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from certificates.supersub import check_constraints, default_certificate, default_grid, verify_supersub
from cli.config_loader import ConfigParseError, load_run_config
from cli.csv_writer import format_number, snapshot_name, write_csv
from dispersion.branches import NonpositiveLambda
from dispersion.wave_speed import (
    SpeedNotSupercritical,
    SubcriticalR0,
    minimal_wave_speed,
    sample_curve,
)
from model_core.derived import InvalidParams, derived_quantities
from model_core.equilibria import NoEndemicEquilibrium, disease_free_equilibrium, endemic_equilibrium
from rd_solver.grid import SimConfig
from rd_solver.solver import InstabilityDetected, auto_dt, run
from schemas.params_schema import RunConfig
from wavelab.diagnostics import (
    comparability_check,
    conservation_report,
    extinction_report,
    harnack_gradient_check,
    lower_bound_report,
    lyapunov_profile,
    positive_extent,
    reflected_profile,
)
from wavelab.fronts import InsufficientPoints, estimate_speed, front_position, track_front

EXIT_OK = 0
EXIT_CERTIFICATE_FAILED = 1
EXIT_CONFIG = 2
EXIT_INVALID_PARAMS = 3
EXIT_BAD_RANGE = 4
EXIT_INSTABILITY = 5
EXIT_NOT_SUPERCRITICAL = 6

HARNACK_CORE_FRACTION = 0.05


def _log(message: str) -> None:
    print(f"[epiwave] {message}")


# ─────────────────────────────────────────────────────────────────────────────
# ANALYZE
# ─────────────────────────────────────────────────────────────────────────────

def cmd_analyze(config: RunConfig, out_dir: Path) -> int:
    p = config.params
    dq = derived_quantities(p)
    rows: list[tuple[str, object]] = [(key, value) for key, value in dq.as_dict().items()]

    e0 = disease_free_equilibrium(p)
    rows += [(f"e0_{key}", value) for key, value in e0.as_dict().items()]
    _log(f"r0 = {dq.r0!r}  alpha_max(0) = {dq.alpha_max_zero!r}")
    _log(f"disease-free: {e0.as_dict()}")

    try:
        e1 = endemic_equilibrium(p)
        rows += [(f"e1_{key}", value) for key, value in e1.as_dict().items()]
        _log(f"endemic: {e1.as_dict()}")
    except NoEndemicEquilibrium as e:
        rows.append(("endemic", "none"))
        _log(f"endemic: none ({e})")

    try:
        result = minimal_wave_speed(p)
        rows += [("c_star", result.c_star), ("lambda_star", result.lambda_star)]
        _log(f"c* = {result.c_star!r} at lambda* = {result.lambda_star!r}")
    except SubcriticalR0:
        rows += [("c_star", "subcritical"), ("lambda_star", "subcritical")]
        _log("c*: subcritical")

    path = write_csv(out_dir / "summary.csv", ["quantity", "value"], rows)
    _log(f"wrote {path}")
    return EXIT_OK


# ─────────────────────────────────────────────────────────────────────────────
# DISPERSION
# ─────────────────────────────────────────────────────────────────────────────

def cmd_dispersion(
    config: RunConfig,
    out_dir: Path,
    lambda_min: float = 0.01,
    lambda_max: float = 10.0,
    samples: int = 500,
) -> int:
    if not (0.0 < lambda_min < lambda_max) or samples < 2:
        raise DispersionRangeError(
            f"need 0 < lambda_min < lambda_max and samples >= 2, got "
            f"[{lambda_min}, {lambda_max}] with {samples} samples"
        )
    p = config.params
    rows = sample_curve(p, lambda_min, lambda_max, samples)
    try:
        result = minimal_wave_speed(p)
        trailer = f"lambda_star={format_number(result.lambda_star)},c_star={format_number(result.c_star)}"
    except SubcriticalR0:
        trailer = "lambda_star=none,c_star=none"

    path = write_csv(
        out_dir / "dispersion.csv",
        ["lambda", "alpha_min", "alpha_max", "c_lambda"],
        rows,
        trailer=trailer,
    )
    _log(f"wrote {len(rows)} samples to {path} ({trailer})")
    return EXIT_OK


# ─────────────────────────────────────────────────────────────────────────────
# SIMULATE
# ─────────────────────────────────────────────────────────────────────────────

def _write_supercritical_reports(snapshots, config: RunConfig, out_dir: Path) -> None:
    p = config.params
    e1 = endemic_equilibrium(p)
    c_star = minimal_wave_speed(p).c_star
    level = 0.5 * e1.x2

    trace = track_front(snapshots, field_index=2, level=level)
    write_csv(out_dir / "front.csv", ["t", "y_front"], trace.entries)

    try:
        estimate = estimate_speed(trace)
        speed_rows = list(estimate.as_dict().items())
        speed_rows += [("c_star", c_star), ("relative_error", abs(estimate.speed - c_star) / c_star)]
        _log(f"front speed {estimate.speed!r} vs c* = {c_star!r}")
    except InsufficientPoints as e:
        speed_rows = [("speed", "insufficient"), ("reason", str(e)), ("c_star", c_star)]
        _log(f"front speed not estimated: {e}")
    write_csv(out_dir / "report_speed.csv", ["quantity", "value"], speed_rows)

    final = snapshots[-1]
    front = front_position(final, 2, level)
    if front is None:
        _log("no front at the final snapshot; profile checks skipped")
        return

    whole = reflected_profile(final, 0.0, final.grid.length)
    harnack = harnack_gradient_check(whole, c_star, p, floors={4: HARNACK_CORE_FRACTION * e1.x4})
    write_csv(
        out_dir / "report_harnack.csv",
        ["field", "bound", "max_ratio", "points", "violations"],
        [(f"x{f.index}", f.bound, f.max_ratio, f.points, f.violations) for f in harnack.fields],
    )

    extent = positive_extent(final, front)
    if extent - front < 3 * final.grid.dx:
        _log("front window too short; lyapunov and comparability checks skipped")
        return
    lyapunov = lyapunov_profile(reflected_profile(final, front, extent), c_star, p)
    write_csv(
        out_dir / "report_lyapunov.csv",
        ["s", "V"],
        list(zip(lyapunov.s, lyapunov.V)),
        trailer=(
            f"fraction_increasing={format_number(lyapunov.fraction_increasing)},"
            f"max_increase={format_number(lyapunov.max_increase)}"
        ),
    )

    core = reflected_profile(final, 0.0, extent)
    m = comparability_check(core.fields[1], core.fields[3])
    write_csv(
        out_dir / "report_comparability.csv",
        ["quantity", "value"],
        [("window_start", 0.0), ("window_end", extent), ("m", m)],
    )


def cmd_simulate(config: RunConfig, out_dir: Path) -> int:
    p = config.params
    dq = derived_quantities(p)

    _log("[1/4] building initial condition")
    sim_config = SimConfig.from_run_config(config)

    _log("[2/4] running solver")
    snapshots = run(sim_config, p)

    _log(f"[3/4] writing {len(snapshots)} snapshots to {out_dir}")
    y = sim_config.grid.y
    for state in snapshots:
        write_csv(
            out_dir / snapshot_name(state.t),
            ["y", "x1", "x2", "x3", "x4"],
            zip(y, *state.clipped()),
        )

    _log("[4/4] diagnostics")
    conservation = conservation_report(snapshots, p)
    write_csv(
        out_dir / "report_conservation.csv",
        ["t", "host_deviation", "vector_deviation"],
        [(r.t, r.host_deviation, r.vector_deviation) for r in conservation.rows],
        trailer=f"non_monotone={format_number(conservation.non_monotone)}",
    )
    bounds = lower_bound_report(snapshots, p)
    write_csv(
        out_dir / "report_lower_bounds.csv",
        ["t", "min_x1", "min_x3", "host_floor", "vector_floor"],
        [(r.t, r.min_x1, r.min_x3, bounds.host_floor, bounds.vector_floor) for r in bounds.rows],
    )

    supercritical = dq.supercritical
    if supercritical:
        try:
            endemic_equilibrium(p)
        except NoEndemicEquilibrium:
            supercritical = False
    if supercritical:
        _write_supercritical_reports(snapshots, config, out_dir)
    else:
        extinction = extinction_report(snapshots)
        write_csv(
            out_dir / "report_extinction.csv",
            ["t", "max_x2", "max_x4", "ratio_x2", "ratio_x4"],
            [(r.t, r.max_x2, r.max_x4, r.ratio2, r.ratio4) for r in extinction.rows],
            trailer=(
                f"decay_rate_x2={format_number(extinction.decay_rate_x2)},"
                f"decay_rate_x4={format_number(extinction.decay_rate_x4)},"
                f"monotone_after_transient={format_number(extinction.monotone_after_transient)},"
                f"extinct={format_number(extinction.extinct)}"
            ),
        )
        _log(f"subcritical run: extinct={extinction.extinct}")

    manifest = list(config.flat_items())
    manifest += [(key, value) for key, value in dq.as_dict().items()]
    manifest += [("dt_bound", auto_dt(sim_config.grid, p)), ("snapshots", len(snapshots))]
    write_csv(out_dir / "manifest.csv", ["key", "value"], manifest)
    _log(f"done: outputs in {out_dir}")
    return EXIT_OK


# ─────────────────────────────────────────────────────────────────────────────
# CERTIFY
# ─────────────────────────────────────────────────────────────────────────────

def cmd_certify(config: RunConfig, out_dir: Path, c: float) -> int:
    p = config.params
    result = minimal_wave_speed(p)
    if not c > result.c_star:
        raise SpeedNotSupercritical(f"c = {c!r} is not above c* = {result.c_star!r}")

    cert = default_certificate(c, p, result)
    constraints = check_constraints(cert, c, p, result)
    report = verify_supersub(cert, c, p, default_grid(cert))

    rows: list[tuple[object, ...]] = [("speed", "c", c, result.c_star, True)]
    rows += [("certificate", key, value, "", "") for key, value in cert.as_dict().items()]
    rows += [("constraint", ch.name, ch.value, ch.bound, ch.passed) for ch in constraints.checks]
    rows += [("residual", ch.name, ch.worst, ch.worst_y, ch.passed) for ch in report.checks]
    rows.append(("residual", "ordering", "", "", report.ordering_ok))
    write_csv(out_dir / "report_certificate.csv", ["section", "name", "value", "bound", "passed"], rows)

    ok = constraints.passed and report.success
    _log(f"certificate at c={c!r}: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CERTIFICATE_FAILED


# ─────────────────────────────────────────────────────────────────────────────
# ENTRY POINT
# ─────────────────────────────────────────────────────────────────────────────

def _finite_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epiwave", description="Vector-host epidemic wave toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(name: str, help_text: str) -> argparse.ArgumentParser:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="Path to a key = value run config")
        cmd.add_argument("--out", default=None, help="Output directory (overrides EPIWAVE_OUT and out.dir)")
        return cmd

    common("analyze", "Reproduction number, equilibria and minimal wave speed")
    dispersion = common("dispersion", "Sample the dispersion curve")
    dispersion.add_argument("--lambda-min", type=_finite_float, default=0.01)
    dispersion.add_argument("--lambda-max", type=_finite_float, default=10.0)
    dispersion.add_argument("--samples", type=int, default=500)
    common("simulate", "Run the reaction-diffusion system and its diagnostics")
    certify = common("certify", "Build and verify upper/lower wave profiles at speed c")
    certify.add_argument("--c", type=_finite_float, required=True, help="Wave speed, must exceed c*")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        config = load_run_config(args.config)
    except ConfigParseError as e:
        print(f"Error: {e}")
        return EXIT_CONFIG
    except InvalidParams as e:
        print(f"Error: {e}")
        return EXIT_INVALID_PARAMS
    out_dir = Path(args.out) if args.out else Path(config.out.dir)

    try:
        if args.command == "analyze":
            return cmd_analyze(config, out_dir)
        if args.command == "dispersion":
            return cmd_dispersion(config, out_dir, args.lambda_min, args.lambda_max, args.samples)
        if args.command == "simulate":
            return cmd_simulate(config, out_dir)
        return cmd_certify(config, out_dir, args.c)
    except (InvalidParams, NonpositiveLambda) as e:
        print(f"Error: {e}")
        return EXIT_INVALID_PARAMS
    except DispersionRangeError as e:
        print(f"Error: {e}")
        return EXIT_BAD_RANGE
    except InstabilityDetected as e:
        print(f"Error: {e}")
        return EXIT_INSTABILITY
    except (SpeedNotSupercritical, SubcriticalR0) as e:
        print(f"Error: {e}")
        return EXIT_NOT_SUPERCRITICAL


class DispersionRangeError(ValueError):
    """Raised when a requested dispersion sampling range is empty or inverted."""
    pass


if __name__ == "__main__":
    sys.exit(main())
