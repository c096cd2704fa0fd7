"""Command-line interface.

Subcommands: calibrate, simulate, analyze, power, samplesize, tte, plot.
Grid commands (power/samplesize/tte) read a JSON config (see config.py
for the schema); everything is deterministic given the config and seeds,
including across --workers counts.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import harness, serialize
from .calibration import (
    CALIBRATION_SEED,
    DEFAULT_TEMPLATE,
    CalibrationError,
    CalibrationTarget,
    calibrate_transition_model,
    control_response_rates,
)
from .config import (
    DEFAULT_POWER_SIZES,
    DEFAULT_TTE_SIZES,
    ConfigError,
    default_replicates_for_tte,
    parse_config,
)
from .kaplan_meier import DegenerateTestError, Endpoint, derive_endpoint, km_estimate, logrank_test
from .svgplot import CurveSpec, PlotSpec, emit_svg_stepplot
from .trajectories import Arm, TrialConfig, simulate_trial
from .weighted import cwta_curve, extract_weighted_events, weighted_logrank_test


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cwtasim",
        description="Simulate ordinal health-state trials and compare KM PFS/OS with weighted trajectory analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="fit a transition model to control-arm response targets")
    p.add_argument("--cr", type=float, required=True, help="target control CR rate, e.g. 0.05")
    p.add_argument("--pr", type=float, required=True, help="target control PR rate, e.g. 0.30")
    p.add_argument("--tolerance", type=float, default=0.005)
    p.add_argument("--template", default=None, help="profile name/path supplying worsening probabilities")
    p.add_argument("--subjects", type=int, default=100_000)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int, default=CALIBRATION_SEED)
    p.add_argument("--out", required=True, help="output profile JSON path")

    p = sub.add_parser("simulate", help="simulate one trial and write its trajectories CSV")
    p.add_argument("--profile", default="moderate")
    p.add_argument("--sample-size", type=int, required=True)
    p.add_argument("--hr", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--improvement-hr", type=float, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("analyze", help="run KM-PFS, KM-OS and CWTA on a trajectories CSV")
    p.add_argument("--trial", required=True, help="trajectories CSV (simulated or external)")
    p.add_argument("--out-dir", required=True)

    for name, help_text in (
        ("power", "rejection rate per method over an HR x sample-size grid"),
        ("samplesize", "power grid plus interpolated 80%-power sample sizes"),
        ("tte", "time to first significant month per method"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="experiment config JSON path")
        p.add_argument("--workers", type=int, default=1)
        if name == "samplesize":
            p.add_argument("--target", type=float, default=0.8)

    p = sub.add_parser("plot", help="render curve CSVs to an SVG step plot")
    p.add_argument("curves", nargs="+", help="curve CSV files (KM or trajectory layout)")
    p.add_argument("--out", required=True)
    p.add_argument("--title", default="")
    p.add_argument("--x-label", default="months")
    p.add_argument("--y-label", default="value")

    return parser


def _cmd_calibrate(args) -> int:
    template = DEFAULT_TEMPLATE if args.template is None else serialize.load_profile(args.template)
    target = CalibrationTarget(cr_rate=args.cr, pr_rate=args.pr, tolerance=args.tolerance)
    model = calibrate_transition_model(
        target, template=template, budget=args.budget, n_subjects=args.subjects, seed=args.seed
    )
    serialize.save_profile(model, args.out)
    cr, pr = control_response_rates(model, n_subjects=args.subjects, seed=args.seed + 1)
    print(f"wrote {args.out}")
    print(f"fresh-seed check: CR {cr:.4f} (target {args.cr}), PR {pr:.4f} (target {args.pr})")
    return 0


def _cmd_simulate(args) -> int:
    model = serialize.load_profile(args.profile)
    config = TrialConfig(
        sample_size=args.sample_size,
        hazard_ratio=args.hr,
        control_model=model,
        seed=args.seed,
        improvement_hr=args.improvement_hr,
    )
    trial = simulate_trial(config)
    serialize.write_trajectories_csv(trial, args.out)
    print(f"wrote {args.out} ({args.sample_size} subjects, hr {args.hr}, seed {args.seed})")
    return 0


def _cmd_analyze(args) -> int:
    subjects = serialize.read_trajectories_csv(args.trial)
    arms_present = {s.arm for s in subjects}
    if arms_present != {Arm.CONTROL, Arm.EXPERIMENTAL}:
        raise ValueError("analyze needs subjects in both arms")
    os.makedirs(args.out_dir, exist_ok=True)

    results: dict = {}
    for kind in (Endpoint.PFS, Endpoint.OS):
        records = [derive_endpoint(s, kind) for s in subjects]
        curves = {
            arm: km_estimate([r for r in records if r.arm == arm])
            for arm in (Arm.CONTROL, Arm.EXPERIMENTAL)
        }
        serialize.write_km_curves_by_arm_csv(
            curves, os.path.join(args.out_dir, f"curve_{kind.value.lower()}.csv")
        )
        try:
            results[kind.value] = logrank_test(records)
        except DegenerateTestError:
            results[kind.value] = None

    table = extract_weighted_events(subjects)
    curves = {arm: cwta_curve(table, arm) for arm in (Arm.CONTROL, Arm.EXPERIMENTAL)}
    serialize.write_trajectory_curves_by_arm_csv(curves, os.path.join(args.out_dir, "curve_cwta.csv"))
    try:
        results["CWTA"] = weighted_logrank_test(table)
    except DegenerateTestError:
        results["CWTA"] = None

    serialize.write_tests_csv(results, os.path.join(args.out_dir, "tests.csv"))
    for method in ("CWTA", "PFS", "OS"):
        r = results[method]
        if r is None:
            print(f"{method}: degenerate (no usable events)")
        else:
            print(f"{method}: z = {r.z:.4f}, p = {r.p_value:.6g}")
    return 0


def _grid_from_config(path: str, command: str) -> tuple[harness.ExperimentGrid, str]:
    with open(path) as fh:
        cfg = parse_config(fh.read())
    sizes = cfg.sample_sizes
    if sizes is None:
        sizes = DEFAULT_TTE_SIZES if command == "tte" else DEFAULT_POWER_SIZES
    replicates = cfg.replicates
    if replicates is None:
        replicates = default_replicates_for_tte(cfg.hazard_ratios) if command == "tte" else 1000
    grid = harness.ExperimentGrid(
        hazard_ratios=cfg.hazard_ratios,
        sample_sizes=sizes,
        replicates=replicates,
        alpha=cfg.alpha,
        profile=cfg.profile,
        master_seed=cfg.master_seed,
    )
    return grid, cfg.output_dir


def _cmd_power(args) -> int:
    grid, out_dir = _grid_from_config(args.config, "power")
    os.makedirs(out_dir, exist_ok=True)
    rows = harness.power_rows(grid, workers=args.workers)
    out = os.path.join(out_dir, "power.csv")
    serialize.write_power_csv(rows, out)
    print(f"wrote {out}")
    return 0


def _cmd_samplesize(args) -> int:
    grid, out_dir = _grid_from_config(args.config, "samplesize")
    os.makedirs(out_dir, exist_ok=True)
    power = harness.power_rows(grid, workers=args.workers)
    serialize.write_power_csv(power, os.path.join(out_dir, "power.csv"))
    rows = harness.sample_size_rows(power, target=args.target)
    out = os.path.join(out_dir, "sample_size.csv")
    serialize.write_sample_size_csv(rows, out)
    print(f"wrote {out}")
    return 0


def _cmd_tte(args) -> int:
    grid, out_dir = _grid_from_config(args.config, "tte")
    os.makedirs(out_dir, exist_ok=True)
    rows = harness.tte_rows(grid, workers=args.workers)
    out = os.path.join(out_dir, "tte.csv")
    serialize.write_tte_csv(rows, out)
    print(f"wrote {out}")
    return 0


def _cmd_plot(args) -> int:
    curves: list[CurveSpec] = []
    for path in args.curves:
        stem = os.path.splitext(os.path.basename(path))[0]
        for label, points in serialize.read_curves_csv(path):
            name = f"{stem} {label}".strip()
            curves.append(CurveSpec(label=name, points=tuple(points)))
    spec = PlotSpec(
        curves=tuple(curves), title=args.title, x_label=args.x_label, y_label=args.y_label
    )
    svg = emit_svg_stepplot(spec)
    with open(args.out, "w") as fh:
        fh.write(svg)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "calibrate": _cmd_calibrate,
    "simulate": _cmd_simulate,
    "analyze": _cmd_analyze,
    "power": _cmd_power,
    "samplesize": _cmd_samplesize,
    "tte": _cmd_tte,
    "plot": _cmd_plot,
}


def run_cli(argv: list[str]) -> int:
    """Run one CLI invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, CalibrationError, DegenerateTestError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
