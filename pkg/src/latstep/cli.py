"""Command-line front end.

Verbs:
  run    one scenario -> trace CSV + summary
  sweep  impact-magnitude sweep -> sweep CSV + table
  plot   SVG figures from a previously written CSV

Exit codes: 0 success (a fall is still a valid simulated outcome),
1 configuration error, 2 simulation abort (safety stop, non-finite state).
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys

from . import __version__
from ._kernels import BACKEND
from .errors import ConfigError, LatstepError
from .plant import Disturbance
from .scenario import (DEFAULT_SWEEP_MAGNITUDES, ScenarioConfig, SweepSpec,
                       default_config, load_config, run_scenario, run_sweep,
                       save_config, write_sweep_csv, write_trace_csv)

_SUMMARY_FIELDS = (
    ("backend", "backend"),
    ("fallen", "fallen"),
    ("fall_time_s", "fall time [s]"),
    ("triggered", "reflex triggered"),
    ("trigger_time_s", "trigger time [s]"),
    ("direction", "step direction"),
    ("steps", "recovery steps"),
    ("termination_time_s", "termination time [s]"),
    ("terminated_by", "terminated by"),
    ("cycles_to_recover", "cycles to recover"),
    ("max_roll_deg", "max roll proxy [deg]"),
    ("baseline_peak_filtered_mmps2", "baseline peak accel [mm/s^2]"),
    ("peak_filtered_mmps2", "peak accel [mm/s^2]"),
    ("separation_ok", "foot separation ok"),
    ("phase_ok", "phase consistency ok"),
)


def _fmt_cell(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        if math.isnan(v):
            return "-"
        return f"{v:.4g}"
    return str(v)


def _print_summary(summary: dict, out=None) -> None:
    # resolve the stream late so harnesses that patch sys.stdout see the output
    out = out if out is not None else sys.stdout
    width = max(len(label) for _, label in _SUMMARY_FIELDS)
    for key, label in _SUMMARY_FIELDS:
        if key in summary:
            print(f"  {label:<{width}}  {_fmt_cell(summary[key])}", file=out)


def _print_sweep_table(rows, out=None) -> None:
    out = out if out is not None else sys.stdout
    cols = ("magnitude_n", "reflex_enabled", "recovered", "triggered",
            "steps", "cycles_to_recover", "max_roll_deg", "error")
    head = ("force[N]", "reflex", "recovered", "triggered",
            "steps", "cycles", "roll[deg]", "error")
    widths = [max(len(h), 9) for h in head]
    print("  ".join(h.ljust(w) for h, w in zip(head, widths)), file=out)
    for row in rows:
        cells = [_fmt_cell(row[c]) for c in cols]
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)), file=out)


def _base_config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else default_config()
    updates = {}
    if getattr(args, "duration", None) is not None:
        updates["duration"] = args.duration
    if getattr(args, "dt", None) is not None:
        updates["dt"] = args.dt
    if getattr(args, "out_dir", None) is not None:
        updates["out_dir"] = args.out_dir
    if getattr(args, "no_reflex", False):
        updates["reflex_enabled"] = False
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _cmd_run(args) -> int:
    cfg = _base_config(args)
    if args.force is not None:
        cfg = dataclasses.replace(cfg, disturbances=(
            Disturbance(force=args.force, t_start=args.impact_time,
                        duration=args.impact_duration).validate(),))
    result = run_scenario(cfg, record_trace=not args.no_trace)
    os.makedirs(cfg.out_dir, exist_ok=True)
    written = []
    if not args.no_trace:
        trace_path = os.path.join(cfg.out_dir, "trace.csv")
        write_trace_csv(trace_path, result)
        written.append(trace_path)
        if args.plots:
            from .plots import plot_trace
            written += plot_trace(trace_path, cfg.out_dir,
                                  threshold=cfg.reflex.threshold)
    cfg_path = os.path.join(cfg.out_dir, "scenario.yaml")
    save_config(cfg, cfg_path)
    written.append(cfg_path)
    print(f"scenario: {cfg.duration:g} s at dt={cfg.dt:g} s, "
          f"{len(cfg.disturbances)} disturbance(s)")
    _print_summary(result.summary)
    for path in written:
        print(f"wrote {path}")
    return 0


def _parse_magnitudes(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad --magnitudes value: {exc}") from exc
    if not values:
        raise ConfigError("--magnitudes must list at least one force")
    return values


def _cmd_sweep(args) -> int:
    cfg = _base_config(args)
    magnitudes = (_parse_magnitudes(args.magnitudes)
                  if args.magnitudes is not None else DEFAULT_SWEEP_MAGNITUDES)
    spec = SweepSpec(magnitudes=magnitudes, t_start=args.impact_time,
                     duration=args.impact_duration,
                     with_and_without=not args.single_arm).validate()
    sweep = run_sweep(spec, cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "sweep.csv")
    write_sweep_csv(path, sweep)
    _print_sweep_table(sweep.rows)
    print(f"wrote {path}")
    if args.plots:
        from .plots import plot_sweep
        for p in plot_sweep(path, cfg.out_dir):
            print(f"wrote {p}")
    return 0


def _cmd_plot(args) -> int:
    from .plots import plot_csv
    for path in plot_csv(args.csv, args.out_dir):
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latstep",
        description="Deterministic lateral-stepping reflex simulator for a "
                    "trotting quadruped.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__} (backend: {BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("config", nargs="?", default=None,
                       help="YAML scenario config (defaults when omitted)")
        p.add_argument("--duration", type=float, default=None,
                       help="override simulated duration [s]")
        p.add_argument("--dt", type=float, default=None,
                       help="override integrator step [s]")
        p.add_argument("--out-dir", default=None, help="output directory")
        p.add_argument("--impact-time", type=float, default=2.5,
                       help="impact onset [s] (default 2.5)")
        p.add_argument("--impact-duration", type=float, default=0.2,
                       help="impact duration [s] (default 0.2)")
        p.add_argument("--plots", action="store_true",
                       help="also render SVG figures")

    p_run = sub.add_parser("run", help="run one scenario and write its trace")
    add_common(p_run)
    p_run.add_argument("--force", type=float, default=None,
                       help="replace disturbances with one lateral impact [N]")
    p_run.add_argument("--no-reflex", action="store_true",
                       help="disable the stepping reflex")
    p_run.add_argument("--no-trace", action="store_true",
                       help="skip trace recording and CSV output")
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep impact magnitudes")
    add_common(p_sweep)
    p_sweep.add_argument("--magnitudes", default=None,
                         help="comma-separated forces [N] "
                              "(default 50..340, 11 points)")
    p_sweep.add_argument("--single-arm", action="store_true",
                         help="run only the configured reflex arm instead of "
                              "both with and without")
    p_sweep.add_argument("--no-reflex", action="store_true",
                         help="with --single-arm: sweep with reflex disabled")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_plot = sub.add_parser("plot", help="render SVG figures from a CSV")
    p_plot.add_argument("csv", help="trace or sweep CSV path")
    p_plot.add_argument("--out-dir", default="out", help="output directory")
    p_plot.set_defaults(fn=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except LatstepError as exc:
        print(f"simulation abort: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
