"""Command-line entry point ``probe``."""

import argparse
import json
import sys

import numpy as np

from .errors import ConfigError, ProbeError
from .experiments import PRESETS, SweepConfig, figure_preset, point_report, run_sweep


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _report_sweep(result):
    print(f"wrote {result.csv_path} ({len(result.rows)} rows, {result.failed} failed)")
    for path in result.plots:
        print(f"wrote {path}")
    if result.invariant_violations:
        print(f"invariant violations in rows {result.invariant_violations}", file=sys.stderr)
    return result.exit_code


def _cmd_sweep(args):
    cfg = SweepConfig.from_file(args.config)
    if args.plot:
        cfg.plot = True
    return _report_sweep(run_sweep(cfg, args.out, args.jobs))


def _cmd_figure(args):
    cfg = figure_preset(args.name)
    cfg.plot = not args.no_plot
    return _report_sweep(run_sweep(cfg, args.out, args.jobs))


def _cmd_point(args):
    out = point_report(args.omega_a, args.omega_b, args.lam, args.d, args.gauge, not args.no_photon_counting)
    print(json.dumps(out, indent=2, default=_json_default))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="probe", description="Diamagnetic-term estimation and discrimination")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a sweep described by a JSON config")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", default=".")
    sweep.add_argument("--jobs", type=int, default=None)
    sweep.add_argument("--plot", action="store_true", help="also render the scenario figure")
    sweep.set_defaults(func=_cmd_sweep)

    fig = sub.add_parser("figure", help="run a figure preset and render it")
    fig.add_argument("name", choices=PRESETS)
    fig.add_argument("--out", default=".")
    fig.add_argument("--jobs", type=int, default=None)
    fig.add_argument("--no-plot", action="store_true")
    fig.set_defaults(func=_cmd_figure)

    point = sub.add_parser("point", help="print the estimation report at one parameter point")
    point.add_argument("--omega-a", type=float, required=True)
    point.add_argument("--omega-b", type=float, required=True)
    point.add_argument("--lambda", dest="lam", type=float, required=True)
    point.add_argument("--d", type=float, required=True)
    point.add_argument("--gauge", choices=("coulomb", "dipole"), default="coulomb")
    point.add_argument("--no-photon-counting", action="store_true")
    point.set_defaults(func=_cmd_point)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ProbeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
