"""Command line front-end.

Subcommands: privacy-curve, dlc-curve, screening-menu, welfare-sweep,
insurance-consumer, insurance-menu, pipeline.  Exit codes: 0 success,
1 configuration/validation error, 2 numerical failure.
"""

import argparse
import sys
from pathlib import Path

from ..errors import DomainError, GridveilError, NumericalError, ScenarioError
from . import run
from .scenario import load_scenario


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def build_parser():
    parser = _Parser(
        prog="gridveil",
        description="Metering-privacy economics toolkit: breach curves, "
                    "load-control degradation, contract menus.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True,
                        help="path to the JSON scenario file")
    common.add_argument("--out-dir", default="./out",
                        help="output directory (default ./out)")
    common.add_argument("--seed", type=int, default=0,
                        help="run seed perturbing scenario seeds (default 0)")
    common.add_argument("--format", choices=("csv", "svg", "both"),
                        default="both", help="output formats (default both)")
    common.add_argument("--grid", type=int, default=2001,
                        help="oracle grid resolution (default 2001)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("privacy-curve", "breach probability vs metering interval"),
        ("dlc-curve", "load-control degradation vs metering interval"),
        ("screening-menu", "closed-form, oracle, and full-information menus"),
        ("welfare-sweep", "welfare decomposition across the type mix"),
        ("insurance-consumer", "optimal coverage across premium rates"),
        ("insurance-menu", "monopolist insurer's two-type menu"),
        ("pipeline", "every stage end to end, with a run manifest"),
    ):
        sub.add_parser(name, parents=[common], help=text)
    return parser


def _checksum_fmt(args, scn):
    return run.scenario_checksum(scn), args.format


def _need_zeta(scn, args):
    _, zeta, _ = run.stage_dlc(scn, args.seed)
    return zeta


def main(argv=None):
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out_dir)
    try:
        scn = load_scenario(args.scenario)
    except ScenarioError as exc:
        for pointer, message in exc.issues:
            print(f"scenario error at {pointer or '/'}: {message}",
                  file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return 1

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        checksum, fmt = _checksum_fmt(args, scn)
        if args.command == "privacy-curve":
            points = run.stage_privacy(scn)
            run.write_breach_outputs(out_dir, points, checksum, fmt)
        elif args.command == "dlc-curve":
            curve, zeta, source = run.stage_dlc(scn, args.seed)
            if curve is None:
                # an explicit curve request overrides the zeta shortcut
                curve = run.dlc.performance_curve(
                    scn.dlc.intervals, restarts=scn.dlc.restarts,
                    seed=run.effective_dlc_seed(scn, args.seed))
            run.write_dlc_outputs(out_dir, curve, checksum, fmt)
            print(f"zeta ({source}): {zeta}")
        elif args.command == "screening-menu":
            scr = run.stage_screening(scn, _need_zeta(scn, args), args.grid)
            run.write_screening_outputs(out_dir, scr, checksum, fmt)
        elif args.command == "welfare-sweep":
            scr = run.stage_screening(scn, _need_zeta(scn, args), args.grid)
            run.write_welfare_outputs(out_dir, scr["welfare"], checksum, fmt)
        elif args.command == "insurance-consumer":
            scr = run.stage_screening(scn, _need_zeta(scn, args), args.grid)
            ins = run.stage_insurance(scn, scr["closed_form"], args.grid)
            run.write_insurance_consumer_outputs(out_dir, ins, checksum, fmt)
        elif args.command == "insurance-menu":
            scr = run.stage_screening(scn, _need_zeta(scn, args), args.grid)
            ins = run.stage_insurance(scn, scr["closed_form"], args.grid)
            run.write_insurance_menu_outputs(out_dir, ins, checksum, fmt)
        elif args.command == "pipeline":
            run.run_pipeline(scn, args.scenario, out_dir, args.seed,
                             fmt=fmt, grid_points=args.grid)
    except ScenarioError as exc:
        for pointer, message in exc.issues:
            print(f"scenario error at {pointer or '/'}: {message}",
                  file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 1
    except GridveilError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
