"""TEMSP command line: run, reference-example, plot and check."""

import argparse
import logging
import sys
from typing import List, Optional

from src import __version__
from src.enums import DistanceMethod, parse_enum
from src.exceptions import TemspError
from src.models.sdde_model import EXAMPLE_MODEL

logger = logging.getLogger("temsp")


def _float_list(text: str) -> List[float]:
    return [float(part) for part in text.replace(",", " ").split()]


def _name_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _distance_method(text: str) -> DistanceMethod:
    return parse_enum(DistanceMethod, text)


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per entry point."""
    parser = argparse.ArgumentParser(prog="temsp", description=__doc__)
    parser.add_argument("--version", action="version", version=f"temsp {__version__}")
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="simulate an ensemble and write the tables")
    run.add_argument("--config", help="INI config file or a previous manifest.json")
    run.add_argument("--model")
    run.add_argument("--seed", type=int, dest="master_seed")
    run.add_argument("--samples", type=int)
    run.add_argument("--dt", type=_float_list, dest="dts", help="step sizes, comma separated")
    run.add_argument("--horizon", type=float, help="final time; must be grid-aligned")
    run.add_argument("--steps", type=int, help="horizon in steps (overrides --horizon)")
    run.add_argument("--initial", type=_name_list, dest="initials")
    run.add_argument("--out-dir", dest="out_dir")
    run.add_argument("--workers", type=int)
    run.add_argument(
        "--override-admissibility", action="store_true", default=None, dest="override_admissibility"
    )
    run.add_argument("--distance-method", type=_distance_method, dest="distance_method")
    run.add_argument("--plots", action="store_true", default=None)

    reference = commands.add_parser(
        "reference-example", help="run the built-in cubic delay example with acceptance checks"
    )
    reference.add_argument("--dt", type=_float_list, default=[1e-3], dest="dts")
    reference.add_argument("--samples", type=int, default=2000)
    reference.add_argument("--horizon", type=float, default=10.0)
    reference.add_argument("--seed", type=int, default=0)
    reference.add_argument("--out-dir", default="temsp-reference")
    reference.add_argument("--workers", type=int, default=1)
    reference.add_argument(
        "--distance-method", type=_distance_method, default=DistanceMethod.EXACT
    )
    reference.add_argument("--plots", action="store_true")

    plot = commands.add_parser("plot", help="render SVG figures from means.csv and ecdf.csv")
    plot.add_argument("--means", required=True)
    plot.add_argument("--ecdf", required=True)
    plot.add_argument("--out-dir", default="plots")

    check = commands.add_parser("check", help="report K, radius, gates and certificate checks")
    check.add_argument("--model", default=EXAMPLE_MODEL)
    check.add_argument("--dt", type=_float_list, default=[1e-3], dest="dts")
    check.add_argument("--phi-coefficient", type=float, default=16.0)
    check.add_argument("--phi-exponent", type=float, default=4.0)
    check.add_argument("--nu", type=float, default=0.01)
    check.add_argument("--points", type=int, default=100_000)
    return parser


def _run(args: argparse.Namespace) -> int:
    from src.experiment.config import resolve_config
    from src.experiment.ensemble import run_ensemble

    flags = {
        name: getattr(args, name)
        for name in (
            "model",
            "master_seed",
            "samples",
            "dts",
            "horizon",
            "steps",
            "initials",
            "out_dir",
            "workers",
            "override_admissibility",
            "distance_method",
            "plots",
        )
    }
    config = resolve_config(args.config, flags)
    outputs = run_ensemble(config)
    print(f"Wrote {len(outputs.files)} tables and {outputs.manifest_path}")
    return 0


def _reference(args: argparse.Namespace) -> int:
    from src.experiment.reference_example import run_reference_example

    outcome = run_reference_example(
        dts=args.dts,
        samples=args.samples,
        horizon=args.horizon,
        out_dir=args.out_dir,
        master_seed=args.seed,
        workers=args.workers,
        distance_method=args.distance_method,
        plots=args.plots,
    )
    verdict = "passed" if outcome.acceptance["passed"] else "FAILED"
    print(f"Reference checks {verdict}; summary in {outcome.acceptance_path}")
    return 0


def _plot(args: argparse.Namespace) -> int:
    from src.renderers.plot_renderer import emit_plots

    for path in emit_plots(args.means, args.ecdf, args.out_dir):
        print(path)
    return 0


def _check(args: argparse.Namespace) -> int:
    from src.models.sdde_model import get_model
    from src.numerics.model_checks import (
        check_contraction,
        check_dissipativity,
        check_growth_function,
    )
    from src.numerics.truncation import build_rule, model_admissibility, truncation_radius

    model = get_model(args.model)
    rule = build_rule(model, args.phi_coefficient, args.phi_exponent, args.nu)
    print(f"model {model.name}: {model.description}")
    print(f"{rule.label}, nu={rule.nu:g}, K={rule.K:g}")
    for dt in args.dts:
        radius = truncation_radius(rule, dt)
        line = f"dt={dt:g}: radius {radius:.6f}"
        if model.certified:
            report = model_admissibility(model, rule, dt)
            line += (
                f", margin_a {report.margin_a:.4f}, margin_b {report.margin_b:.4f}, "
                f"{'ok' if report.ok else 'NOT admissible'} (dt_max {report.dt_max:.6g})"
            )
        print(line)
        print("  " + check_growth_function(model, rule.phi, radius, n_points=args.points).summary())
    if model.certified:
        assert model.dissipativity is not None and model.contraction is not None
        print(check_dissipativity(model, model.dissipativity, n_points=args.points).summary())
        print(check_contraction(model, model.contraction, n_points=args.points).summary())
    return 0


COMMANDS = {
    "run": _run,
    "reference-example": _reference,
    "plot": _plot,
    "check": _check,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and return the process exit code.

    Exit codes: 0 success, 2 configuration or input error, 3 step-size gate
    failure, 4 numerical failure.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except TemspError as exc:
        logger.error("%s", exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
