import argparse
import logging
import os
import sys
from typing import List, Optional

# Add project root to sys.path to allow imports from src
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.core.config import WORKERS, setup_logging
from src.core.errors import (
    ComparisonError,
    DegenerateChordError,
    DegenerateReachError,
    ModelError,
    ObserverStateError,
    PlotSelectionError,
    ScenarioError,
    SimulationDiverged,
    SingularTaskError,
)
from src.experiments.runner import (
    ExperimentSpec,
    emit_plot_data,
    run_reaching_comparison,
    run_regulation_comparison,
    run_single,
    validate_selection,
)
from src.observer.dob import VARIANTS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SIMULATION = 3
EXIT_PRECONDITION = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="armhold",
        description="Task-space disturbance observer simulator for a redundant 7-DOF arm.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("scenario", help="scenario JSON file")
        p.add_argument("--output", "-o", help="output directory (default: scenario 'output' or ARMHOLD_OUTPUT_DIR)")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--format", dest="formats", action="append", choices=["csv", "json"],
                       help="trace format; repeat for both (default csv)")
        p.add_argument("--figures", action="store_true", help="also write plotly HTML figures")
        p.add_argument("--workers", type=int, default=WORKERS, help="parallel simulations for comparisons")
        p.add_argument("--log-level", help="DEBUG, INFO, WARNING, ...")

    run = sub.add_parser("run", help="simulate one scenario")
    common(run)
    run.add_argument("--variant", choices=VARIANTS, help="override the observer variant")

    reg = sub.add_parser("compare-regulation", help="mass-damper vs nonlinear observer under one schedule")
    common(reg)
    reg.add_argument("--against", help="second scenario file; its perturbation schedule must match")
    reg.add_argument("--variants", nargs=2, choices=VARIANTS, metavar=("BASELINE", "IMPROVED"),
                     default=["mass_damper", "nonlinear"], help="observer variants to compare")

    reach = sub.add_parser("compare-reaching", help="perturbed vs unperturbed reaching movement")
    common(reach)
    reach.add_argument("--variant", choices=VARIANTS, help="override the observer variant")

    plot = sub.add_parser("plot-data", help="simulate and write selected series for plotting")
    common(plot)
    plot.add_argument("--variant", choices=VARIANTS, help="override the observer variant")
    plot.add_argument("--select", "-s", action="append", default=[],
                      help="series key: joint:<i>, tau:<i>, ee:x|y|z|path3d, fhat:x|y|z (repeatable)")
    return parser


def _spec(args: argparse.Namespace, kind: str) -> ExperimentSpec:
    return ExperimentSpec(
        kind=kind,
        scenario_path=args.scenario,
        output_dir=args.output,
        formats=tuple(args.formats or ["csv"]),
        variant=getattr(args, "variant", None),
        seed=args.seed,
        against=getattr(args, "against", None),
        variants=tuple(getattr(args, "variants", ("mass_damper", "nonlinear"))),
        figures=args.figures,
        workers=args.workers,
    )


def dispatch(args: argparse.Namespace) -> None:
    if args.verb == "run":
        result = run_single(_spec(args, "single_run"))
        print(f"Wrote {len(result.files)} file(s).")
    elif args.verb == "compare-regulation":
        run_regulation_comparison(_spec(args, "regulation_comparison"))
    elif args.verb == "compare-reaching":
        run_reaching_comparison(_spec(args, "reaching_comparison"))
    elif args.verb == "plot-data":
        spec = _spec(args, "single_run")
        if not args.select:
            print("No series selected; nothing to write.")
            return
        # keys are checked before the simulation runs
        validate_selection(args.select)
        result = run_single(spec)
        plot_dir = os.path.join(result.out_dir, "plot_data")
        files = emit_plot_data(result.trace, args.select, plot_dir)
        print(f"Wrote {len(files)} series file(s) to {plot_dir}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE

    setup_logging(args.log_level)
    try:
        dispatch(args)
    except FileNotFoundError as e:
        print(f"Error: file not found: {e.filename or e}")
        return EXIT_PARSE
    except (ScenarioError, ModelError, PlotSelectionError) as e:
        print(f"Error: {e}")
        return EXIT_PARSE
    except (SimulationDiverged, ObserverStateError) as e:
        logger.error("[CLI] simulation aborted: %s", e)
        print(f"Simulation aborted: {e}")
        return EXIT_SIMULATION
    except (ComparisonError, DegenerateChordError, DegenerateReachError, SingularTaskError) as e:
        print(f"Comparison precondition failed: {e}")
        return EXIT_PRECONDITION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
