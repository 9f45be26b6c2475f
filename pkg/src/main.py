# src/main.py
import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence

from src.config.settings import get_settings
from src.models.graph import BipartiteGraph
from src.models.setcover import SetCoverInstance, parse_setcover
from src.models.system import StructuredSystem, parse_system
from src.models.verdict import CheckMethod
from src.services.bounds import bounds_dedicated, bounds_direct_measure, min_struct_obs
from src.services.dm import dm_decompose
from src.services.dot_export import create_dot_exporter
from src.services.instances import gen_random, reduce_setcover
from src.services.placement import exact_min, two_stage
from src.services.polycase import polycase
from src.services.verify import check_gsio
from src.utils.errors import (
    CapExceededError,
    GsioError,
    InfeasibleError,
    PreconditionError,
    RouteDisagreementError,
    SystemFormatError,
)
from src.utils.logger import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_DISAGREEMENT = 4


@dataclass(frozen=True)
class CommandOutcome:
    """Exit status, the report for stdout and a one-line summary for stderr"""

    exit_code: int
    report: Any = None
    summary: str = ""
    verbose: bool = False

    def render(self) -> str:
        if isinstance(self.report, str):
            return self.report
        return json.dumps(self.report, indent=2)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SystemFormatError(f"Cannot read {path}: {e.strerror}")


def load_system(path: str) -> StructuredSystem:
    try:
        return parse_system(_read(path))
    except SystemFormatError as e:
        raise SystemFormatError(f"{path}: {e}") from e


def load_setcover(path: str) -> SetCoverInstance:
    try:
        return parse_setcover(_read(path))
    except SystemFormatError as e:
        raise SystemFormatError(f"{path}: {e}") from e


def _map_files(paths: Sequence[str], jobs: int, task: Callable[[str], Any]) -> List[Any]:
    """Apply `task` to every file, in argument order"""
    if jobs > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(task, paths))
    return [task(path) for path in paths]


def _single_or_list(results: List[Any]) -> Any:
    return results[0] if len(results) == 1 else results


def cmd_check(args: argparse.Namespace) -> CommandOutcome:
    method = CheckMethod(args.method)
    verdicts = _map_files(args.files, args.jobs, lambda p: check_gsio(load_system(p), method))
    summary = ", ".join(
        f"{path}: {'GSIO' if v.overall else 'not GSIO'}" for path, v in zip(args.files, verdicts)
    )
    return CommandOutcome(EXIT_OK, _single_or_list([v.to_dict() for v in verdicts]), summary)


def _place_one(args: argparse.Namespace, path: str) -> Any:
    system = load_system(path)
    if args.compare:
        greedy = two_stage(system, redecompose=args.redecompose)
        optimum = exact_min(system, allow_input_measure=args.direct_measure)
        ratio = greedy.total_count / optimum.total_count if optimum.total_count else 1.0
        logger.info(f"{path}: greedy {greedy.total_count} vs exact {optimum.total_count}")
        return {"two_stage": greedy.to_dict(), "exact": optimum.to_dict(), "ratio": ratio}
    if args.exact or args.direct_measure:
        return exact_min(system, allow_input_measure=args.direct_measure).to_dict()
    return two_stage(system, redecompose=args.redecompose).to_dict()


def cmd_place(args: argparse.Namespace) -> CommandOutcome:
    reports = _map_files(args.files, args.jobs, lambda p: _place_one(args, p))
    summary = ", ".join(
        f"{path}: {r['total'] if 'total' in r else r['two_stage']['total']} sensor(s)"
        for path, r in zip(args.files, reports)
    )
    return CommandOutcome(EXIT_OK, _single_or_list(reports), summary)


def cmd_bounds(args: argparse.Namespace) -> CommandOutcome:
    system = load_system(args.file)
    result = bounds_direct_measure(system) if args.direct_measure else bounds_dedicated(system)
    return CommandOutcome(EXIT_OK, result.to_dict(), f"bounds [{result.lower}, {result.upper}]")


def cmd_polycase(args: argparse.Namespace) -> CommandOutcome:
    result = polycase(load_system(args.file), direct_measure=args.direct_measure)
    return CommandOutcome(EXIT_OK, result.to_dict(), str(result))


def cmd_minobs(args: argparse.Namespace) -> CommandOutcome:
    result = min_struct_obs(load_system(args.file).A)
    return CommandOutcome(EXIT_OK, result.to_dict(), f"H = {result.count}")


def cmd_reduce(args: argparse.Namespace) -> CommandOutcome:
    output = reduce_setcover(load_setcover(args.file))
    report = output.system.to_dict() if args.system_only else output.to_dict()
    return CommandOutcome(
        EXIT_OK, report, f"reduced to n={output.system.n}, q={output.system.q}, m={output.system.m}"
    )


def cmd_gen(args: argparse.Namespace) -> CommandOutcome:
    system = gen_random(
        args.n,
        args.q,
        args.density,
        dedicated_inputs=args.dedicated,
        self_loops=args.self_loops,
        seed=args.seed,
    )
    return CommandOutcome(EXIT_OK, system.to_dict(), f"n={system.n}, q={system.q}, nnz(A)={system.A.nnz}")


def cmd_dot(args: argparse.Namespace) -> CommandOutcome:
    system = load_system(args.file)
    exporter = create_dot_exporter()
    if args.dm:
        graph = BipartiteGraph.from_system(system, with_s_edges=True)
        dot = exporter.render_decomposition(graph, dm_decompose(graph))
    else:
        dot = exporter.render_digraph(system)
    return CommandOutcome(EXIT_OK, dot, "DOT written")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsio", description="Generic state-and-input observability analysis and sensor placement"
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging and a summary on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="decide GSIO of one or more systems")
    check.add_argument("files", nargs="+")
    check.add_argument("--method", choices=[m.value for m in CheckMethod], default=CheckMethod.BOTH.value)
    check.add_argument("--jobs", type=int, default=1)
    check.set_defaults(handler=cmd_check)

    place = commands.add_parser("place", help="dedicated sensor placement")
    place.add_argument("files", nargs="+")
    place.add_argument("--exact", action="store_true", help="enumerate instead of the two-stage greedy")
    place.add_argument("--direct-measure", action="store_true", help="let exact search measure inputs")
    place.add_argument("--compare", action="store_true", help="report two-stage and exact side by side")
    place.add_argument("--redecompose", action="store_true", help="rebuild the decomposition per greedy step")
    place.add_argument("--jobs", type=int, default=1)
    place.set_defaults(handler=cmd_place)

    bounds = commands.add_parser("bounds", help="interval holding the minimum sensor count")
    bounds.add_argument("file")
    bounds.add_argument("--direct-measure", action="store_true")
    bounds.set_defaults(handler=cmd_bounds)

    poly = commands.add_parser("polycase", help="exact placement for self-looped single-input systems")
    poly.add_argument("file")
    poly.add_argument("--direct-measure", action="store_true")
    poly.set_defaults(handler=cmd_polycase)

    minobs = commands.add_parser("minobs", help="fewest sensors for structural observability of A")
    minobs.add_argument("file")
    minobs.set_defaults(handler=cmd_minobs)

    reduce = commands.add_parser("reduce", help="encode a set cover instance as a placement problem")
    reduce.add_argument("file")
    reduce.add_argument("--system-only", action="store_true", help="emit only the system document")
    reduce.set_defaults(handler=cmd_reduce)

    gen = commands.add_parser("gen", help="random structured system")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--q", type=int, required=True)
    gen.add_argument("--density", type=float, required=True)
    gen.add_argument("--dedicated", action="store_true")
    gen.add_argument("--self-loops", action="store_true")
    gen.add_argument("--seed", type=int, required=True)
    gen.set_defaults(handler=cmd_gen)

    dot = commands.add_parser("dot", help="Graphviz export")
    dot.add_argument("file")
    dot.add_argument("--dm", action="store_true", help="draw the DM-decomposition of B'(A,B,C)")
    dot.set_defaults(handler=cmd_dot)
    return parser


def execute(argv: Optional[Sequence[str]] = None) -> CommandOutcome:
    """Parse arguments, dispatch, and map failures to exit codes"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return CommandOutcome(EXIT_OK if e.code == 0 else EXIT_INPUT)

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    if getattr(args, "jobs", 1) < 1:
        logger.error("--jobs must be at least 1")
        return CommandOutcome(EXIT_INPUT)

    try:
        return replace(args.handler(args), verbose=args.verbose)
    except SystemFormatError as e:
        logger.error(f"Input error: {e}")
        return CommandOutcome(EXIT_INPUT, summary=str(e))
    except (InfeasibleError, CapExceededError, PreconditionError) as e:
        logger.error(f"Solver refused: {e}")
        return CommandOutcome(EXIT_SOLVER, summary=str(e))
    except RouteDisagreementError as e:
        logger.error(f"Internal error: {e}")
        return CommandOutcome(EXIT_DISAGREEMENT, summary=str(e))
    except GsioError as e:
        logger.error(f"Analysis failed: {e}")
        return CommandOutcome(EXIT_FAILURE, summary=str(e))
    except Exception as e:
        logger.error(f"Unexpected failure: {str(e)}", exc_info=True)
        return CommandOutcome(EXIT_FAILURE, summary=str(e))


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; the report goes to stdout and the exit code is returned"""
    outcome = execute(argv)
    if outcome.report is not None:
        print(outcome.render())
    if outcome.summary and (outcome.verbose or outcome.exit_code != EXIT_OK):
        print(outcome.summary, file=sys.stderr)
    return outcome.exit_code


def main():
    """Application entry point"""
    settings = get_settings()
    setup_logging(settings.log_level, settings.log_file)
    sys.exit(run())


if __name__ == "__main__":
    main()
