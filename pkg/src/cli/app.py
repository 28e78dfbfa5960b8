"""Command-line driver: check, bounds, solve and oracle over a spec file."""
import argparse
import sys
from enum import IntEnum
from pathlib import Path
from typing import Callable, Dict, List, NoReturn, Optional, Tuple, Union

import structlog

from src.bounds.propagation import BoundsMap, RejectCertificate, propagate
from src.cli.reports import (
    bounds_report, bounds_table, certificate_lines, dump_json, oracle_lines, reject_report,
    solution_document,
)
from src.config.settings import Settings, SettingsError
from src.dsl.parser import parse_file
from src.model.diagnostics import Diagnostic, has_errors
from src.model.errors import ContractError, LocoError, PropagationFuelError
from src.model.types import InstanceSpec, ProblemSpec
from src.solver.checker import check_model
from src.solver.grounding import ground
from src.solver.oracle import brute_force_solve
from src.solver.search import SolveOptions, SolveStatus, solve
from src.utils.logging import configure_logging
from src.validator.classes import effective_classes, generated_kinds
from src.validator.pipeline import check_admissibility

logger = structlog.get_logger(__name__)


class ExitStatus(IntEnum):
    OK = 0
    VALIDATION = 1
    REJECT = 2
    UNSAT = 3
    FUEL_EXHAUSTED = 4
    USAGE = 5
    INTERNAL = 6


EXIT_HELP = """exit status:
  0  success
  1  validation failure
  2  bounds rejected
  3  unsatisfiable
  4  fuel exhausted
  5  usage or I/O error
  6  internal error (solver self-audit failed)
"""


class LocoArgumentParser(argparse.ArgumentParser):
    """Reports usage errors with exit status 5; status 2 means REJECT here."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(ExitStatus.USAGE, f"{self.prog}: error: {message}\n")


def _count_strategy(value: str) -> Union[str, int]:
    if value == "sweep":
        return value
    try:
        count = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'sweep' or a count, got {value!r}") from None
    if count < 0:
        raise argparse.ArgumentTypeError(f"count must not be negative, got {count}")
    return count


def _positive(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}") from None
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {number}")
    return number


def _non_negative(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}") from None
    if number < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {number}")
    return number


class _Pipeline:
    """Runs the stages of one invocation, stopping at the first failing one."""

    def __init__(self, args: argparse.Namespace, settings: Settings) -> None:
        self.args = args
        self.settings = settings
        self.color = settings.color and sys.stdout.isatty()

    def emit(self, text: str) -> None:
        sys.stdout.write(text)

    def report(self, diagnostics: List[Diagnostic]) -> None:
        for diagnostic in diagnostics:
            print(diagnostic.render(), file=sys.stderr)

    def load(self) -> Union[ExitStatus, Tuple[ProblemSpec, InstanceSpec]]:
        path = Path(self.args.file)
        try:
            result = parse_file(path)
        except (OSError, UnicodeDecodeError) as e:
            print(f"ERROR IO {path} {e}", file=sys.stderr)
            return ExitStatus.USAGE
        self.report(result.diagnostics)
        if not result.ok:
            return ExitStatus.VALIDATION
        diagnostics = check_admissibility(result.spec, result.instance)
        self.report(diagnostics)
        if has_errors(diagnostics):
            return ExitStatus.VALIDATION
        return result.spec, result.instance

    def propagate(self, spec: ProblemSpec, inst: InstanceSpec) -> Union[BoundsMap, RejectCertificate]:
        return propagate(spec, inst, raise_required=getattr(self.args, "raise_required", False),
                         max_steps=self.settings.propagation_max_steps)

    def check(self) -> ExitStatus:
        loaded = self.load()
        if isinstance(loaded, ExitStatus):
            return loaded
        logger.info("Specification admissible", file=self.args.file)
        return ExitStatus.OK

    def bounds(self) -> ExitStatus:
        loaded = self.load()
        if isinstance(loaded, ExitStatus):
            return loaded
        spec, inst = loaded
        result = self.propagate(spec, inst)
        report = self.args.format == "report"
        if isinstance(result, RejectCertificate):
            if report:
                self.emit(dump_json(reject_report(spec, inst, result)))
            else:
                self.emit("".join(f"{line}\n" for line in certificate_lines(result, self.color)))
            return ExitStatus.REJECT
        if report:
            self.emit(dump_json(bounds_report(spec, inst, result)))
        else:
            self.emit("".join(f"{line}\n" for line in bounds_table(spec, result, self.color)))
        return ExitStatus.OK

    def solve(self) -> ExitStatus:
        loaded = self.load()
        if isinstance(loaded, ExitStatus):
            return loaded
        spec, inst = loaded
        bounds = self.propagate(spec, inst)
        if isinstance(bounds, RejectCertificate):
            print("\n".join(certificate_lines(bounds)), file=sys.stderr)
            return ExitStatus.REJECT
        args = self.args
        opts = SolveOptions(
            max_solutions=args.max,
            fuel=args.fuel if args.fuel is not None else self.settings.default_fuel,
            deterministic_seed=args.seed if args.seed is not None else self.settings.default_seed,
            count_strategy=args.count,
        )
        result = solve(ground(spec, inst, bounds), opts)
        if result.status is SolveStatus.UNSAT:
            print("UNSAT no configuration satisfies the specification", file=sys.stderr)
            return ExitStatus.UNSAT
        if result.status is SolveStatus.FUEL_EXHAUSTED:
            print(f"FUEL search budget of {opts.fuel} nodes exhausted", file=sys.stderr)
            return ExitStatus.FUEL_EXHAUSTED
        for index, config in enumerate(result.configurations):
            verdict = check_model(spec, inst, config)
            if not verdict.accepted:
                logger.error("Self-audit failed", configuration=index, violations=verdict.violations)
                print(f"INTERNAL configuration {index} failed the model check: "
                      f"{verdict.violations[0]}", file=sys.stderr)
                return ExitStatus.INTERNAL
        text = dump_json(solution_document(spec, inst, bounds, result.configurations))
        if args.out:
            try:
                Path(args.out).write_text(text, encoding="utf-8")
            except OSError as e:
                print(f"ERROR IO {args.out} {e}", file=sys.stderr)
                return ExitStatus.USAGE
        else:
            self.emit(text)
        return ExitStatus.OK

    def oracle(self) -> ExitStatus:
        cap = self.args.cap
        if cap > self.settings.oracle_max_cap:
            print(f"ERROR cap {cap} exceeds the oracle limit {self.settings.oracle_max_cap}",
                  file=sys.stderr)
            return ExitStatus.USAGE
        loaded = self.load()
        if isinstance(loaded, ExitStatus):
            return loaded
        spec, inst = loaded
        bounds = self.propagate(spec, inst)
        if isinstance(bounds, BoundsMap):
            over = [k for k in bounds.generated() if bounds[k].ub > cap]
            if over:
                print(f"ERROR upper bounds of {', '.join(over)} exceed cap {cap}", file=sys.stderr)
                return ExitStatus.USAGE
        vectors = brute_force_solve(spec, inst, cap)
        generated = generated_kinds(spec, effective_classes(spec, inst))
        self.emit("".join(f"{line}\n" for line in oracle_lines(generated, vectors)))
        return ExitStatus.OK


def build_parser() -> argparse.ArgumentParser:
    parser = LocoArgumentParser(
        prog="loco",
        description="Check, bound and solve component configuration specifications.",
        epilog=EXIT_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True, parser_class=LocoArgumentParser)

    check = commands.add_parser("check", help="Parse and validate a specification.")
    check.add_argument("file", help="Specification file.")

    bounds = commands.add_parser("bounds", help="Compute count bounds for every kind.")
    bounds.add_argument("file", help="Specification file.")
    bounds.add_argument("--format", choices=["table", "report"], default="table")
    bounds.add_argument("--raise-required", action="store_true",
                        help="Start lower bounds at the number of required ids.")

    solve_cmd = commands.add_parser("solve", help="Construct configurations.")
    solve_cmd.add_argument("file", help="Specification file.")
    solve_cmd.add_argument("--max", type=_positive, default=1, help="Configurations to emit.")
    solve_cmd.add_argument("--fuel", type=_positive, default=None,
                           help="Search node budget (default: LOCO_DEFAULT_FUEL).")
    solve_cmd.add_argument("--seed", type=_non_negative, default=None,
                           help="Value-ordering seed (default: LOCO_DEFAULT_SEED).")
    solve_cmd.add_argument("--count", type=_count_strategy, default="sweep",
                           help="'sweep' or a fixed count for every generated kind.")
    solve_cmd.add_argument("--out", default=None, help="Write the document here instead of stdout.")
    solve_cmd.add_argument("--raise-required", action="store_true",
                           help="Start lower bounds at the number of required ids.")

    oracle = commands.add_parser("oracle", help="List feasible generated counts exhaustively.")
    oracle.add_argument("file", help="Specification file.")
    oracle.add_argument("--cap", type=_non_negative, default=12, help="Largest count per kind.")
    return parser


HANDLERS: Dict[str, Callable[[_Pipeline], ExitStatus]] = {
    "check": _Pipeline.check,
    "bounds": _Pipeline.bounds,
    "solve": _Pipeline.solve,
    "oracle": _Pipeline.oracle,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit status."""
    args = build_parser().parse_args(argv)
    # stdout carries results, so logging must be routed before Settings logs anything
    configure_logging()
    try:
        settings = Settings()
    except SettingsError as e:
        print(f"ERROR SETTINGS {e}", file=sys.stderr)
        return ExitStatus.USAGE
    configure_logging(settings.log_level, settings.log_format)
    logger.debug("Command started", command=args.command, file=args.file)
    try:
        return int(HANDLERS[args.command](_Pipeline(args, settings)))
    except PropagationFuelError as e:
        print(f"FUEL {e}", file=sys.stderr)
        return ExitStatus.FUEL_EXHAUSTED
    except ContractError as e:
        print(f"ERROR {e.code} {e}", file=sys.stderr)
        return ExitStatus.USAGE
    except LocoError as e:
        logger.error("Command failed", command=args.command, error=str(e), code=e.code, exc_info=True)
        print(f"INTERNAL {e.code} {e}", file=sys.stderr)
        return ExitStatus.INTERNAL


def run() -> NoReturn:
    """Console-script entry point."""
    sys.exit(main())
