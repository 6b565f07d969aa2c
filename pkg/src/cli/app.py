"""
MDZ App - Command-line application

Assembles the services behind the `mdz` sub-commands: field, cone, eval,
verify and decompose. Results go to stdout, diagnostics to stderr.
"""

import argparse
import logging
import sys
import time
from typing import List, Optional, TextIO

from cli.components.output_format import (
    render,
    render_csv,
    result_csv,
    result_document,
    validate_result,
)
from cli.components.verify_suites import SUITES, run_suites
from services.config_service import ConfigService
from services.cone_service import (
    fundamental_domain,
    is_simple,
    is_unimodular,
    sectors,
    sign_epsilon,
    verify_partition,
)
from services.errors import MdzError, PreconditionError
from services.field_service import class_number_one, fundamental_unit, units
from services.mdzv_service import MdzvSpec, mdzv_eval
from services.validation_service import ValidationService

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_REFUSED = 2
EXIT_NOT_CONVERGED = 3

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

PRECEDENCE_NOTE = (
    "Run defaults: command-line flags override the config file (--config,\n"
    "default ~/.config/mdz/mdz.ini); the config file overrides MDZ_THREADS,\n"
    "which only sets the default thread count."
)


class UsageError(Exception):
    """Bad command-line usage (exit 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class MdzApp:
    """
    The `mdz` command-line application.
    """

    PROG = "mdz"

    def __init__(self, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None):
        self.stdout = stdout
        self.stderr = stderr

    def _out(self, text: str):
        print(text, file=self.stdout or sys.stdout)

    def _err(self, text: str):
        print(text, file=self.stderr or sys.stderr)

    def build_parser(self) -> argparse.ArgumentParser:
        common = _Parser(add_help=False)
        common.add_argument("--format", choices=ValidationService.FORMATS, default=None,
                            help="output format (default from config, else json)")
        common.add_argument("--config", default=None, help="INI file with run defaults")
        common.add_argument("--threads", type=int, default=None, help="worker threads")
        common.add_argument("--log-level", default="WARNING",
                            choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                            help="stderr log level")

        parser = _Parser(prog=self.PROG,
                         description="Multiple Dedekind zeta values over Q and quadratic fields.",
                         epilog=PRECEDENCE_NOTE,
                         formatter_class=argparse.RawDescriptionHelpFormatter)
        sub = parser.add_subparsers(dest="command", parser_class=_Parser)
        sub.required = True

        p = sub.add_parser("field", parents=[common], help="describe a field")
        p.add_argument("--field", required=True, help="Q or d=<squarefree int>")
        p.set_defaults(handler=self.cmd_field)

        p = sub.add_parser("cone", parents=[common], help="check a cone")
        p.add_argument("--field", required=True)
        p.add_argument("--gens", required=True, help="generators 'x,y;x,y'")
        p.set_defaults(handler=self.cmd_cone)

        p = sub.add_parser("eval", parents=[common], help="evaluate a multiple Dedekind zeta value")
        p.add_argument("--field", default=None)
        p.add_argument("--cones", default=None, help="cones joined by '|'")
        p.add_argument("--exp", default=None, help="exponent rows joined by ';'")
        p.add_argument("--bound", type=int, default=None, help="coefficient bound A")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--mode", choices=ValidationService.MODES, default=None)
        p.add_argument("--save-config", action="store_true",
                       help="store this run's settings as the new defaults")
        p.set_defaults(handler=self.cmd_eval)

        p = sub.add_parser("verify", parents=[common], help="run acceptance suites")
        p.add_argument("suite", choices=SUITES + ("all",))
        p.add_argument("--quick", action="store_true", help="reduced sizes")
        p.set_defaults(handler=self.cmd_verify)

        p = sub.add_parser("decompose", parents=[common], help="fundamental domain cones")
        p.add_argument("--field", required=True)
        p.add_argument("--check", type=int, default=None, metavar="H",
                       help="also verify the partition up to height H")
        p.set_defaults(handler=self.cmd_decompose)
        return parser

    @staticmethod
    def configure_logging(level: str):
        logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, stream=sys.stderr)
        logging.getLogger().setLevel(getattr(logging, level))

    def run(self, argv: List[str]) -> int:
        """
        Parse argv, dispatch, and map failures to exit codes.

        Returns:
            0 ok, 1 usage/parse/other failure, 2 precondition refusal,
            3 result not converged
        """
        try:
            args = self.build_parser().parse_args(argv)
        except UsageError as e:
            self._err(f"{self.PROG}: error: {e}")
            return EXIT_FAILURE
        self.configure_logging(args.log_level)
        try:
            return args.handler(args)
        except PreconditionError as e:
            self._err(f"{self.PROG}: error: {e}")
            return EXIT_REFUSED
        except (MdzError, ValueError) as e:
            self._err(f"{self.PROG}: error: {e}")
            return EXIT_FAILURE

    def _format(self, args, config: Optional[ConfigService] = None) -> str:
        if args.format:
            return args.format
        return (config or ConfigService(args.config)).output_format

    # Commands

    def cmd_field(self, args) -> int:
        f = ValidationService.parse_field(args.field)
        doc = {
            "field": f.literal(),
            "degree": f.degree,
            "signature": f.signature,
            "discriminant": f.discriminant,
            "basis": f.basis_labels,
            "class_number_one": class_number_one(f),
        }
        if f.is_real:
            doc["fundamental_unit"] = str(fundamental_unit(f))
        else:
            doc["units"] = [str(u) for u in units(f)]
        self._out(render(doc, self._format(args)))
        return EXIT_OK

    def cmd_cone(self, args) -> int:
        f = ValidationService.parse_field(args.field)
        c = ValidationService.parse_cone(f, args.gens)
        simple = is_simple(c)
        doc = {
            "field": f.literal(),
            "cone": c.literal(),
            "rank": c.rank,
            "unimodular": is_unimodular(c),
            "simple_operative": simple,
            "simple_strict": is_simple(c, "strict"),
            "epsilon": sign_epsilon(c) if simple else None,
            "sectors": [list(s) for s in sectors(c)] if simple else None,
        }
        self._out(render(doc, self._format(args)))
        return EXIT_OK

    def cmd_eval(self, args) -> int:
        config = ConfigService(args.config)
        run = config.run_config(field=args.field, cones=args.cones, exp=args.exp,
                                bound=args.bound, tol=args.tol, threads=args.threads,
                                format=args.format, mode=args.mode)
        for ok, message in (ValidationService.validate_field(run.field),
                            ValidationService.validate_bound(run.bound),
                            ValidationService.validate_tol(run.tol),
                            ValidationService.validate_threads(run.threads),
                            ValidationService.validate_mode(run.mode)):
            if not ok:
                raise ValueError(message)
        f = ValidationService.parse_field(run.field)
        cones = ValidationService.parse_cones(f, run.cones)
        exponents = ValidationService.parse_exponents(run.exp)
        spec = MdzvSpec(f, tuple(cones), exponents, run.params())

        started = time.perf_counter()
        result = mdzv_eval(spec)
        seconds = time.perf_counter() - started
        document = result_document(spec.describe(), result)
        validate_result(document)
        if args.save_config:
            config.save(run)

        if run.format == "csv":
            self._out(result_csv(document, seconds))
        else:
            self._out(render(document, run.format))
        if not result.converged:
            logger.warning("tail bound %.3g exceeds tol %.3g", result.tail_bound, run.tol)
            return EXIT_NOT_CONVERGED
        return EXIT_OK

    def cmd_verify(self, args) -> int:
        rows = run_suites(args.suite, quick=args.quick)
        fmt = self._format(args)
        table = [row.to_dict() for row in rows]
        if fmt == "csv":
            self._out(render_csv(table, list(table[0].keys()) if table else []))
        else:
            self._out(render({"suite": args.suite, "checks": table,
                              "passed": all(r.passed for r in rows)}, fmt))
        failed = [r for r in rows if not r.passed]
        for r in failed:
            self._err(f"FAIL {r.suite}/{r.name}: deviation {r.deviation:.3g} > {r.tolerance:.3g}")
        return EXIT_FAILURE if failed else EXIT_OK

    def cmd_decompose(self, args) -> int:
        f = ValidationService.parse_field(args.field)
        dec = fundamental_domain(f)
        doc = {"field": f.literal(), "cones": dec.to_list()}
        passed = True
        if args.check is not None:
            report = verify_partition(dec, args.check)
            doc["partition"] = report.to_dict()
            passed = report.passed
        self._out(render(doc, self._format(args)))
        return EXIT_OK if passed else EXIT_FAILURE
