"""Command-line entry point for the symplectic groupoid lab."""
import argparse
import json
import logging
import os
import sys
import time
from typing import Any, Dict, List, Optional, Sequence, TextIO

import numpy as np

from liecase.bch import MAX_ORDER, local_product
from liecase.duflo import f_k_cocycle
from numerics.errors import ConfigError, SgaLabError
from poisson.config import resolve_structure
from reporting.models import CheckReport, RunConfig
from reporting.suites import (
    SUITES,
    TAYLOR_ORDER,
    cocycle_reports,
    duflo_reports,
    expand_s_table,
    gamma_cochain,
    generating_function_for,
    groupoid_reports,
    identity_axiom_report,
    run_suite,
    sga_report,
    split_reports,
    star_reports,
)
from spray.flow import DEFAULT_FLOW_ORDER

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


# Attributes every LogRecord carries; anything else arrived through `extra`
STANDARD_RECORD_FIELDS = frozenset(vars(logging.makeLogRecord({}))) | {'message', 'asctime'}


class JsonFormatter(logging.Formatter):
    """One JSON object per record, keeping the fields passed through `extra`."""

    def format(self, record: logging.LogRecord) -> str:
        entry = {
            'time': self.formatTime(record, '%Y-%m-%dT%H:%M:%S'),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
        }
        entry.update(
            (key, value) for key, value in vars(record).items()
            if key not in STANDARD_RECORD_FIELDS
        )
        if record.exc_info:
            entry['exception'] = self.formatException(record.exc_info)
        return json.dumps(entry, default=str, sort_keys=True)


def setup_logging(log_level: str = 'WARNING', stream: Optional[TextIO] = None) -> logging.Handler:
    """
    Route every sgalab logger to one JSON-lines handler.

    Logs go to stderr unless a stream is given, so stdout stays free for
    reports. Unknown level names fall back to WARNING.

    Returns:
        The installed handler
    """
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr if stream is None else stream)
    handler.setFormatter(JsonFormatter())
    root_logger.addHandler(handler)
    root_logger.setLevel(getattr(logging, log_level.upper(), logging.WARNING))
    return handler


def parse_vector(text: str, flag: str) -> np.ndarray:
    """
    Raises:
        ConfigError: If the text is not a comma-separated list of numbers
    """
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated numbers, got '{text}'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgalab",
        description="Numerical checks for local symplectic groupoids and their half-densities.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pi", dest="pi_spec", help="Poisson structure name or file:<path>")
    common.add_argument("--lie", dest="lie_spec", help="Lie algebra name or file:<path>")
    common.add_argument("--order", type=int, help="truncation order N")
    common.add_argument("--pmax", type=float, default=0.25, help="locality radius for covectors")
    common.add_argument("--amax", type=float, default=0.5, help="locality radius in the action groupoid")
    common.add_argument("--samples", type=int, default=50)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--tol", type=float, help="override the default tolerances")
    common.add_argument("--format", dest="output_format", choices=("table", "jsonl"), default="table")
    common.add_argument("--out", help="write the report to this path instead of stdout")

    verbs = parser.add_subparsers(dest="verb", required=True)
    verbs.add_parser("check-sga", parents=[common], help="associativity equation of S")
    gamma = verbs.add_parser("gamma", parents=[common], help="canonical factor gamma_S at a point")
    gamma.add_argument("--p1", required=True)
    gamma.add_argument("--p2", required=True)
    gamma.add_argument("--x", required=True)
    verbs.add_parser("duflo", parents=[common], help="gamma_S against the Duflo cocycle")
    verbs.add_parser("cocycle", parents=[common], help="cocycle checks of gamma_S")
    verbs.add_parser("identity-axiom", parents=[common], help="identity axiom of sigma^c")
    verbs.add_parser("split-assoc", parents=[common], help="split-form associativity")
    verbs.add_parser("expand-s", parents=[common], help="graded coefficients of the series S")
    verbs.add_parser("star", parents=[common], help="plane-wave star associativity")
    suite = verbs.add_parser("suite", parents=[common], help="run a named suite")
    suite.add_argument("name", help=f"all or one of {', '.join(SUITES)}")
    report = verbs.add_parser("report", parents=[common], help="re-read a json-lines report")
    report.add_argument("path")
    return parser


def run_config(args: argparse.Namespace, threads: int) -> RunConfig:
    return RunConfig(
        pi_spec=args.pi_spec,
        lie_spec=args.lie_spec,
        order=args.order,
        p_max=args.pmax,
        a_max=args.amax,
        samples=args.samples,
        seed=args.seed,
        tol=args.tol,
        output_format=args.output_format,
        out=args.out,
        threads=threads,
    )


def validate_config(config: RunConfig) -> None:
    """
    Raises:
        ConfigError: If a numeric flag is out of range
    """
    if config.order is not None and not 1 <= config.order <= MAX_ORDER:
        raise ConfigError(f"--order must be within 1..{MAX_ORDER}, got {config.order}")
    if config.samples < 1:
        raise ConfigError(f"--samples must be at least 1, got {config.samples}")
    for flag, value in (("--pmax", config.p_max), ("--amax", config.a_max), ("--tol", config.tol)):
        if value is not None and not value > 0:
            raise ConfigError(f"{flag} must be positive, got {value}")
    if config.threads < 1:
        raise ConfigError(f"SGALAB_THREADS must be at least 1, got {config.threads}")


def threads_from_env() -> int:
    """
    Raises:
        ConfigError: If SGALAB_THREADS is not an integer
    """
    text = os.environ.get('SGALAB_THREADS', '1')
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"SGALAB_THREADS expects an integer, got '{text}'")


def format_table(reports: Sequence[CheckReport]) -> List[str]:
    """Human view: one row per report and the failing samples below it."""
    lines = [f"{'check':<26} {'structure':<12} {'samples':>7} {'max residual':>13} {'tol':>9}  result"]
    for report in reports:
        lines.append(
            f"{report.check:<26} {report.structure:<12} {len(report.records):>7} "
            f"{report.max_residual:>13.3e} {report.tolerance:>9.1e}  "
            f"{'pass' if report.passed else 'FAIL'}"
        )
        if not report.expect_failure:
            for record in report.records:
                if not record.passed:
                    reason = record.error or f"residual {record.residual:.3e}"
                    lines.append(f"    sample {record.index}: {reason} at {record.inputs}")
    passed = sum(1 for r in reports if r.passed)
    lines.append(f"{passed}/{len(reports)} checks passed")
    return lines


def emit(lines: Sequence[str], out: Optional[str]) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def emit_reports(reports: Sequence[CheckReport], config: RunConfig) -> int:
    if config.output_format == "jsonl":
        lines = [line for report in reports for line in report.jsonl_lines()]
    else:
        lines = format_table(reports)
    emit(lines, config.out)
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


def emit_records(records: Sequence[Dict[str, Any]], config: RunConfig) -> None:
    if config.output_format == "jsonl":
        emit([json.dumps(r, sort_keys=True) for r in records], config.out)
        return
    lines = []
    for record in records:
        lines.append("  ".join(f"{key}={value}" for key, value in record.items()))
    emit(lines, config.out)


def gamma_record(config: RunConfig, p1: np.ndarray, p2: np.ndarray, x: np.ndarray) -> Dict[str, Any]:
    """gamma_S at one chart point, with the F_K ratio for linear structures."""
    structure = resolve_structure(config.pi_spec, config.lie_spec)
    n = structure.poisson.dim
    for flag, vector in (("--p1", p1), ("--p2", p2), ("--x", x)):
        if vector.size != n:
            raise ConfigError(f"{flag} has {vector.size} components, '{structure.name}' needs {n}")
    S = generating_function_for(structure, config.order)
    flow_order = config.order or DEFAULT_FLOW_ORDER
    record = {
        "structure": structure.name,
        "backend": S.backend,
        "order": S.order,
        "p1": p1.tolist(), "p2": p2.tolist(), "x": x.tolist(),
        "gamma_S": gamma_cochain(S, structure, flow_order)(p1, p2, x),
    }
    if structure.lie is not None and structure.poisson.degree == 1:
        product = local_product(structure.lie, p2, p1, config.order)
        record["F_K_ratio"] = f_k_cocycle(structure.lie, p1, p2, product)
    return record


def require_structure(config: RunConfig) -> None:
    if not config.has_structure:
        raise ConfigError("this verb needs --pi or --lie")


def read_report(path: str) -> List[CheckReport]:
    """
    Rebuild reports from a json-lines file.

    Raises:
        ConfigError: If the file cannot be read or a line is not json
    """
    rows = []
    try:
        with open(path) as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as e:
                    raise ConfigError(f"invalid json-lines report: {e.msg}", lineno, e.colno)
    except OSError as e:
        raise ConfigError(f"cannot read report '{path}': {e}")
    try:
        return CheckReport.from_dicts(rows)
    except KeyError as e:
        raise ConfigError(f"report row is missing the field {e}")


def dispatch(args: argparse.Namespace, config: RunConfig) -> int:
    """Run one verb and return its exit code."""
    verb = args.verb
    if verb == "suite":
        return emit_reports(run_suite(args.name, config), config)
    if verb == "report":
        return emit_reports(read_report(args.path), config)

    require_structure(config)
    if verb == "gamma":
        record = gamma_record(
            config, parse_vector(args.p1, "--p1"), parse_vector(args.p2, "--p2"),
            parse_vector(args.x, "--x"),
        )
        emit_records([record], config)
        return EXIT_PASS
    if verb == "expand-s":
        structure = resolve_structure(config.pi_spec, config.lie_spec)
        emit_records(expand_s_table(structure, config.order or TAYLOR_ORDER), config)
        return EXIT_PASS

    structure = resolve_structure(config.pi_spec, config.lie_spec)
    if verb in ("duflo", "split-assoc", "star") and structure.lie is None:
        raise ConfigError(f"{verb} needs a Lie algebra (--lie)")
    builders = {
        "check-sga": lambda: [sga_report(structure, config), *groupoid_reports(structure, config)],
        "duflo": lambda: duflo_reports(structure, config),
        "cocycle": lambda: cocycle_reports(structure, config),
        "identity-axiom": lambda: [identity_axiom_report(structure, config)],
        "split-assoc": lambda: split_reports(structure, config),
        "star": lambda: star_reports(structure, config),
    }
    return emit_reports(builders[verb](), config)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse the command line, run the verb and return the exit code.

    Returns:
        0 when every check passes, 1 when a check fails, 2 on configuration
        or domain errors
    """
    log_level = os.environ.get('SGALAB_LOG_LEVEL', 'WARNING')

    setup_logging(log_level)
    logger = logging.getLogger(__name__)

    args = build_parser().parse_args(argv)
    start_time = time.time()

    try:
        config = run_config(args, threads_from_env())
        validate_config(config)
        logger.info(
            f"sgalab {args.verb} started (seed {config.seed}, threads {config.threads})",
            extra={'verb': args.verb}
        )
        code = dispatch(args, config)
    except SgaLabError as e:
        logger.error(
            f"sgalab {args.verb} failed: {e}",
            extra={'error_type': type(e).__name__},
            exc_info=True
        )
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR

    duration = time.time() - start_time
    logger.info(f"sgalab {args.verb} finished with exit code {code} in {duration:.2f}s")
    return code


if __name__ == "__main__":
    sys.exit(main())
