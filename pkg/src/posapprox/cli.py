"""Command-line front end: ``posapprox {best-approx,witness,verify}``."""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

from .best_approx import enumerate_best_approximations
from .certified_reals import START_BITS, parse_descriptor, precision_limit
from .errors import (
    DescriptorError,
    DetConditionFailed,
    Inapplicable,
    NoApplicableNu,
    PosApproxError,
    PrecisionExhausted,
    PreconditionNotCertified,
    SearchFailed,
)
from .spectrum import SCHEMA_VERSION, theorem2_run
from .witness import NuContext, applicable_indices, theorem3_dispatch

SUBCOMMANDS = ("best-approx", "witness", "verify")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PRECISION = 3
EXIT_NO_NU = 4
EXIT_OTHER = 5


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    alpha1: str
    alpha2: str
    height_bound: int
    gamma: Fraction = Fraction(2)
    Gamma: Fraction | None = None
    precision_cap: int | None = None
    output_format: str = "json"
    output: str | None = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _build_parser() -> _Parser:
    parser = _Parser(prog="posapprox", description="Certified best approximations and witness points.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--alpha1", required=True, help="descriptor, e.g. alg:-2,0,1@[1,2]")
        p.add_argument("--alpha2", required=True)
        p.add_argument("--height", type=int, required=True, help="height bound H >= 1")
        p.add_argument("--gamma", type=_fraction, default=Fraction(2))
        p.add_argument("--Gamma", type=_fraction, default=None,
                       help="constant of the Diophantine condition; default: empirical minimum")
        p.add_argument("--precision-cap", type=int, default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", default=None, help="output path (default: stdout)")
    return parser


def parse_args(argv: list[str]) -> CliConfig:
    ns = _build_parser().parse_args(argv)
    for flag in ("alpha1", "alpha2"):
        try:
            parse_descriptor(getattr(ns, flag))
        except DescriptorError as exc:
            raise UsageError(f"--{flag}: {exc}") from None
    if ns.height < 1:
        raise UsageError("--height: must be >= 1")
    if ns.gamma < 2:
        raise UsageError("--gamma: must be >= 2")
    if ns.Gamma is not None and not 0 < ns.Gamma < 1:
        raise UsageError("--Gamma: must lie in (0, 1)")
    if ns.precision_cap is not None and ns.precision_cap < START_BITS:
        raise UsageError(f"--precision-cap: must be >= {START_BITS}")
    return CliConfig(ns.subcommand, ns.alpha1, ns.alpha2, ns.height, ns.gamma, ns.Gamma,
                     ns.precision_cap, ns.format, ns.output)


def render(config: CliConfig) -> list[str]:
    """Inverse of :func:`parse_args`."""
    argv = [config.subcommand, "--alpha1", config.alpha1, "--alpha2", config.alpha2,
            "--height", str(config.height_bound), "--gamma", str(config.gamma)]
    if config.Gamma is not None:
        argv += ["--Gamma", str(config.Gamma)]
    if config.precision_cap is not None:
        argv += ["--precision-cap", str(config.precision_cap)]
    argv += ["--format", config.output_format]
    if config.output is not None:
        argv += ["--output", config.output]
    return argv


def _rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _best_approx_text(config: CliConfig, a1, a2) -> str:
    seq = enumerate_best_approximations(a1, a2, config.height_bound)
    if config.output_format == "json":
        return seq.to_jsonl()
    rows = []
    for bm in seq:
        d = bm.to_json()
        rows.append([d["nu"], *d["m"], d["M"], d["zeta_lo"], d["zeta_hi"]])
    return _rows_to_csv(["nu", "m0", "m1", "m2", "M", "zeta_lo", "zeta_hi"], rows)


def _witness_text(config: CliConfig, a1, a2) -> tuple[str, bool]:
    seq = enumerate_best_approximations(a1, a2, config.height_bound)
    indices = applicable_indices(seq)
    witnesses, failures = [], []
    for nu in indices:
        try:
            w = theorem3_dispatch(NuContext.from_sequence(seq, nu))
        except (Inapplicable, SearchFailed, PreconditionNotCertified, DetConditionFailed) as exc:
            failures.append({"nu": nu, "error": type(exc).__name__, "message": str(exc)})
            continue
        witnesses.append(w.to_json(dispatch_nu=nu))
    if config.output_format == "json":
        doc = {"schema_version": SCHEMA_VERSION,
               "inputs": {"alpha1": a1.describe(), "alpha2": a2.describe()},
               "height_bound": config.height_bound, "best_approx_count": len(seq),
               "witnesses": witnesses, "failures": failures}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = _rows_to_csv(["nu", "case", "source", "x1", "x2", "value_hi", "bound_rhs", "holds"],
                            [[w["nu"], w["case"], w["source"], *w["x"], w["value_hi"], w["bound_rhs"], w["holds"]]
                             for w in witnesses])
    return text, bool(indices)


def _report_text(config: CliConfig, report) -> str:
    return report.dumps() if config.output_format == "json" else report.to_csv()


def _emit(config: CliConfig, text: str, stdout) -> None:
    if config.output is None:
        stdout.write(text)
    else:
        with open(config.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _diagnose(stderr, code: int, exc: BaseException) -> None:
    stderr.write(json.dumps({"exit_status": code, "error": type(exc).__name__, "message": str(exc)}) + "\n")


def exit_status(exc: BaseException) -> int:
    """Exit status as a function of the terminal error class."""
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, PrecisionExhausted):
        return EXIT_PRECISION
    if isinstance(exc, NoApplicableNu):
        return EXIT_NO_NU
    return EXIT_OTHER


def run(config: CliConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    limit = precision_limit(config.precision_cap) if config.precision_cap else contextlib.nullcontext()
    try:
        with limit:
            a1, a2 = parse_descriptor(config.alpha1), parse_descriptor(config.alpha2)
            if config.subcommand == "best-approx":
                _emit(config, _best_approx_text(config, a1, a2), stdout)
            elif config.subcommand == "witness":
                text, any_nu = _witness_text(config, a1, a2)
                _emit(config, text, stdout)
                if not any_nu:
                    raise NoApplicableNu("no index nu with nonzero determinant within the height bound")
            else:
                try:
                    report = theorem2_run(a1, a2, config.Gamma, config.gamma, config.height_bound)
                except NoApplicableNu as exc:
                    if getattr(exc, "report", None) is not None:
                        _emit(config, _report_text(config, exc.report), stdout)
                    raise
                _emit(config, _report_text(config, report), stdout)
    except PosApproxError as exc:
        code = exit_status(exc)
        _diagnose(stderr, code, exc)
        return code
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        _diagnose(sys.stderr, EXIT_USAGE, exc)
        return EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
