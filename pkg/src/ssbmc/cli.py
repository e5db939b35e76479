"""Command-line interface: ``ssbmc verify|bench|export``.

Exit codes: 0 property holds, 1 violated, 2 usage or input error, 3 unknown.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .bench import DEFAULT_PRECISIONS, SUITE_DIR, format_matrix, run_bench
from .bmc.blast import export_dimacs
from .bmc.encode import DEFAULT_REF_EXTRA_FRAC, DEFAULT_REF_EXTRA_INT, EncodingError
from .bmc.engine import encode
from .fixedpoint import OVERFLOW_MODES, ROUNDING_MODES
from .runner import CLI_PROPERTIES, TaskError, run_task, task_from_spec
from .specfile import SpecError, SpecFile, parse_decimal, parse_spec
from .statespace import close_loop, quantize_system

EXIT = {"holds": 0, "violated": 1, "unknown": 3}
USAGE_ERROR = 2

FORMAT_HELP = """\
fixed-point format <I,F>: I integer bits INCLUDING the sign bit, F fractional
bits, word length I+F. Every product and sum is quantized to <I,F>; there is
no wide accumulator. Defaults: rounding=nearest (ties away from zero),
overflow=wrap (two's complement).

quantization-error: the implementation is compared with a reference in
<I+8,F+32> driven by the same inputs; the CDCL solver runs with VSIDS
branching, phase saving, Luby restarts (unit 100) and no time limit unless
--timeout is given. A sound interval pre-check settles easy cases before any
SAT call (disable with --no-presolve).
"""


def _decimal(text):
    try:
        return parse_decimal(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _add_format_args(p):
    g = p.add_argument_group("fixed-point format overrides")
    g.add_argument("--int-bits", type=int, help="integer bits I, sign bit included")
    g.add_argument("--frac-bits", type=int, help="fractional bits F")
    g.add_argument("--rounding", choices=ROUNDING_MODES, help="default: nearest")
    g.add_argument("--overflow", choices=OVERFLOW_MODES, help="default: wrap")


def _add_qerr_args(p):
    p.add_argument("--bound", "-k", type=_positive_int, help="time steps k (file value, else 10)")
    p.add_argument("--error-bound", type=_decimal, help="eps for the quantization-error property")
    p.add_argument("--closed-loop", action="store_true", help="verify A-BK with u = r - Kx")
    p.add_argument("--ref-int-bits", type=int, default=DEFAULT_REF_EXTRA_INT,
                   help=f"extra integer bits of the reference (default {DEFAULT_REF_EXTRA_INT})")
    p.add_argument("--ref-frac-bits", type=int, default=DEFAULT_REF_EXTRA_FRAC,
                   help=f"extra fractional bits of the reference (default {DEFAULT_REF_EXTRA_FRAC})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssbmc", description="Bounded model checking of fixed-point state-space controllers.",
        epilog=FORMAT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check one property of one system",
                       epilog=FORMAT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    v.add_argument("file", help="system description (.ss)")
    v.add_argument("--property", "-p", choices=CLI_PROPERTIES,
                   help="property to check (default: all; quantization-error only with an error bound)")
    _add_qerr_args(v)
    v.add_argument("--timeout", type=float, help="seconds for the SAT search (default: none)")
    v.add_argument("--engine", choices=("sat", "enumerate"), default="sat",
                   help="quantization-error back end (default: sat)")
    v.add_argument("--no-presolve", action="store_true", help="skip the interval pre-check")
    v.add_argument("--json", action="store_true", help="print a JSON report")
    v.add_argument("--dimacs-out", metavar="PATH", help="also write the quantization-error CNF")
    _add_format_args(v)

    b = sub.add_parser("bench", help="run a suite of systems at several word lengths")
    b.add_argument("directory", nargs="?", default=str(SUITE_DIR),
                   help="directory of .ss files (default: the shipped suite)")
    b.add_argument("--precisions", default=",".join(map(str, DEFAULT_PRECISIONS)),
                   help="comma-separated word lengths (default 8,16,32); I comes from each file")
    b.add_argument("--properties", default=",".join(CLI_PROPERTIES))
    b.add_argument("--timeout", type=float, default=60.0, help="per-task SAT timeout (default 60)")
    b.add_argument("--jobs", "-j", type=_positive_int, help="worker processes (default: CPU count)")
    b.add_argument("--no-presolve", action="store_true")
    b.add_argument("--json", metavar="PATH", help="write the full result as JSON")

    e = sub.add_parser("export", help="write the quantization-error CNF in DIMACS format")
    e.add_argument("file")
    e.add_argument("--output", "-o", default="-", help="output path (default stdout)")
    _add_qerr_args(e)
    _add_format_args(e)
    return parser


def _fail(msg) -> int:
    print(f"ssbmc: error: {msg}", file=sys.stderr)
    return USAGE_ERROR


def _load(path):
    return parse_spec(SpecFile.read(path))


def _overrides(args) -> dict:
    return dict(int_bits=args.int_bits, frac_bits=args.frac_bits, rounding=args.rounding,
                overflow=args.overflow, bound=args.bound, error_bound=args.error_bound,
                closed_loop=args.closed_loop, ref_extra_int=args.ref_int_bits,
                ref_extra_frac=args.ref_frac_bits)


def _describe(report) -> str:
    v = report.verdict
    t = report.task
    lines = [f"{report.system}: {t.property} in {t.fmt} "
             f"[{t.fmt.rounding}/{t.fmt.overflow}]: {v.outcome.upper()} ({report.method})"]
    ev = v.evidence
    if "rank" in ev:
        lines.append(f"  rank {ev['rank']} of {ev['required_rank']}")
    if "polynomial" in ev:
        lines.append(f"  characteristic polynomial: {ev['polynomial']}")
    if "interval_error_bound" in ev:
        lines.append(f"  interval bound on |error|: {float(Fraction(ev['interval_error_bound'])):.6g}")
    cex = v.counterexample
    if cex is not None:
        lines.append(f"  counterexample (k={t.bound}, violation at n={cex.step}):")
        for n, u in enumerate(cex.inputs):
            lines.append(f"    u({n}) = " + ", ".join(f"{x.value} (raw {x.raw})" for x in u))
        lines.append(f"    y_q = {cex.y_q}, y_ref = {cex.y_ref}, |error| = {float(cex.error):.6g}"
                     f" > {t.error_bound}")
    lines.append(f"  time {v.wall_time:.3f}s")
    return "\n".join(lines)


def cmd_verify(args) -> int:
    try:
        parsed = _load(args.file)
    except (SpecError, OSError) as exc:
        return _fail(exc)
    props = [args.property] if args.property else [
        p for p in CLI_PROPERTIES
        if p != "quantization-error" or (args.error_bound or parsed.error_bound) is not None]
    reports = []
    try:
        for prop in props:
            task = task_from_spec(parsed, prop, timeout=args.timeout, engine=args.engine,
                                  presolve=not args.no_presolve, **_overrides(args))
            if args.dimacs_out and prop == "quantization-error":
                _write_dimacs(parsed, task, args.dimacs_out)
            reports.append(run_task(parsed, task))
    except (TaskError, EncodingError) as exc:
        return _fail(exc)
    except OSError as exc:
        return _fail(exc)
    if args.json:
        doc = reports[0].to_json() if len(reports) == 1 else [r.to_json() for r in reports]
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for r in reports:
            print(_describe(r))
    outcomes = {r.verdict.outcome for r in reports}
    if "violated" in outcomes:
        return EXIT["violated"]
    if "unknown" in outcomes:
        return EXIT["unknown"]
    return EXIT["holds"]


def _write_dimacs(parsed, task, path):
    qsys = quantize_system(parsed.system, task.fmt)
    if task.closed_loop:
        qsys = close_loop(qsys)
    if task.error_bound is None:
        raise TaskError("DIMACS export needs an error bound")
    _, formula = encode(qsys, task.ref_fmt, task.bound, task.error_bound)
    if path == "-":
        export_dimacs(formula, sys.stdout)
    else:
        with open(path, "w") as fh:
            export_dimacs(formula, fh)


def cmd_export(args) -> int:
    try:
        parsed = _load(args.file)
        if parsed.system.K is None and args.closed_loop:
            raise TaskError("--closed-loop needs a feedback gain K in the system file")
        task = task_from_spec(parsed, "quantization-error", **_overrides(args))
        _write_dimacs(parsed, task, args.output)
    except (SpecError, TaskError, EncodingError, OSError, ValueError) as exc:
        return _fail(exc)
    return 0


def cmd_bench(args) -> int:
    try:
        precisions = [int(x) for x in args.precisions.split(",") if x.strip()]
    except ValueError:
        return _fail(f"bad --precisions {args.precisions!r}")
    props = [p.strip() for p in args.properties.split(",") if p.strip()]
    bad = [p for p in props if p not in CLI_PROPERTIES]
    if bad or not props or not precisions:
        return _fail(f"bad --properties {args.properties!r}")
    if not Path(args.directory).is_dir():
        return _fail(f"{args.directory} is not a directory")
    try:
        result = run_bench(args.directory, precisions, props, timeout=args.timeout,
                           jobs=args.jobs, presolve=not args.no_presolve)
    except FileNotFoundError as exc:
        return _fail(exc)
    print(format_matrix(result, precisions, props))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(result, fh, indent=2, sort_keys=True)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"verify": cmd_verify, "bench": cmd_bench, "export": cmd_export}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
