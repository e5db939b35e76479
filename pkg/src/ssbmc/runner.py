"""One verification run: task description in, report out."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .bmc.encode import DEFAULT_REF_EXTRA_FRAC, DEFAULT_REF_EXTRA_INT, EncodingError
from .bmc.engine import check_quantization_error
from .fixedpoint import FixedPointFormat
from .oracle import enumerate_verify
from .properties import Verdict, check_controllability, check_observability, check_stability
from .specfile import ParsedSpec
from .statespace import close_loop, quantize_system

CLI_PROPERTIES = ("stability", "controllability", "observability", "quantization-error")


class TaskError(ValueError):
    """The task cannot be run as specified (maps to exit code 2)."""


@dataclass(frozen=True)
class VerificationTask:
    property: str
    fmt: FixedPointFormat
    bound: int = 10
    error_bound: Optional[Fraction] = None
    engine: str = "sat"
    timeout: Optional[float] = None
    closed_loop: bool = False
    ref_extra_int: int = DEFAULT_REF_EXTRA_INT
    ref_extra_frac: int = DEFAULT_REF_EXTRA_FRAC
    presolve: bool = True

    @property
    def ref_fmt(self) -> FixedPointFormat:
        return self.fmt.widened(self.ref_extra_int, self.ref_extra_frac)


@dataclass
class RunReport:
    system: str
    task: VerificationTask
    verdict: Verdict
    method: str = "exact"
    timings: dict = field(default_factory=dict)
    solver_stats: dict = field(default_factory=dict)
    formula_size: dict = field(default_factory=dict)

    def to_json(self, include_timings: bool = True) -> dict:
        t = self.task
        task = {
            "system": self.system,
            "property": t.property,
            "format": {"int_bits": t.fmt.int_bits, "frac_bits": t.fmt.frac_bits,
                       "rounding": t.fmt.rounding, "overflow": t.fmt.overflow},
            "bound": t.bound,
            "error_bound": None if t.error_bound is None else str(t.error_bound),
            "engine": t.engine,
            "closed_loop": t.closed_loop,
        }
        if t.property == "quantization-error":
            task["reference_format"] = {"int_bits": t.ref_fmt.int_bits,
                                        "frac_bits": t.ref_fmt.frac_bits}
        cex = self.verdict.counterexample
        stats = {"solver": self.solver_stats, "formula": self.formula_size}
        if include_timings:
            stats["timings"] = self.timings
        return {
            "task": task,
            "verdict": {"property": self.verdict.property, "outcome": self.verdict.outcome,
                        "method": self.method},
            "evidence": self.verdict.evidence,
            "counterexample": None if cex is None else cex.to_json(),
            "stats": stats,
        }


def task_from_spec(parsed: ParsedSpec, prop: str, **overrides) -> VerificationTask:
    """Build a task from file values; keyword overrides (e.g. CLI flags) win."""
    fmt = parsed.format
    fmt_changes = {k: overrides.pop(k) for k in ("int_bits", "frac_bits", "rounding", "overflow")
                   if overrides.get(k) is not None}
    if fmt_changes:
        try:
            fmt = fmt.replace(**fmt_changes)
        except ValueError as exc:
            raise TaskError(str(exc)) from exc
    for k in ("int_bits", "frac_bits", "rounding", "overflow"):
        overrides.pop(k, None)
    values = {"bound": parsed.bound, "error_bound": parsed.error_bound}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return VerificationTask(property=prop, fmt=fmt, **values)


def run_task(parsed: ParsedSpec, task: VerificationTask) -> RunReport:
    t0 = time.perf_counter()
    system = parsed.system
    if task.closed_loop and system.K is None:
        raise TaskError("--closed-loop needs a feedback gain K in the system file")
    try:
        qsys = quantize_system(system, task.fmt)
    except ValueError as exc:
        raise TaskError(str(exc)) from exc
    timings = {"quantize": time.perf_counter() - t0}

    if task.property != "quantization-error":
        check = {"stability": check_stability, "controllability": check_controllability,
                 "observability": check_observability}.get(task.property)
        if check is None:
            raise TaskError(f"unknown property {task.property!r}")
        try:
            verdict = check(qsys, closed_loop=task.closed_loop)
        except ValueError as exc:
            raise TaskError(str(exc)) from exc
        timings["check"] = verdict.wall_time
        verdict.wall_time = time.perf_counter() - t0
        return RunReport(system.name, task, verdict, "exact", timings)

    if task.error_bound is None:
        raise TaskError("the quantization-error property needs an error bound "
                        "(error.bound in the file or --error-bound)")
    if task.closed_loop:
        try:
            qsys = close_loop(qsys)
        except ValueError as exc:
            raise TaskError(str(exc)) from exc
    if task.engine == "enumerate":
        from .bmc.encode import check_task
        try:
            eps = check_task(qsys, task.ref_fmt, task.bound, task.error_bound)
            res = enumerate_verify(qsys, task.ref_fmt, task.bound, eps)
        except ValueError as exc:
            raise TaskError(str(exc)) from exc
        timings["enumerate"] = time.perf_counter() - t0 - timings["quantize"]
        verdict = Verdict("quantization_error", res.outcome, {"explored_steps": res.explored},
                          res.counterexample, time.perf_counter() - t0)
        return RunReport(system.name, task, verdict, "enumerate", timings)
    if task.engine != "sat":
        raise TaskError(f"unknown engine {task.engine!r}")
    try:
        res = check_quantization_error(qsys, task.bound, task.error_bound, task.ref_fmt,
                                       timeout=task.timeout, presolve=task.presolve)
    except EncodingError as exc:
        raise TaskError(str(exc)) from exc
    timings.update(res.timings)
    evidence = {}
    if res.error_bound is not None:
        evidence["interval_error_bound"] = str(res.error_bound)
    if res.outcome == "unknown":
        evidence["reason"] = "timeout"
    verdict = Verdict("quantization_error", res.outcome, evidence, res.counterexample,
                      time.perf_counter() - t0)
    return RunReport(system.name, task, verdict, res.method, timings,
                     res.solver_stats, res.formula_size)


def with_precision(parsed: ParsedSpec, width: int) -> ParsedSpec:
    """Same design implemented in a ``width``-bit word, keeping the file's integer bits."""
    ib = parsed.format.int_bits
    if width - ib < 0:
        raise TaskError(f"{width}-bit word cannot hold {ib} integer bits")
    return replace(parsed, format=parsed.format.replace(frac_bits=width - ib))
