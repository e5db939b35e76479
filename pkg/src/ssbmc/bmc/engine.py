"""Quantization-error verification: interval pre-check, unroll, bit-blast, solve, decode."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..counterexample import Counterexample
from ..fixedpoint import FixedPointFormat, FxNum
from ..statespace import QuantizedSystem, reference_system, simulate_quantized, widen
from .blast import CnfFormula, bitblast
from .cdcl import SolverConfig, SolveResult, solve
from .encode import Unrolling, check_task, default_reference_format, unroll
from .interval import error_bound


class ReplayMismatchError(AssertionError):
    """A SAT model whose concrete replay does not violate the bound: an encoder bug."""


def replay(qsys: QuantizedSystem, ref: QuantizedSystem, inputs, eps) -> Optional[Counterexample]:
    """Simulate both implementations on ``inputs``; return the first violation, if any."""
    k = len(inputs)
    tq = simulate_quantized(qsys, inputs, k)
    tr = simulate_quantized(ref, [tuple(widen(v, ref.fmt) for v in u) for u in inputs], k)
    for n in range(k):
        yq, yr = tq.outputs[n][0].value, tr.outputs[n][0].value
        if abs(yq - yr) > eps:
            return Counterexample(tuple(tuple(u) for u in inputs), n, yr, yq, abs(yq - yr))
    return None


def annotate(f: CnfFormula, unrolling: Unrolling) -> CnfFormula:
    for name, lits in f.symbols.items():
        step, idx = unrolling.inputs[name]
        for bit, lit in enumerate(lits):
            f.annotations[abs(lit)] = (step, idx, bit)
    return f


def encode(qsys: QuantizedSystem, ref_fmt: FixedPointFormat, k: int, eps) -> tuple[Unrolling, CnfFormula]:
    u = unroll(qsys, ref_fmt, k, eps)
    return u, annotate(bitblast(u.formula), u)


def decode_counterexample(f: CnfFormula, assignment, unrolling: Unrolling) -> Counterexample:
    """Rebuild the input sequence from a model and confirm it by concrete replay."""
    model = assignment.model if isinstance(assignment, SolveResult) else assignment
    qsys = unrolling.qsys
    fmt = qsys.fmt
    raws = {}
    for name, lits in f.symbols.items():
        u = 0
        for bit, lit in enumerate(lits):
            if model[abs(lit)] == (lit > 0):
                u |= 1 << bit
        raws[unrolling.inputs[name]] = u - (1 << fmt.width) if u >> (fmt.width - 1) else u
    inputs = [tuple(FxNum(raws[(n, i)], fmt) for i in range(qsys.n_inputs))
              for n in range(unrolling.bound)]
    for n, u in enumerate(inputs):
        for i, v in enumerate(u):
            lo, hi = qsys.input_range(i)
            if not lo <= v.raw <= hi:
                raise ReplayMismatchError(f"decoded input u({n})[{i}]={v.value} violates its range")
    cex = replay(qsys, unrolling.ref, inputs, unrolling.eps)
    if cex is None:
        raise ReplayMismatchError(
            "SAT model does not reproduce a violation under concrete replay: "
            f"inputs {[[str(v.value) for v in u] for u in inputs]}")
    return cex


@dataclass
class QuantErrorResult:
    outcome: str                       # holds / violated / unknown
    counterexample: Optional[Counterexample] = None
    method: str = "sat"                # interval / sat
    error_bound: Optional[Fraction] = None
    timings: dict = field(default_factory=dict)
    solver_stats: dict = field(default_factory=dict)
    formula_size: dict = field(default_factory=dict)


def check_quantization_error(qsys: QuantizedSystem, k: int, eps, ref_fmt: FixedPointFormat | None = None,
                             timeout: float | None = None, presolve: bool = True,
                             config: SolverConfig | None = None) -> QuantErrorResult:
    ref_fmt = ref_fmt or default_reference_format(qsys.fmt)
    eps = check_task(qsys, ref_fmt, k, eps)
    timings = {}
    t0 = time.perf_counter()
    bound = None
    if presolve:
        bound = error_bound(qsys, reference_system(qsys, ref_fmt), k)
        timings["presolve"] = time.perf_counter() - t0
        if bound is not None and bound <= eps:
            return QuantErrorResult("holds", method="interval", error_bound=bound, timings=timings)
    t1 = time.perf_counter()
    unrolling, f = encode(qsys, ref_fmt, k, eps)
    timings["encode"] = time.perf_counter() - t1
    size = {"variables": f.num_vars, "clauses": f.num_clauses}
    remaining = None
    if timeout is not None:
        remaining = max(0.0, timeout - (time.perf_counter() - t0))
    t2 = time.perf_counter()
    priority = [abs(l) for lits in f.symbols.values() for l in lits]
    res = solve(f, remaining, config, priority_vars=priority)
    timings["solve"] = time.perf_counter() - t2
    stats = {k_: v for k_, v in res.stats.items() if k_ != "solve_time"}
    if res.status == "unknown":
        return QuantErrorResult("unknown", None, "sat", bound, timings, stats, size)
    if res.status == "unsat":
        return QuantErrorResult("holds", None, "sat", bound, timings, stats, size)
    cex = decode_counterexample(f, res, unrolling)
    return QuantErrorResult("violated", cex, "sat", bound, timings, stats, size)
