"""Discrete-time state-space systems x(n+1) = A x(n) + B u(n), y(n) = C x(n) + D u(n).

Two representations are kept side by side: the exact rational design and a
quantized implementation whose coefficients, states and inputs all live in a
single fixed-point format. Quantized dot products accumulate row-major, left
to right (A or C terms first, then B or D terms), quantizing after every
multiply and every add.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

from .fixedpoint import FixedPointFormat, FxNum, fx_add, fx_mul, fx_sub, quantize
from .rational import RationalMatrix


class DimensionError(ValueError):
    pass


class InputRangeError(ValueError):
    pass


@dataclass(frozen=True)
class StateSpaceSystem:
    A: RationalMatrix
    B: RationalMatrix
    C: RationalMatrix
    D: RationalMatrix
    x0: tuple = None
    input_lo: tuple = None
    input_hi: tuple = None
    K: Optional[RationalMatrix] = None
    name: str = "system"

    def __post_init__(self):
        n, m, p = self.A.rows, self.B.cols, self.C.rows
        if self.A.cols != n:
            raise DimensionError(f"A must be square, got {self.A.rows}x{self.A.cols}")
        if self.B.rows != n:
            raise DimensionError(f"B must have {n} rows, got {self.B.rows}")
        if self.C.cols != n:
            raise DimensionError(f"C must have {n} columns, got {self.C.cols}")
        if self.D.shape != (p, m):
            raise DimensionError(f"D must be {p}x{m}, got {self.D.rows}x{self.D.cols}")
        if self.K is not None and self.K.shape != (m, n):
            raise DimensionError(f"K must be {m}x{n}, got {self.K.rows}x{self.K.cols}")
        x0 = tuple(Fraction(v) for v in (self.x0 if self.x0 is not None else [0] * n))
        if len(x0) != n:
            raise DimensionError(f"initial state must have {n} entries, got {len(x0)}")
        object.__setattr__(self, "x0", x0)
        # None bounds mean the full range of whatever format implements the system
        if (self.input_lo is None) != (self.input_hi is None):
            raise ValueError("give both input bounds or neither")
        if self.input_lo is not None:
            for attr in ("input_lo", "input_hi"):
                v = tuple(Fraction(x) for x in getattr(self, attr))
                if len(v) != m:
                    raise DimensionError(f"{attr} must have {m} entries, got {len(v)}")
                object.__setattr__(self, attr, v)
            if any(lo > hi for lo, hi in zip(self.input_lo, self.input_hi)):
                raise ValueError("input_lo must not exceed input_hi")

    @property
    def n_states(self) -> int:
        return self.A.rows

    @property
    def n_inputs(self) -> int:
        return self.B.cols

    @property
    def n_outputs(self) -> int:
        return self.C.rows


FxMatrix = tuple  # tuple of rows, each a tuple of FxNum


def _qmat(M: RationalMatrix, fmt: FixedPointFormat) -> FxMatrix:
    return tuple(tuple(quantize(x, fmt) for x in row) for row in M)


def _ratmat(M: FxMatrix) -> RationalMatrix:
    return RationalMatrix([[x.value for x in row] for row in M])


@dataclass(frozen=True)
class QuantizedSystem:
    fmt: FixedPointFormat
    A: FxMatrix
    B: FxMatrix
    C: FxMatrix
    D: FxMatrix
    x0: tuple
    input_lo: tuple
    input_hi: tuple
    K: Optional[FxMatrix] = None
    source: Optional[StateSpaceSystem] = field(default=None, compare=False)
    closed_loop: bool = False

    @property
    def n_states(self) -> int:
        return len(self.A)

    @property
    def n_inputs(self) -> int:
        return len(self.B[0])

    @property
    def n_outputs(self) -> int:
        return len(self.C)

    def rational(self, name: str) -> RationalMatrix:
        """Exact rational view of coefficient matrix ``name`` ('A', 'B', ...)."""
        return _ratmat(getattr(self, name))

    def input_range(self, i: int) -> tuple[int, int]:
        return self.input_lo[i].raw, self.input_hi[i].raw


@dataclass(frozen=True)
class Trajectory:
    inputs: tuple
    states: tuple
    outputs: tuple

    @property
    def bound(self) -> int:
        return len(self.inputs)


def quantize_system(sys: StateSpaceSystem, fmt: FixedPointFormat) -> QuantizedSystem:
    # bounds describe a range, so they saturate regardless of the overflow policy
    bound_fmt = fmt.replace(overflow="saturate")
    if sys.input_lo is None:
        lo = (FxNum(fmt.min_raw, fmt),) * sys.n_inputs
        hi = (FxNum(fmt.max_raw, fmt),) * sys.n_inputs
    else:
        lo = tuple(FxNum(quantize(v, bound_fmt).raw, fmt) for v in sys.input_lo)
        hi = tuple(FxNum(quantize(v, bound_fmt).raw, fmt) for v in sys.input_hi)
    return QuantizedSystem(
        fmt=fmt,
        A=_qmat(sys.A, fmt), B=_qmat(sys.B, fmt), C=_qmat(sys.C, fmt), D=_qmat(sys.D, fmt),
        x0=tuple(quantize(v, fmt) for v in sys.x0),
        input_lo=lo, input_hi=hi,
        K=None if sys.K is None else _qmat(sys.K, fmt),
        source=sys,
    )


def _fx_dot(pairs) -> FxNum:
    acc = None
    for a, b in pairs:
        prod = fx_mul(a, b)
        acc = prod if acc is None else fx_add(acc, prod)
    return acc


def close_loop(sys):
    """State feedback u = r - K x, giving (A - BK, B, C, D) driven by r."""
    if sys.K is None:
        raise ValueError("closed-loop composition needs a feedback gain K")
    if isinstance(sys, QuantizedSystem):
        if any(d.raw != 0 for row in sys.D for d in row):
            raise ValueError("closed loop with nonzero D is not supported")
        n, m = sys.n_states, sys.n_inputs
        BK = [[_fx_dot((sys.B[i][l], sys.K[l][j]) for l in range(m)) for j in range(n)]
              for i in range(n)]
        A_cl = tuple(tuple(fx_sub(sys.A[i][j], BK[i][j]) for j in range(n)) for i in range(n))
        return replace(sys, A=A_cl, K=None, closed_loop=True)
    if not sys.D.is_zero():
        raise ValueError("closed loop with nonzero D is not supported")
    return replace(sys, A=sys.A - sys.B @ sys.K, K=None)


def reference_system(qsys: QuantizedSystem, ref_fmt: FixedPointFormat) -> QuantizedSystem:
    """The original design quantized into the wide format ``ref_fmt``.

    Input bounds are carried over from ``qsys`` so that every admissible
    narrow input is also admissible for the reference.
    """
    if qsys.source is None:
        raise ValueError("quantized system does not record its source design")
    wide = quantize_system(qsys.source, ref_fmt)
    if qsys.closed_loop:
        wide = close_loop(wide)
    return replace(wide,
                   input_lo=tuple(widen(v, ref_fmt) for v in qsys.input_lo),
                   input_hi=tuple(widen(v, ref_fmt) for v in qsys.input_hi))


def widen(v: FxNum, fmt: FixedPointFormat) -> FxNum:
    """Exact conversion of a grid value into a format at least as wide."""
    shift = fmt.frac_bits - v.fmt.frac_bits
    if shift < 0 or fmt.int_bits < v.fmt.int_bits:
        raise ValueError(f"{fmt} is not wider than {v.fmt}")
    return FxNum(v.raw << shift, fmt)


def _check_inputs(sys, inputs: Sequence, k: int, lo, hi):
    if len(inputs) != k:
        raise InputRangeError(f"expected {k} input vectors, got {len(inputs)}")
    m = sys.n_inputs
    for n, u in enumerate(inputs):
        if len(u) != m:
            raise InputRangeError(f"input vector {n} has {len(u)} entries, expected {m}")
        for i, v in enumerate(u):
            if not lo[i] <= v <= hi[i]:
                raise InputRangeError(f"input u({n})[{i}] = {v} outside [{lo[i]}, {hi[i]}]")


def step_quantized(qsys: QuantizedSystem, x: tuple, u: tuple) -> tuple[tuple, tuple]:
    """One update: returns (x(n+1), y(n))."""
    n, m = qsys.n_states, qsys.n_inputs
    x_next = tuple(
        _fx_dot([(qsys.A[i][j], x[j]) for j in range(n)] + [(qsys.B[i][l], u[l]) for l in range(m)])
        for i in range(n))
    y = tuple(
        _fx_dot([(qsys.C[i][j], x[j]) for j in range(n)] + [(qsys.D[i][l], u[l]) for l in range(m)])
        for i in range(qsys.n_outputs))
    return x_next, y


def simulate_quantized(qsys: QuantizedSystem, inputs: Sequence, k: int) -> Trajectory:
    inputs = [tuple(u) for u in inputs]
    for u in inputs:
        for v in u:
            if v.fmt != qsys.fmt:
                raise InputRangeError(f"input format {v.fmt} differs from system format {qsys.fmt}")
    _check_inputs(qsys, [[v.value for v in u] for u in inputs], k,
                  [v.value for v in qsys.input_lo], [v.value for v in qsys.input_hi])
    states = [tuple(qsys.x0)]
    outputs = []
    for u in inputs:
        x_next, y = step_quantized(qsys, states[-1], u)
        states.append(x_next)
        outputs.append(y)
    return Trajectory(tuple(inputs), tuple(states), tuple(outputs))


def simulate_exact(sys: StateSpaceSystem, inputs: Sequence, k: int) -> Trajectory:
    """Exact recurrence with the original coefficients; inputs are grid values."""
    vals = [tuple(v.value if isinstance(v, FxNum) else Fraction(v) for v in u) for u in inputs]
    m = sys.n_inputs
    if sys.input_lo is None:
        _check_inputs(sys, vals, k, [float("-inf")] * m, [float("inf")] * m)
    else:
        _check_inputs(sys, vals, k, sys.input_lo, sys.input_hi)
    n = sys.n_states
    states = [tuple(sys.x0)]
    outputs = []
    for u in vals:
        x = states[-1]
        states.append(tuple(
            sum((sys.A[i, j] * x[j] for j in range(n)), Fraction(0))
            + sum((sys.B[i, l] * u[l] for l in range(len(u))), Fraction(0))
            for i in range(n)))
        outputs.append(tuple(
            sum((sys.C[i, j] * x[j] for j in range(n)), Fraction(0))
            + sum((sys.D[i, l] * u[l] for l in range(len(u))), Fraction(0))
            for i in range(sys.n_outputs)))
    return Trajectory(tuple(vals), tuple(states), tuple(outputs))
