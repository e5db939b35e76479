"""Unrolling of the quantization-error property into a bit-vector formula.

The narrow implementation and a wide reference implementation of the same
design are unrolled side by side over symbolic inputs u(0..k-1). Each
elementary multiply/add is encoded with the same rounding and overflow
semantics as :mod:`ssbmc.fixedpoint`. The formula is satisfiable iff some
admissible input sequence drives |y_q(n) - y_ref(n)| above eps for some n < k.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..fixedpoint import FixedPointFormat
from ..statespace import QuantizedSystem, reference_system
from . import bitvec as bv

DEFAULT_REF_EXTRA_INT = 8
DEFAULT_REF_EXTRA_FRAC = 32

# Test-only fault injection: when set, the nearest-rounding bias of every
# encoded multiply gets an extra LSB. Concrete replay must catch this.
_FAULT_ROUNDING_BIAS = False


class EncodingError(ValueError):
    pass


def default_reference_format(fmt: FixedPointFormat) -> FixedPointFormat:
    return fmt.widened(DEFAULT_REF_EXTRA_INT, DEFAULT_REF_EXTRA_FRAC)


def _sign(x):
    return bv.extract(x, x.width - 1, x.width - 1)


def _clamp(r, fmt: FixedPointFormat):
    """Overflow policy applied to a signed word at least fmt.width wide."""
    W = fmt.width
    low = bv.extract(r, W - 1, 0)
    if r.width == W:
        return low
    if fmt.overflow == "wrap":
        return low
    hi_c = bv.const(fmt.max_raw, r.width)
    lo_c = bv.const(fmt.min_raw, r.width)
    return bv.ite(bv.sgt(r, hi_c), bv.const(fmt.max_raw, W),
                  bv.ite(bv.sgt(lo_c, r), bv.const(fmt.min_raw, W), low))


def fx_add_expr(a, b, fmt: FixedPointFormat):
    W = fmt.width
    if fmt.overflow == "wrap":
        return bv.add(a, b)
    return _clamp(bv.add(bv.sext(a, W + 1), bv.sext(b, W + 1)), fmt)


def fx_sub_expr(a, b, fmt: FixedPointFormat):
    W = fmt.width
    if fmt.overflow == "wrap":
        return bv.sub(a, b)
    return _clamp(bv.sub(bv.sext(a, W + 1), bv.sext(b, W + 1)), fmt)


def fx_mul_expr(a, b, fmt: FixedPointFormat):
    """Fixed-point multiply: exact product, rounding by bias-then-shift, overflow."""
    W, Fb = fmt.width, fmt.frac_bits
    # wrap only needs the product modulo 2^(F+W); saturation needs all of it
    P = Fb + W if fmt.overflow == "wrap" else 2 * W
    p = bv.mul(bv.sext(a, P), bv.sext(b, P))
    if Fb == 0:
        return _clamp(p, fmt)
    # sign of the true product; when the product is zero either bias rounds to 0
    neg = bv.not_(bv.eq(_sign(a), _sign(b)))
    half = 1 << (Fb - 1)
    if fmt.rounding == "nearest":
        pos_bias, neg_bias = half, half - 1
        if _FAULT_ROUNDING_BIAS:
            pos_bias += 1 << Fb
            neg_bias += 1 << Fb
    elif fmt.rounding == "truncate":
        pos_bias, neg_bias = 0, (1 << Fb) - 1
    else:
        pos_bias = neg_bias = 0
    if pos_bias or neg_bias:
        bias = bv.ite(neg, bv.const(neg_bias, P), bv.const(pos_bias, P))
        p = bv.add(p, bias)
    r = bv.extract(p, P - 1, Fb)
    return _clamp(r, fmt)


def _dot(terms, fmt):
    """Left-to-right per-operation accumulation; exact-zero coefficients are skipped."""
    acc = None
    for coeff, x in terms:
        if coeff.raw == 0:
            continue
        prod = fx_mul_expr(bv.const(coeff.raw, fmt.width), x, fmt)
        acc = prod if acc is None else fx_add_expr(acc, prod, fmt)
    return acc if acc is not None else bv.const(0, fmt.width)


def _step(sys: QuantizedSystem, x, u):
    n, m, fmt = sys.n_states, sys.n_inputs, sys.fmt
    x_next = [_dot([(sys.A[i][j], x[j]) for j in range(n)] + [(sys.B[i][l], u[l]) for l in range(m)], fmt)
              for i in range(n)]
    y = [_dot([(sys.C[i][j], x[j]) for j in range(n)] + [(sys.D[i][l], u[l]) for l in range(m)], fmt)
         for i in range(sys.n_outputs)]
    return x_next, y


def _align(e, src: FixedPointFormat, dst: FixedPointFormat, width: int):
    return bv.sext(bv.shl_const(e, dst.frac_bits - src.frac_bits), width)


@dataclass
class Unrolling:
    """The property formula plus what is needed to decode a model of it."""
    formula: bv.BitVecExpr
    qsys: QuantizedSystem
    ref: QuantizedSystem
    bound: int
    eps: Fraction
    inputs: dict          # symbol name -> (time step, input index)

    @property
    def ref_fmt(self) -> FixedPointFormat:
        return self.ref.fmt


def check_task(qsys: QuantizedSystem, ref_fmt: FixedPointFormat, k: int, eps) -> Fraction:
    if qsys.n_inputs != 1 or qsys.n_outputs != 1:
        raise EncodingError("the quantization-error property is defined for SISO systems only "
                            f"(got {qsys.n_inputs} inputs, {qsys.n_outputs} outputs)")
    fmt = qsys.fmt
    if ref_fmt.int_bits < fmt.int_bits or ref_fmt.frac_bits < fmt.frac_bits \
            or ref_fmt.width <= fmt.width:
        raise EncodingError(f"reference format {ref_fmt} must be strictly wider than {fmt}")
    if k < 1:
        raise EncodingError("bound k must be at least 1")
    eps = Fraction(eps)
    if eps <= 0:
        raise EncodingError("error bound must be positive")
    if not ref_fmt.contains(eps):
        raise EncodingError(f"error bound {eps} is not representable in {ref_fmt} "
                            "(use a multiple of 2^-F of the reference, e.g. 0.0625)")
    return eps


def unroll(qsys: QuantizedSystem, ref_fmt: FixedPointFormat, k: int, eps) -> Unrolling:
    eps = check_task(qsys, ref_fmt, k, eps)
    ref = reference_system(qsys, ref_fmt)
    fmt = qsys.fmt
    W, Wr = fmt.width, ref_fmt.width
    ew = Wr + 1  # |y_q - y_ref| always fits here
    eps_c = bv.const(int(eps * (1 << ref_fmt.frac_bits)), ew)

    x_q = [bv.const(v.raw, W) for v in qsys.x0]
    x_r = [bv.const(v.raw, Wr) for v in ref.x0]
    constraints, violations, inputs = [], [], {}
    for n in range(k):
        u_q, u_r = [], []
        for i in range(qsys.n_inputs):
            name = f"u{n}_{i}"
            inputs[name] = (n, i)
            sym = bv.input_symbol(name, W)
            lo = bv.const(qsys.input_lo[i].raw, W)
            hi = bv.const(qsys.input_hi[i].raw, W)
            constraints.append(bv.not_(bv.sgt(sym, hi)))
            constraints.append(bv.not_(bv.sgt(lo, sym)))
            u_q.append(sym)
            u_r.append(_align(sym, fmt, ref_fmt, Wr))
        x_q_next, y_q = _step(qsys, x_q, u_q)
        x_r_next, y_r = _step(ref, x_r, u_r)
        diff = bv.sub(_align(y_q[0], fmt, ref_fmt, ew), bv.sext(y_r[0], ew))
        mag = bv.ite(_sign(diff), bv.neg(diff), diff)
        violations.append(bv.sgt(mag, eps_c))
        x_q, x_r = x_q_next, x_r_next
    formula = bv.and_(bv.all_of(constraints), bv.any_of(violations))
    return Unrolling(formula, qsys, ref, k, eps, inputs)
