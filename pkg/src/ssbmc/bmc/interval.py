"""Sound interval bound on the quantization error, used before bit-blasting.

Each signal is tracked as a pair of intervals: the reference value and the
error (narrow minus reference). Every multiply contributes coefficient
mismatch, propagated error and rounding error; any step where an overflow
cannot be ruled out makes the analysis give up. When the resulting bound on
|y_q - y_ref| never exceeds eps, the property holds for every input and no
SAT call is needed.
"""
from __future__ import annotations

from fractions import Fraction

from ..fixedpoint import FixedPointFormat
from ..statespace import QuantizedSystem

ZERO = Fraction(0)


class _Overflow(Exception):
    pass


def _rounding_interval(fmt: FixedPointFormat, coeff: Fraction) -> tuple[Fraction, Fraction]:
    if coeff.denominator == 1:
        return ZERO, ZERO  # integer coefficient keeps grid values on the grid
    lsb = fmt.lsb
    if fmt.rounding == "nearest":
        return -lsb / 2, lsb / 2
    if fmt.rounding == "floor":
        return -lsb, ZERO
    return -lsb, lsb


def _scale(c: Fraction, lo: Fraction, hi: Fraction):
    a, b = c * lo, c * hi
    return (a, b) if a <= b else (b, a)


def _check(lo, hi, fmt: FixedPointFormat):
    if lo < fmt.min_value or hi > fmt.max_value:
        raise _Overflow


class _Analysis:
    def __init__(self, nfmt, rfmt):
        self.nfmt, self.rfmt = nfmt, rfmt

    def mul(self, cq: Fraction, cr: Fraction, sig):
        rlo, rhi, elo, ehi = sig
        drlo, drhi = _rounding_interval(self.rfmt, cr)
        dqlo, dqhi = _rounding_interval(self.nfmt, cq)
        prlo, prhi = _scale(cr, rlo, rhi)
        _check(prlo + drlo, prhi + drhi, self.rfmt)
        pqlo, pqhi = _scale(cq, rlo + elo, rhi + ehi)
        _check(pqlo + dqlo, pqhi + dqhi, self.nfmt)
        mlo, mhi = _scale(cq - cr, rlo, rhi)
        plo, phi = _scale(cq, elo, ehi)
        return (prlo + drlo, prhi + drhi,
                mlo + plo + dqlo - drhi, mhi + phi + dqhi - drlo)

    def add(self, s, t):
        r = (s[0] + t[0], s[1] + t[1])
        e = (s[2] + t[2], s[3] + t[3])
        _check(r[0], r[1], self.rfmt)
        _check(r[0] + e[0], r[1] + e[1], self.nfmt)
        return r + e

    def dot(self, terms):
        acc = (ZERO, ZERO, ZERO, ZERO)
        for cq, cr, sig in terms:
            acc = self.add(acc, self.mul(cq, cr, sig))
        return acc


def error_bound(qsys: QuantizedSystem, ref: QuantizedSystem, k: int):
    """Upper bound on max_n |y_q(n) - y_ref(n)| over n < k, or None if overflow is possible."""
    an = _Analysis(qsys.fmt, ref.fmt)
    n, m = qsys.n_states, qsys.n_inputs
    x = [(r.value, r.value, q.value - r.value, q.value - r.value) for q, r in zip(qsys.x0, ref.x0)]
    u = [(qsys.input_lo[i].value, qsys.input_hi[i].value, ZERO, ZERO) for i in range(m)]
    worst = ZERO
    try:
        for step in range(k):
            y = an.dot([(qsys.C[0][j].value, ref.C[0][j].value, x[j]) for j in range(n)]
                       + [(qsys.D[0][l].value, ref.D[0][l].value, u[l]) for l in range(m)])
            worst = max(worst, abs(y[2]), abs(y[3]))
            if step == k - 1:
                break
            x = [an.dot([(qsys.A[i][j].value, ref.A[i][j].value, x[j]) for j in range(n)]
                        + [(qsys.B[i][l].value, ref.B[i][l].value, u[l]) for l in range(m)])
                 for i in range(n)]
    except _Overflow:
        return None
    return worst
