"""Two's-complement fixed-point numbers in an <I,F> format.

``I`` counts the sign bit, so <2,4> spans [-2, 1.9375] in steps of 1/16.
Every arithmetic result is quantized back to the operands' format
immediately (no wide accumulator).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

ROUNDING_MODES = ("nearest", "truncate", "floor")
OVERFLOW_MODES = ("wrap", "saturate")


class FormatMismatchError(ValueError):
    """Raised when fixed-point operands carry different formats."""


@dataclass(frozen=True)
class FixedPointFormat:
    int_bits: int
    frac_bits: int
    rounding: str = "nearest"
    overflow: str = "wrap"

    def __post_init__(self):
        if self.int_bits < 1:
            raise ValueError(f"int_bits must be >= 1, got {self.int_bits}")
        if self.frac_bits < 0:
            raise ValueError(f"frac_bits must be >= 0, got {self.frac_bits}")
        if self.int_bits + self.frac_bits < 2:
            raise ValueError("total width I+F must be at least 2")
        if self.rounding not in ROUNDING_MODES:
            raise ValueError(f"unknown rounding mode {self.rounding!r}")
        if self.overflow not in OVERFLOW_MODES:
            raise ValueError(f"unknown overflow mode {self.overflow!r}")

    @property
    def width(self) -> int:
        return self.int_bits + self.frac_bits

    @property
    def min_raw(self) -> int:
        return -(1 << (self.width - 1))

    @property
    def max_raw(self) -> int:
        return (1 << (self.width - 1)) - 1

    @property
    def lsb(self) -> Fraction:
        return Fraction(1, 1 << self.frac_bits)

    @property
    def min_value(self) -> Fraction:
        return Fraction(self.min_raw, 1 << self.frac_bits)

    @property
    def max_value(self) -> Fraction:
        return Fraction(self.max_raw, 1 << self.frac_bits)

    def replace(self, **changes) -> "FixedPointFormat":
        fields = dict(int_bits=self.int_bits, frac_bits=self.frac_bits,
                      rounding=self.rounding, overflow=self.overflow)
        fields.update(changes)
        return FixedPointFormat(**fields)

    def widened(self, extra_int: int, extra_frac: int) -> "FixedPointFormat":
        return self.replace(int_bits=self.int_bits + extra_int,
                            frac_bits=self.frac_bits + extra_frac)

    def contains(self, value: Rational) -> bool:
        """True if ``value`` is a grid point of this format."""
        scaled = Fraction(value) * (1 << self.frac_bits)
        return scaled.denominator == 1 and self.min_raw <= scaled.numerator <= self.max_raw

    def __str__(self):
        return f"<{self.int_bits},{self.frac_bits}>"


def round_quotient(num: int, den: int, rounding: str) -> int:
    """Round num/den (den > 0) to an integer with the given mode."""
    if rounding == "floor":
        return num // den
    if rounding == "truncate":
        q = abs(num) // den
        return q if num >= 0 else -q
    # nearest, ties away from zero
    q = (2 * abs(num) + den) // (2 * den)
    return q if num >= 0 else -q


def fit_raw(raw: int, fmt: FixedPointFormat) -> int:
    """Apply the format's overflow policy to an unbounded integer."""
    if fmt.min_raw <= raw <= fmt.max_raw:
        return raw
    if fmt.overflow == "saturate":
        return fmt.max_raw if raw > fmt.max_raw else fmt.min_raw
    w = fmt.width
    raw &= (1 << w) - 1
    return raw - (1 << w) if raw >> (w - 1) else raw


@dataclass(frozen=True)
class FxNum:
    raw: int
    fmt: FixedPointFormat

    def __post_init__(self):
        if not self.fmt.min_raw <= self.raw <= self.fmt.max_raw:
            raise ValueError(f"raw value {self.raw} outside {self.fmt}")

    @property
    def value(self) -> Fraction:
        return Fraction(self.raw, 1 << self.fmt.frac_bits)

    def __repr__(self):
        return f"FxNum({self.value} raw={self.raw} {self.fmt})"


def quantize(x: Rational, fmt: FixedPointFormat) -> FxNum:
    x = Fraction(x)
    raw = round_quotient(x.numerator << fmt.frac_bits, x.denominator, fmt.rounding)
    return FxNum(fit_raw(raw, fmt), fmt)


def to_rational(a: FxNum) -> Fraction:
    return a.value


def _check(a: FxNum, b: FxNum):
    if a.fmt != b.fmt:
        raise FormatMismatchError(f"format mismatch: {a.fmt} vs {b.fmt}")


def fx_add(a: FxNum, b: FxNum) -> FxNum:
    _check(a, b)
    return FxNum(fit_raw(a.raw + b.raw, a.fmt), a.fmt)


def fx_sub(a: FxNum, b: FxNum) -> FxNum:
    _check(a, b)
    return FxNum(fit_raw(a.raw - b.raw, a.fmt), a.fmt)


def fx_mul(a: FxNum, b: FxNum) -> FxNum:
    """Exact 2W-bit product, rounded and overflow-handled back to the format."""
    _check(a, b)
    fmt = a.fmt
    raw = round_quotient(a.raw * b.raw, 1 << fmt.frac_bits, fmt.rounding)
    return FxNum(fit_raw(raw, fmt), fmt)


def fx_zero(fmt: FixedPointFormat) -> FxNum:
    return FxNum(0, fmt)


def grid(fmt: FixedPointFormat, lo: FxNum | None = None, hi: FxNum | None = None):
    """All grid points of ``fmt`` between ``lo`` and ``hi`` inclusive, ascending."""
    lo_raw = fmt.min_raw if lo is None else lo.raw
    hi_raw = fmt.max_raw if hi is None else hi.raw
    return [FxNum(r, fmt) for r in range(lo_raw, hi_raw + 1)]
