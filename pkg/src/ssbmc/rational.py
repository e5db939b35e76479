"""Exact rational matrices and polynomials.

Scalars are :class:`fractions.Fraction`. Both containers are immutable.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence


class RationalMatrix:
    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: Iterable[Iterable]):
        data = tuple(tuple(Fraction(x) for x in row) for row in rows)
        if not data or not data[0]:
            raise ValueError("matrix must have at least one row and one column")
        ncols = len(data[0])
        for row in data:
            if len(row) != ncols:
                raise ValueError("ragged matrix rows")
        self._data = data
        self.rows = len(data)
        self.cols = ncols

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def column(cls, values: Sequence) -> "RationalMatrix":
        return cls([[v] for v in values])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> tuple:
        return self._data[i]

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    def __iter__(self):
        return iter(self._data)

    def __eq__(self, other):
        return isinstance(other, RationalMatrix) and self._data == other._data

    def __hash__(self):
        return hash(self._data)

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in r) for r in self._data)
        return f"RationalMatrix([{body}])"

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix(zip(*self._data))

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        ot = list(zip(*other._data))
        return RationalMatrix(
            [[sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in ot] for r in self._data])

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RationalMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RationalMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def scale(self, c) -> "RationalMatrix":
        c = Fraction(c)
        return RationalMatrix([[c * a for a in r] for r in self._data])

    def hstack(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.rows != other.rows:
            raise ValueError("row count mismatch")
        return RationalMatrix([r + s for r, s in zip(self._data, other._data)])

    def vstack(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.cols:
            raise ValueError("column count mismatch")
        return RationalMatrix(self._data + other._data)

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._data for x in r)

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise ValueError("trace of non-square matrix")
        return sum((self._data[i][i] for i in range(self.rows)), Fraction(0))


class Polynomial:
    """Polynomial with exact rational coefficients in ascending degree order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, z):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({[str(c) for c in self.coeffs]})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for d in range(self.degree, -1, -1):
            c = self.coeffs[d]
            if c == 0:
                continue
            mono = "" if d == 0 else ("z" if d == 1 else f"z^{d}")
            if mono and abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}{'*' + mono if mono else ''}"
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def reciprocal(self) -> "Polynomial":
        """z^n p(1/z) for a polynomial of degree n."""
        return Polynomial(reversed(self.coeffs))
