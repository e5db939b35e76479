"""Exact decision procedures: rank, characteristic polynomial, Schur stability."""
from __future__ import annotations

from fractions import Fraction
from math import lcm

from .rational import Polynomial, RationalMatrix


def _integer_rows(M: RationalMatrix) -> list[list[int]]:
    # scaling a row by a nonzero constant preserves rank
    out = []
    for row in M:
        d = lcm(*(x.denominator for x in row))
        out.append([int(x * d) for x in row])
    return out


def bareiss_rank(M: RationalMatrix) -> int:
    """Rank by fraction-free (Bareiss) elimination on an integer-scaled copy."""
    a = _integer_rows(M)
    nrows, ncols = len(a), len(a[0])
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        pr = a[r]
        for i in range(r + 1, nrows):
            ri = a[i]
            f = ri[c]
            for j in range(c + 1, ncols):
                q, rem = divmod(p * ri[j] - f * pr[j], prev)
                assert rem == 0, "Bareiss division not exact"
                ri[j] = q
            ri[c] = 0
        prev = p
        r += 1
    return r


def char_poly(A: RationalMatrix) -> Polynomial:
    """det(zI - A) via the Faddeev-LeVerrier recurrence."""
    if A.rows != A.cols:
        raise ValueError(f"characteristic polynomial of non-square {A.shape} matrix")
    n = A.rows
    c = [Fraction(0)] * (n + 1)
    c[n] = Fraction(1)
    eye = RationalMatrix.identity(n)
    M = RationalMatrix.zeros(n, n)
    for k in range(1, n + 1):
        M = A @ M + eye.scale(c[n - k + 1])
        c[n - k] = -(A @ M).trace() / k
    return Polynomial(c)


def schur_cohn_rows(p: Polynomial) -> list[Polynomial]:
    """Successive reduced polynomials of the Jury / Schur-Cohn table.

    Each row is monic; the table stops early at the first row whose constant
    term has modulus >= 1 (that row is included).
    """
    if p.is_zero():
        raise ValueError("stability of the zero polynomial is undefined")
    if p.degree < 1:
        raise ValueError("polynomial must have degree >= 1")
    rows = [Polynomial(c / p.leading for c in p.coeffs)]
    while rows[-1].degree >= 1:
        a = rows[-1].coeffs
        n = len(a) - 1
        if abs(a[0]) >= 1:
            break
        q = [a[j + 1] - a[0] * a[n - 1 - j] for j in range(n)]
        lead = q[-1]  # 1 - a0^2 > 0
        rows.append(Polynomial(x / lead for x in q))
    return rows


def jury_stable(p: Polynomial) -> bool:
    """True iff every root of ``p`` lies strictly inside the unit circle.

    A row with |a0| >= |an| (the table's singular or failing case) means
    the product of that row's roots has modulus >= 1, so some root is on or
    outside the circle; marginal roots therefore come out unstable.
    """
    return schur_cohn_rows(p)[-1].degree == 0
