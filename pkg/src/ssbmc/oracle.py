"""Brute-force reference verifiers.

Nothing here touches the SAT engine or the exact decision procedures; the
checks rely only on concrete fixed-point simulation, plain enumeration and
high-precision floating point, so they can referee those components.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Optional

import mpmath

from .counterexample import Counterexample
from .fixedpoint import FixedPointFormat, FxNum
from .statespace import QuantizedSystem, reference_system, step_quantized, widen

DEFAULT_CAP = 1 << 20
BOUNDARY_BAND = 1e-6


class OracleCapError(ValueError):
    """The input space is too large to enumerate."""


@dataclass
class OracleResult:
    outcome: str                    # "holds" or "violated"
    counterexample: Optional[Counterexample]
    explored: int                   # simulated time steps


def search_space(qsys: QuantizedSystem, k: int) -> int:
    per_step = prod(qsys.input_hi[i].raw - qsys.input_lo[i].raw + 1 for i in range(qsys.n_inputs))
    return per_step ** k


def enumerate_verify(qsys: QuantizedSystem, ref_fmt: FixedPointFormat, k: int, eps,
                     cap: int = DEFAULT_CAP) -> OracleResult:
    """Exhaustive check of |y_q(n) - y_ref(n)| <= eps over every grid input sequence.

    Sequences are visited in lexicographic order with shared prefixes
    simulated once; the reported violation is the lexicographically first
    violating sequence (unconstrained suffix steps take their lower bounds).
    """
    eps = Fraction(eps)
    size = search_space(qsys, k)
    if size > cap:
        raise OracleCapError(f"{size} input sequences exceed the enumeration cap {cap}")
    ref = reference_system(qsys, ref_fmt)
    choices = list(itertools.product(*[
        [FxNum(r, qsys.fmt) for r in range(qsys.input_lo[i].raw, qsys.input_hi[i].raw + 1)]
        for i in range(qsys.n_inputs)]))
    wide = {u: tuple(widen(v, ref.fmt) for v in u) for u in choices}
    lowest = choices[0]
    explored = 0

    def dfs(n, xq, xr, prefix):
        nonlocal explored
        for u in choices:
            explored += 1
            xq_next, yq = step_quantized(qsys, xq, u)
            xr_next, yr = step_quantized(ref, xr, wide[u])
            err = abs(yq[0].value - yr[0].value)
            if err > eps:
                seq = prefix + [u] + [lowest] * (k - n - 1)
                return Counterexample(tuple(seq), n, yr[0].value, yq[0].value, err)
            if n + 1 < k:
                found = dfs(n + 1, xq_next, xr_next, prefix + [u])
                if found is not None:
                    return found
        return None

    cex = dfs(0, tuple(qsys.x0), tuple(ref.x0), [])
    return OracleResult("holds" if cex is None else "violated", cex, explored)


def numeric_stability_oracle(A, dps: int = 50) -> str:
    """'stable', 'unstable' or 'near-boundary' from 50-digit eigenvalue moduli."""
    rows = [[Fraction(x) for x in row] for row in A]
    with mpmath.workdps(dps):
        M = mpmath.matrix([[mpmath.mpf(x.numerator) / x.denominator for x in row] for row in rows])
        eig = mpmath.eig(M, left=False, right=False)
        if isinstance(eig, tuple):  # 1x1 input comes back with eigenvectors attached
            eig = eig[0]
        moduli = [abs(z) for z in eig]
        if any(abs(r - 1) <= BOUNDARY_BAND for r in moduli):
            return "near-boundary"
        return "stable" if all(r < 1 for r in moduli) else "unstable"


def leibniz_det(M) -> Fraction:
    """Determinant straight from the permutation expansion."""
    rows = [[Fraction(x) for x in row] for row in M]
    n = len(rows)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = Fraction(-1 if inversions % 2 else 1)
        for i, j in enumerate(perm):
            term *= rows[i][j]
            if term == 0:
                break
        total += term
    return total


def minor_rank(M) -> int:
    """Largest r with a nonvanishing r x r minor."""
    rows = [list(r) for r in M]
    nr, nc = len(rows), len(rows[0])
    for r in range(min(nr, nc), 0, -1):
        for ri in itertools.combinations(range(nr), r):
            for ci in itertools.combinations(range(nc), r):
                if leibniz_det([[rows[i][j] for j in ci] for i in ri]) != 0:
                    return r
    return 0
