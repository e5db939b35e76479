"""Stability, controllability and observability of a (quantized) system.

FWL effects enter through the coefficients only: each check rationalizes the
quantized matrices and then works in exact arithmetic.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .exact import bareiss_rank, char_poly, jury_stable, schur_cohn_rows
from .rational import RationalMatrix
from .statespace import QuantizedSystem, StateSpaceSystem, close_loop

PROPERTIES = ("stability", "controllability", "observability", "quantization_error")
OUTCOMES = ("holds", "violated", "unknown")


@dataclass
class Verdict:
    property: str
    outcome: str
    evidence: dict = field(default_factory=dict)
    counterexample: Optional[object] = None
    wall_time: float = 0.0

    def __post_init__(self):
        if self.property not in PROPERTIES:
            raise ValueError(f"unknown property {self.property!r}")
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")

    @property
    def holds(self) -> bool:
        return self.outcome == "holds"


def _matrices(sys) -> tuple[RationalMatrix, RationalMatrix, RationalMatrix]:
    if isinstance(sys, QuantizedSystem):
        return sys.rational("A"), sys.rational("B"), sys.rational("C")
    if isinstance(sys, StateSpaceSystem):
        return sys.A, sys.B, sys.C
    raise TypeError(f"expected a state-space system, got {type(sys).__name__}")


def controllability_matrix(A: RationalMatrix, B: RationalMatrix) -> RationalMatrix:
    blocks = B
    term = B
    for _ in range(A.rows - 1):
        term = A @ term
        blocks = blocks.hstack(term)
    return blocks


def observability_matrix(A: RationalMatrix, C: RationalMatrix) -> RationalMatrix:
    blocks = C
    term = C
    for _ in range(A.rows - 1):
        term = term @ A
        blocks = blocks.vstack(term)
    return blocks


def check_stability(sys, closed_loop: bool = False) -> Verdict:
    t0 = time.perf_counter()
    if closed_loop:
        sys = close_loop(sys)
    A, _, _ = _matrices(sys)
    p = char_poly(A)
    rows = schur_cohn_rows(p)
    stable = jury_stable(p)
    evidence = {
        "characteristic_polynomial": [str(c) for c in p.coeffs],
        "polynomial": str(p),
        "jury_rows": len(rows),
    }
    return Verdict("stability", "holds" if stable else "violated", evidence,
                   wall_time=time.perf_counter() - t0)


def _rank_verdict(prop, M, n, t0):
    r = bareiss_rank(M)
    return Verdict(prop, "holds" if r == n else "violated",
                   {"rank": r, "required_rank": n}, wall_time=time.perf_counter() - t0)


def check_controllability(sys, closed_loop: bool = False) -> Verdict:
    t0 = time.perf_counter()
    if closed_loop:
        sys = close_loop(sys)
    A, B, _ = _matrices(sys)
    return _rank_verdict("controllability", controllability_matrix(A, B), A.rows, t0)


def check_observability(sys, closed_loop: bool = False) -> Verdict:
    t0 = time.perf_counter()
    if closed_loop:
        sys = close_loop(sys)
    A, _, C = _matrices(sys)
    return _rank_verdict("observability", observability_matrix(A, C), A.rows, t0)
