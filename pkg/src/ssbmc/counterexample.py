"""Counterexample record shared by the SAT engine and the brute-force oracle."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class Counterexample:
    inputs: tuple          # u(0..k-1), each a tuple of FxNum
    step: int              # first n with |y_q(n) - y_ref(n)| > eps
    y_ref: Fraction
    y_q: Fraction
    error: Fraction

    def to_json(self) -> dict:
        return {
            "inputs": [
                [{"value": str(v.value), "raw": v.raw} for v in u] for u in self.inputs
            ],
            "violating_step": self.step,
            "y_ref": str(self.y_ref),
            "y_q": str(self.y_q),
            "error": str(self.error),
        }
