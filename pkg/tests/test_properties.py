import random
from fractions import Fraction

import pytest

from conftest import random_matrix
from ssbmc.fixedpoint import FixedPointFormat
from ssbmc.oracle import minor_rank
from ssbmc.properties import (Verdict, check_controllability, check_observability, check_stability,
                              controllability_matrix, observability_matrix)
from ssbmc.rational import RationalMatrix
from ssbmc.statespace import StateSpaceSystem, quantize_system

F = Fraction


def system(A, B=None, C=None, K=None):
    A = RationalMatrix(A)
    n = A.rows
    B = RationalMatrix(B) if B is not None else RationalMatrix.zeros(n, 1)
    C = RationalMatrix(C) if C is not None else RationalMatrix.zeros(1, n)
    D = RationalMatrix.zeros(C.rows, B.cols)
    return StateSpaceSystem(A, B, C, D, K=None if K is None else RationalMatrix(K))


@pytest.mark.parametrize("A,outcome", [
    ([[0]], "holds"),
    ([[1]], "violated"),
    ([[F(1, 2), 0], [0, 2]], "violated"),
    ([[0, 1], [F(-1, 2), 1]], "holds"),
])
def test_stability_examples(A, outcome):
    v = check_stability(system(A))
    assert v.outcome == outcome
    assert v.evidence["characteristic_polynomial"][-1] == "1"


def test_controllability_examples():
    assert check_controllability(system([[0, 1], [0, 0]], [[0], [1]])).holds
    v = check_controllability(system([[1, 0], [0, 1]], [[1], [1]]))
    assert v.outcome == "violated" and v.evidence == {"rank": 1, "required_rank": 2}


def test_square_invertible_b_is_always_controllable():
    rng = random.Random(1)
    for _ in range(20):
        n = rng.randint(1, 3)
        B = RationalMatrix.identity(n).scale(F(rng.randint(1, 9), 4))
        A = random_matrix(rng, n, n)
        assert check_controllability(system(A, B.tolist())).holds


def test_observability_examples():
    assert check_observability(system([[1, 0], [0, 1]], C=[[0, 0]])).outcome == "violated"
    assert check_observability(system([[F(1, 3), 2], [0, 1]], C=[[1, 0], [0, 1]])).holds


def test_quantized_checks_use_quantized_coefficients():
    # 0.996 rounds to 1 in <2,6>: a stable pole moves onto the unit circle
    s = system([[F(996, 1000)]], [[1]], [[1]])
    assert check_stability(s).holds
    q = quantize_system(s, FixedPointFormat(2, 6))
    assert check_stability(q).outcome == "violated"
    # a tiny input gain vanishes entirely
    s2 = system([[F(1, 2)]], [[F(1, 1000)]], [[1]])
    assert check_controllability(s2).holds
    assert check_controllability(quantize_system(s2, FixedPointFormat(2, 6))).outcome == "violated"


def test_closed_loop_stabilises():
    s = system([[F(3, 2)]], [[1]], [[1]], K=[[1]])
    assert check_stability(s).outcome == "violated"
    assert check_stability(s, closed_loop=True).holds


def test_matrices_match_definition():
    A = RationalMatrix([[1, 2], [3, 4]])
    B = RationalMatrix([[1], [0]])
    assert controllability_matrix(A, B) == RationalMatrix([[1, 1], [0, 3]])
    C = RationalMatrix([[0, 1]])
    assert observability_matrix(A, C) == RationalMatrix([[0, 1], [3, 4]])


def test_rank_matches_minors_on_kalman_matrices():
    rng = random.Random(8)
    for _ in range(40):
        n, m = rng.randint(1, 3), rng.randint(1, 2)
        A, B = RationalMatrix(random_matrix(rng, n, n, zero_p=0.5)), RationalMatrix(random_matrix(rng, n, m, zero_p=0.5))
        s = StateSpaceSystem(A, B, RationalMatrix.zeros(1, n), RationalMatrix.zeros(1, m))
        v = check_controllability(s)
        assert v.evidence["rank"] == minor_rank(controllability_matrix(A, B).tolist())


def test_duality_random():
    rng = random.Random(99)
    for _ in range(50):
        n, p = rng.randint(1, 4), rng.randint(1, 2)
        A = RationalMatrix(random_matrix(rng, n, n, zero_p=0.4))
        C = RationalMatrix(random_matrix(rng, p, n, zero_p=0.6))
        obs = check_observability(StateSpaceSystem(A, RationalMatrix.zeros(n, 1), C, RationalMatrix.zeros(p, 1)))
        ctr = check_controllability(StateSpaceSystem(A.T, C.T, RationalMatrix.zeros(1, n), RationalMatrix.zeros(1, p)))
        assert obs.outcome == ctr.outcome
        assert obs.evidence == ctr.evidence


def test_verdict_validation():
    with pytest.raises(ValueError):
        Verdict("liveness", "holds")
    with pytest.raises(ValueError):
        Verdict("stability", "maybe")
