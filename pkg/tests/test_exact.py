import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from conftest import random_matrix
from ssbmc.exact import bareiss_rank, char_poly, jury_stable, schur_cohn_rows
from ssbmc.oracle import leibniz_det, minor_rank, numeric_stability_oracle
from ssbmc.rational import Polynomial, RationalMatrix

F = Fraction


def M(rows):
    return RationalMatrix(rows)


def test_rank_examples():
    assert bareiss_rank(M([[1, 2], [2, 4]])) == 1
    for n in range(1, 5):
        assert bareiss_rank(RationalMatrix.identity(n)) == n
    assert bareiss_rank(RationalMatrix.zeros(3, 2)) == 0


def test_rank_with_fractions():
    assert bareiss_rank(M([[F(1, 3), F(2, 3)], [F(1, 2), 1]])) == 1
    assert bareiss_rank(M([[F(1, 3), F(2, 3)], [F(1, 2), F(1, 7)]])) == 2


def test_char_poly_examples():
    assert char_poly(M([[0, 1], [F(-1, 2), 1]])) == Polynomial([F(1, 2), -1, 1])
    assert char_poly(M([[F(3, 7)]])) == Polynomial([F(-3, 7), 1])
    assert char_poly(RationalMatrix.zeros(3, 3)) == Polynomial([0, 0, 0, 1])


def test_char_poly_rejects_non_square():
    with pytest.raises(ValueError):
        char_poly(RationalMatrix.zeros(2, 3))


def test_jury_examples():
    assert jury_stable(Polynomial([F(-1, 2), 1]))
    assert not jury_stable(Polynomial([F(1, 2), F(-3, 2), 1]))
    assert jury_stable(Polynomial([F(-2, 25), F(1, 5), 1]))


@pytest.mark.parametrize("coeffs", [
    [1, 0, 1],          # roots +-i, on the circle
    [-1, 1],            # z - 1
    [1, 1],             # z + 1
    [1, 0, 0, 1],       # z^3 + 1
    [0, 0, 1],          # z^2: stable, zero constant term all the way down
])
def test_jury_boundary_and_degenerate(coeffs):
    p = Polynomial(coeffs)
    expected = all(abs(complex(r)) < 1 for r in sympy.Poly(list(reversed(coeffs)), sympy.Symbol("z")).nroots())
    assert jury_stable(p) == expected


def test_jury_rejects_constants():
    with pytest.raises(ValueError):
        schur_cohn_rows(Polynomial([]))
    with pytest.raises(ValueError):
        schur_cohn_rows(Polynomial([3]))


def test_jury_ignores_leading_scale():
    p = Polynomial([F(-1, 5), F(1, 10), 1])
    assert jury_stable(p) == jury_stable(Polynomial([c * -7 for c in p.coeffs]))


def test_rank_matches_minor_oracle_random():
    rng = random.Random(11)
    for _ in range(150):
        r, c = rng.randint(1, 4), rng.randint(1, 4)
        rows = random_matrix(rng, r, c, zero_p=rng.choice([0.1, 0.5, 0.8]))
        if rng.random() < 0.3 and r > 1:
            rows[-1] = [a * 3 - b for a, b in zip(rows[0], rows[1 % r])]
        assert bareiss_rank(M(rows)) == minor_rank(rows)


def test_char_poly_constant_term_is_signed_determinant():
    rng = random.Random(5)
    for _ in range(60):
        n = rng.randint(1, 4)
        rows = random_matrix(rng, n, n)
        p = char_poly(M(rows))
        assert p.coeffs[-1] == 1 and p.degree == n
        assert p.coeffs[0] == (-1) ** n * leibniz_det(rows)
        assert -p.coeffs[n - 1] == M(rows).trace()


def test_char_poly_matches_sympy():
    rng = random.Random(7)
    z = sympy.Symbol("z")
    for _ in range(30):
        n = rng.randint(1, 4)
        rows = random_matrix(rng, n, n)
        sp = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in rows])
        ref = sympy.Poly(sp.charpoly(z).as_expr(), z).all_coeffs()[::-1]
        assert [F(int(c.p), int(c.q)) for c in ref] == list(char_poly(M(rows)).coeffs)


def test_cayley_hamilton():
    rng = random.Random(3)
    for _ in range(20):
        n = rng.randint(1, 4)
        A = M(random_matrix(rng, n, n))
        p = char_poly(A)
        acc = RationalMatrix.zeros(n, n)
        power = RationalMatrix.identity(n)
        for c in p.coeffs:
            acc = acc + power.scale(c)
            power = power @ A
        assert acc.is_zero()


def test_jury_agrees_with_numeric_oracle_random():
    rng = random.Random(2024)
    checked = 0
    while checked < 150:
        n = rng.randint(1, 4)
        rows = random_matrix(rng, n, n, den=rng.choice([4, 10, 16]), mag=1)
        num = numeric_stability_oracle(rows)
        if num == "near-boundary":
            continue
        assert jury_stable(char_poly(M(rows))) == (num == "stable")
        checked += 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(min_value=-1, max_value=1, max_denominator=20), min_size=1, max_size=4))
def test_jury_on_polynomials_built_from_roots(roots):
    p = Polynomial([1])
    for r in roots:  # multiply by (z - r)
        c = [F(0)] + list(p.coeffs)
        for i, a in enumerate(p.coeffs):
            c[i] -= r * a
        p = Polynomial(c)
    assert jury_stable(p) == all(abs(r) < 1 for r in roots)
