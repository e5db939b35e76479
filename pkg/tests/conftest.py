import random
from fractions import Fraction

from ssbmc.fixedpoint import FixedPointFormat
from ssbmc.rational import RationalMatrix
from ssbmc.statespace import StateSpaceSystem


def random_fraction(rng: random.Random, lo=-2, hi=2, den=64) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den - 1), den)


def random_matrix(rng, rows, cols, den=None, mag=2, zero_p=0.2):
    """Random rational matrix; entries are zero with probability ``zero_p``."""
    out = []
    for _ in range(rows):
        row = []
        for _ in range(cols):
            if rng.random() < zero_p:
                row.append(Fraction(0))
            else:
                d = den or rng.choice([1, 2, 3, 4, 5, 7, 8, 10, 16, 100])
                row.append(Fraction(rng.randint(-mag * d, mag * d), d))
        out.append(row)
    return out


def random_siso(rng, n, fmt: FixedPointFormat, coeff_den=100):
    """SISO system with decimal coefficients inside the format range and grid input bounds."""
    span = fmt.max_value
    def coeff():
        return Fraction(rng.randint(int(-span * coeff_den), int(span * coeff_den)), coeff_den)
    A = RationalMatrix([[coeff() for _ in range(n)] for _ in range(n)])
    B = RationalMatrix([[coeff()] for _ in range(n)])
    C = RationalMatrix([[coeff() for _ in range(n)]])
    D = RationalMatrix([[coeff() if rng.random() < 0.3 else Fraction(0)]])
    lo_raw = rng.randint(fmt.min_raw, 0)
    hi_raw = rng.randint(max(lo_raw, 0), fmt.max_raw)
    return StateSpaceSystem(A, B, C, D, input_lo=[lo_raw * fmt.lsb], input_hi=[hi_raw * fmt.lsb])


def circuit_mismatches(fmt: FixedPointFormat, op: str) -> list:
    """Blast ``op`` on two symbolic words and compare every operand pair with fixedpoint.

    The CNF is solved by an external solver under assumptions fixing both
    operands; the output bits are read back from its model.
    """
    import itertools
    from pysat.solvers import Minisat22
    from ssbmc.bmc import bitvec as bv
    from ssbmc.bmc.blast import Blaster
    from ssbmc.bmc.encode import fx_add_expr, fx_mul_expr, fx_sub_expr
    from ssbmc.fixedpoint import fx_add, fx_mul, fx_sub, grid

    build = {"add": fx_add_expr, "sub": fx_sub_expr, "mul": fx_mul_expr}[op]
    ref = {"add": fx_add, "sub": fx_sub, "mul": fx_mul}[op]
    W = fmt.width
    a, b = bv.input_symbol("a", W), bv.input_symbol("b", W)
    blaster = Blaster()
    out = blaster.blast(build(a, b, fmt))
    cnf = blaster.formula(1)
    la, lb = cnf.symbols["a"], cnf.symbols["b"]
    bad = []
    with Minisat22(bootstrap_with=cnf.clauses) as s:
        for x, y in itertools.product(list(grid(fmt)), repeat=2):
            assume = [l if (x.raw >> i) & 1 else -l for i, l in enumerate(la)]
            assume += [l if (y.raw >> i) & 1 else -l for i, l in enumerate(lb)]
            assert s.solve(assumptions=assume)
            model = set(s.get_model())
            # var 1 is pinned true, so constant bits read back correctly too
            raw = sum(1 << i for i, l in enumerate(out) if l in model)
            raw = raw - (1 << W) if raw >> (W - 1) else raw
            if raw != ref(x, y).raw:
                bad.append((x.raw, y.raw, raw, ref(x, y).raw))
    return bad


# acceptance lines collected by tests/test_acceptance.py, echoed after the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
