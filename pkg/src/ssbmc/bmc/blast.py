"""Tseitin bit-blasting of bit-vector expressions to CNF, and DIMACS export.

Literals are DIMACS integers. Variable 1 is pinned true by a unit clause and
doubles as the constant: ``T = 1``, ``F = -1``. Gates fold constants and are
structurally hashed, so multiplying by a constant only instantiates adders
for the constant's set bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO

from .bitvec import BitVecExpr, topo_order

T, F = 1, -1


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list
    # symbol name -> literals of its bits, LSB first
    symbols: dict = field(default_factory=dict)
    # variable -> (time step, input index, bit position)
    annotations: dict = field(default_factory=dict)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)


class Blaster:
    def __init__(self):
        self.num_vars = 1
        self.clauses = [[T]]
        self.symbols: dict[str, list[int]] = {}
        self._and: dict = {}
        self._xor: dict = {}
        self._maj: dict = {}
        self._mux: dict = {}
        # id(node) -> (node, bits); holding the node keeps its id from being reused
        self._bits: dict[int, tuple] = {}

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    # gates --------------------------------------------------------------
    def and2(self, a: int, b: int) -> int:
        if a == F or b == F or a == -b:
            return F
        if a == T or a == b:
            return b
        if b == T:
            return a
        key = (a, b) if a < b else (b, a)
        v = self._and.get(key)
        if v is None:
            v = self.new_var()
            self.clauses += [[-v, a], [-v, b], [v, -a, -b]]
            self._and[key] = v
        return v

    def or2(self, a: int, b: int) -> int:
        return -self.and2(-a, -b)

    def xor2(self, a: int, b: int) -> int:
        if a == F:
            return b
        if b == F:
            return a
        if a == T:
            return -b
        if b == T:
            return -a
        if a == b:
            return F
        if a == -b:
            return T
        flip = (a < 0) != (b < 0)
        a, b = abs(a), abs(b)
        key = (a, b) if a < b else (b, a)
        v = self._xor.get(key)
        if v is None:
            v = self.new_var()
            self.clauses += [[-v, a, b], [-v, -a, -b], [v, -a, b], [v, a, -b]]
            self._xor[key] = v
        return -v if flip else v

    def maj3(self, a: int, b: int, c: int) -> int:
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            if x == F:
                return self.and2(y, z)
            if x == T:
                return self.or2(y, z)
        if a == b or a == c:
            return a
        if b == c:
            return b
        if a == -b:
            return c
        if a == -c:
            return b
        if b == -c:
            return a
        key = tuple(sorted((a, b, c)))
        v = self._maj.get(key)
        if v is None:
            v = self.new_var()
            self.clauses += [[-v, a, b], [-v, a, c], [-v, b, c],
                             [v, -a, -b], [v, -a, -c], [v, -b, -c]]
            self._maj[key] = v
        return v

    def mux(self, s: int, a: int, b: int) -> int:
        """s ? a : b"""
        if s == T or a == b:
            return a
        if s == F:
            return b
        if a == T and b == F:
            return s
        if a == F and b == T:
            return -s
        if a == T:
            return self.or2(s, b)
        if a == F:
            return self.and2(-s, b)
        if b == T:
            return self.or2(-s, a)
        if b == F:
            return self.and2(s, a)
        if s < 0:
            s, a, b = -s, b, a
        key = (s, a, b)
        v = self._mux.get(key)
        if v is None:
            v = self.new_var()
            self.clauses += [[-s, -a, v], [-s, a, -v], [s, -b, v], [s, b, -v],
                             [-a, -b, v], [a, b, -v]]
            self._mux[key] = v
        return v

    # word-level circuits -------------------------------------------------
    def adder(self, a: list, b: list, carry: int = F) -> list:
        out = []
        for x, y in zip(a, b):
            out.append(self.xor2(self.xor2(x, y), carry))
            carry = self.maj3(x, y, carry)
        return out

    def negate(self, a: list) -> list:
        return self.adder([-x for x in a], [F] * len(a), T)

    def multiplier(self, a: list, b: list) -> list:
        """Shift-and-add product modulo 2^w."""
        w = len(a)
        bconst = _const_value(b)
        aconst = _const_value(a)
        if aconst is not None and (bconst is None or _popcount(aconst) < _popcount(bconst)):
            a, b, bconst = b, a, aconst
        negate = False
        if bconst is not None:
            # x * c == -(x * (-c)) mod 2^w; pick the sparser multiplier
            alt = (-bconst) & ((1 << w) - 1)
            if _popcount(alt) + 2 < _popcount(bconst):
                b = [T if (alt >> i) & 1 else F for i in range(w)]
                negate = True
        acc = [F] * w
        for i, bi in enumerate(b):
            if bi == F:
                continue
            partial = [F] * i + [self.and2(a[j], bi) for j in range(w - i)]
            acc = acc[:i] + self.adder(acc[i:], partial[i:])
        return self.negate(acc) if negate else acc

    def signed_gt(self, a: list, b: list) -> int:
        a = a[:-1] + [-a[-1]]
        b = b[:-1] + [-b[-1]]
        gt = F
        for x, y in zip(a, b):
            # higher bits dominate: walk LSB to MSB
            diff = self.xor2(x, y)
            gt = self.mux(diff, x, gt)
        return gt

    def equal(self, a: list, b: list) -> int:
        r = T
        for x, y in zip(a, b):
            r = self.and2(r, -self.xor2(x, y))
        return r

    # expressions ---------------------------------------------------------
    def blast(self, root: BitVecExpr) -> list:
        bits = self._bits
        for node in topo_order(root):
            if id(node) in bits:
                continue
            bits[id(node)] = (node, self._node(node, [bits[id(a)][1] for a in node.args]))
        return bits[id(root)][1]

    def _node(self, node: BitVecExpr, ch: list) -> list:
        k, w = node.kind, node.width
        if k == "const":
            return [T if (node.value >> i) & 1 else F for i in range(w)]
        if k == "input":
            if node.name in self.symbols:
                existing = self.symbols[node.name]
                if len(existing) != w:
                    raise ValueError(f"symbol {node.name} used with two widths")
                return existing
            v = [self.new_var() for _ in range(w)]
            self.symbols[node.name] = v
            return v
        if k == "add":
            return self.adder(ch[0], ch[1])
        if k == "mul":
            return self.multiplier(ch[0], ch[1])
        if k == "neg":
            return self.negate(ch[0])
        if k == "extract":
            return ch[0][node.value:node.value + w]
        if k == "sext":
            return ch[0] + [ch[0][-1]] * (w - len(ch[0]))
        if k == "concat":
            return ch[1] + ch[0]
        if k == "sgt":
            return [self.signed_gt(ch[0], ch[1])]
        if k == "eq":
            return [self.equal(ch[0], ch[1])]
        if k == "and":
            return [self.and2(x, y) for x, y in zip(ch[0], ch[1])]
        if k == "or":
            return [self.or2(x, y) for x, y in zip(ch[0], ch[1])]
        if k == "not":
            return [-x for x in ch[0]]
        if k == "ite":
            s = ch[0][0]
            return [self.mux(s, x, y) for x, y in zip(ch[1], ch[2])]
        raise ValueError(f"unknown node kind {k}")

    def formula(self, assertion: int) -> CnfFormula:
        clauses = list(self.clauses)
        clauses.append([assertion])
        return CnfFormula(self.num_vars, clauses, dict(self.symbols))


def _const_value(bits: list):
    v = 0
    for i, x in enumerate(bits):
        if x == T:
            v |= 1 << i
        elif x != F:
            return None
    return v


def _popcount(x: int) -> int:
    return bin(x).count("1")


def bitblast(e: BitVecExpr) -> CnfFormula:
    """Equisatisfiable CNF asserting the width-1 expression ``e``."""
    if e.width != 1:
        raise ValueError(f"can only assert width-1 expressions, got width {e.width}")
    b = Blaster()
    (root,) = b.blast(e)
    return b.formula(root)


def export_dimacs(f: CnfFormula, sink: IO[str]) -> None:
    """Write ``f`` in DIMACS CNF; input-bit annotations go into comment lines."""
    for var in sorted(f.annotations):
        step, idx, bit = f.annotations[var]
        sink.write(f"c input {var} u({step})[{idx}] bit {bit}\n")
    sink.write(f"p cnf {f.num_vars} {f.num_clauses}\n")
    for clause in f.clauses:
        sink.write(" ".join(map(str, clause)) + " 0\n")


def read_dimacs(source: IO[str]) -> CnfFormula:
    """Parse DIMACS CNF (annotation comments are restored when present)."""
    num_vars = None
    clauses, current, annotations = [], [], {}
    for line in source:
        line = line.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 6 and parts[1] == "input":
                step_idx = parts[3]
                step = int(step_idx[2:step_idx.index(")")])
                idx = int(step_idx[step_idx.index("[") + 1:-1])
                annotations[int(parts[2])] = (step, idx, int(parts[5]))
            continue
        if line.startswith("p"):
            _, fmt, nv, _nc = line.split()
            if fmt != "cnf":
                raise ValueError(f"not a CNF file: {line}")
            num_vars = int(nv)
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    if num_vars is None:
        raise ValueError("missing DIMACS header")
    return CnfFormula(num_vars, clauses, annotations=annotations)
