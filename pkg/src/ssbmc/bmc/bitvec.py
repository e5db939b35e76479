"""Bit-vector expression DAG.

Nodes are immutable; values are two's-complement bit strings of a fixed
width. Arithmetic is modulo 2^width; comparisons are signed and yield
width-1 results.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, eq=False)
class BitVecExpr:
    kind: str
    width: int
    args: tuple = ()
    value: int = 0      # constant: unsigned bit pattern; extract: low bit index
    name: str = ""      # input-symbol name

    def __repr__(self):
        if self.kind == "const":
            return f"bv{self.width}({self.value})"
        if self.kind == "input":
            return f"{self.name}:{self.width}"
        return f"({self.kind}:{self.width} {' '.join(map(repr, self.args))})"

    def evaluate(self, env: dict) -> int:
        """Unsigned value under ``env`` (symbol name -> signed or unsigned int)."""
        vals: dict[int, int] = {}
        for node in topo_order(self):
            vals[id(node)] = _eval_node(node, [vals[id(a)] for a in node.args], env)
        return vals[id(self)]


def topo_order(root: BitVecExpr) -> list[BitVecExpr]:
    """Children-before-parents ordering of the DAG below ``root``."""
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for a in reversed(node.args):
            if id(a) not in seen:
                stack.append((a, False))
    return order


def _eval_node(node: BitVecExpr, ev: list, env: dict) -> int:
    k = node.kind
    if k == "const":
        r = node.value
    elif k == "input":
        r = env[node.name]
    elif k == "add":
        r = ev[0] + ev[1]
    elif k == "mul":
        r = ev[0] * ev[1]
    elif k == "neg":
        r = -ev[0]
    elif k == "extract":
        r = ev[0] >> node.value
    elif k == "sext":
        w = node.args[0].width
        r = ev[0] - (1 << w) if ev[0] >> (w - 1) else ev[0]
    elif k == "concat":
        r = (ev[0] << node.args[1].width) | ev[1]
    elif k == "sgt":
        r = int(signed(ev[0], node.args[0].width) > signed(ev[1], node.args[1].width))
    elif k == "eq":
        r = int(ev[0] == ev[1])
    elif k == "and":
        r = ev[0] & ev[1]
    elif k == "or":
        r = ev[0] | ev[1]
    elif k == "not":
        r = ~ev[0]
    elif k == "ite":
        r = ev[1] if ev[0] else ev[2]
    else:
        raise ValueError(f"unknown node kind {k}")
    return r & ((1 << node.width) - 1)


def signed(u: int, width: int) -> int:
    return u - (1 << width) if u >> (width - 1) else u


def const(value: int, width: int) -> BitVecExpr:
    if width < 1:
        raise ValueError("width must be positive")
    return BitVecExpr("const", width, value=value & ((1 << width) - 1))


def input_symbol(name: str, width: int) -> BitVecExpr:
    return BitVecExpr("input", width, name=name)


TRUE = const(1, 1)
FALSE = const(0, 1)


def _same(a, b, op):
    if a.width != b.width:
        raise ValueError(f"{op}: width mismatch {a.width} vs {b.width}")


def add(a, b):
    _same(a, b, "add")
    return BitVecExpr("add", a.width, (a, b))


def mul(a, b):
    _same(a, b, "mul")
    return BitVecExpr("mul", a.width, (a, b))


def neg(a):
    return BitVecExpr("neg", a.width, (a,))


def sub(a, b):
    return add(a, neg(b))


def extract(a, hi: int, lo: int):
    """Bits hi..lo inclusive."""
    if not 0 <= lo <= hi < a.width:
        raise ValueError(f"bad extract [{hi}:{lo}] of width {a.width}")
    return BitVecExpr("extract", hi - lo + 1, (a,), value=lo)


def sext(a, width: int):
    if width < a.width:
        raise ValueError("sign extension cannot shrink")
    if width == a.width:
        return a
    return BitVecExpr("sext", width, (a,))


def concat(hi, lo):
    return BitVecExpr("concat", hi.width + lo.width, (hi, lo))


def shl_const(a, s: int):
    """a * 2^s with s zero bits appended (width grows by s)."""
    return a if s == 0 else concat(a, const(0, s))


def sgt(a, b):
    _same(a, b, "sgt")
    return BitVecExpr("sgt", 1, (a, b))


def eq(a, b):
    _same(a, b, "eq")
    return BitVecExpr("eq", 1, (a, b))


def and_(a, b):
    _same(a, b, "and")
    return BitVecExpr("and", a.width, (a, b))


def or_(a, b):
    _same(a, b, "or")
    return BitVecExpr("or", a.width, (a, b))


def not_(a):
    return BitVecExpr("not", a.width, (a,))


def ite(c, a, b):
    if c.width != 1:
        raise ValueError("ite condition must have width 1")
    _same(a, b, "ite")
    return BitVecExpr("ite", a.width, (c, a, b))


def all_of(bits):
    bits = list(bits)
    if not bits:
        return TRUE
    acc = bits[0]
    for b in bits[1:]:
        acc = and_(acc, b)
    return acc


def any_of(bits):
    bits = list(bits)
    if not bits:
        return FALSE
    acc = bits[0]
    for b in bits[1:]:
        acc = or_(acc, b)
    return acc
