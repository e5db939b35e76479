"""Reader and writer for the MATLAB-style system description files.

Grammar::

    file      = { statement }
    statement = ident { "." ident } "=" ( number | matrix ) ";"
    matrix    = "[" row { ";" row } "]"
    row       = number { ( "," | whitespace ) number }
    number    = [ "+" | "-" ] ( digits [ "." [ digits ] ] | "." digits )

``%`` starts a comment running to the end of the line. Numbers are read as
exact rationals. Example::

    A = [0 1; -0.5 1];
    B = [0; 1];
    C = [1 0];
    D = [0];
    implementation.int_bits = 2;
    implementation.frac_bits = 6;
    error.bound = 0.25;   % needed for the quantization-error property
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .fixedpoint import FixedPointFormat
from .rational import RationalMatrix
from .statespace import StateSpaceSystem

MATRIX_KEYS = ("A", "B", "C", "D", "K")
SCALAR_KEYS = ("implementation.int_bits", "implementation.frac_bits", "error.bound", "bound")
VECTOR_KEYS = ("inputs.min", "inputs.max", "states.initial")
KNOWN_KEYS = MATRIX_KEYS + SCALAR_KEYS + VECTOR_KEYS
REQUIRED_KEYS = ("A", "B", "C", "D", "implementation.int_bits", "implementation.frac_bits")
DEFAULT_BOUND = 10


class SpecError(ValueError):
    """Problem in a system description, with its source position when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None,
                 source: str = "<spec>"):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        where = source if line is None else f"{source}:{line}:{col}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class SpecFile:
    raw_text: str
    source_name: str = "<spec>"

    @classmethod
    def read(cls, path) -> "SpecFile":
        with open(path, encoding="utf-8") as fh:
            return cls(fh.read(), str(path))


@dataclass(frozen=True)
class ParsedSpec:
    system: StateSpaceSystem
    format: FixedPointFormat
    bound: int = DEFAULT_BOUND
    error_bound: Optional[Fraction] = None


# lexing ---------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<number>[+-]?(?:\d+(?:\.\d*)?|\.\d+))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[.=;\[\],])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int
    spaced: bool  # whitespace or comment immediately before


def _lex(spec: SpecFile) -> list[_Tok]:
    text = spec.raw_text
    toks = []
    pos, line, line_start = 0, 1, 0
    spaced = True
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise SpecError(f"unexpected character {text[pos]!r}", line, col, spec.source_name)
        kind = m.lastgroup
        chunk = m.group()
        if kind in ("ws", "comment"):
            spaced = True
        else:
            toks.append(_Tok(kind if kind != "punct" else chunk, chunk, line, col, spaced))
            spaced = False
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1, spaced))
    return toks


def parse_decimal(text: str) -> Fraction:
    """Exact value of a decimal literal (no binary floating point involved)."""
    sign = -1 if text.startswith("-") else 1
    body = text.lstrip("+-")
    whole, _, frac = body.partition(".")
    digits = (whole or "0") + frac
    return sign * Fraction(int(digits), 10 ** len(frac))


class _Parser:
    def __init__(self, spec: SpecFile):
        self.spec = spec
        self.toks = _lex(spec)
        self.i = 0

    def error(self, msg, tok=None):
        tok = tok or self.toks[self.i]
        return SpecError(msg, tok.line, tok.col, self.spec.source_name)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self, kind: str) -> _Tok:
        tok = self.toks[self.i]
        if tok.kind != kind:
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected {kind!r}, found {found}")
        self.i += 1
        return tok

    def statements(self):
        out = {}
        while self.peek().kind != "eof":
            start = self.peek()
            key = self.take("ident").text
            while self.peek().kind == ".":
                self.take(".")
                key += "." + self.take("ident").text
            self.take("=")
            value = self.matrix() if self.peek().kind == "[" else parse_decimal(self.take("number").text)
            self.take(";")
            if key not in KNOWN_KEYS:
                raise self.error(f"unknown key {key!r}", start)
            if key in out:
                raise self.error(f"duplicate key {key!r}", start)
            out[key] = (value, start)
        return out

    def matrix(self):
        open_tok = self.take("[")
        rows = [self.row()]
        while self.peek().kind == ";":
            self.take(";")
            rows.append(self.row())
        self.take("]")
        width = len(rows[0])
        for r in rows[1:]:
            if len(r) != width:
                raise self.error(f"dimension mismatch: rows of length {width} and {len(r)}", open_tok)
        return rows

    def row(self):
        values = [parse_decimal(self.take("number").text)]
        while True:
            tok = self.peek()
            if tok.kind == ",":
                self.take(",")
                values.append(parse_decimal(self.take("number").text))
            elif tok.kind == "number":
                if not tok.spaced:
                    raise self.error("numbers in a row must be separated by ',' or whitespace")
                values.append(parse_decimal(self.take("number").text))
            else:
                return values


# semantic checks ---------------------------------------------------------------

def _as_matrix(value):
    return RationalMatrix([[value]] if isinstance(value, Fraction) else value)


def _as_vector(value, length, key, tok, spec):
    if isinstance(value, Fraction):
        if key == "states.initial" and length != 1:
            raise _err(f"{key} needs {length} entries, got a scalar", tok, spec)
        return [value] * length
    flat = [x for row in value for x in row]
    if len(value) > 1 and len(value[0]) > 1:
        raise _err(f"{key} must be a vector, got a {len(value)}x{len(value[0])} matrix", tok, spec)
    if len(flat) != length:
        raise _err(f"dimension mismatch: {key} needs {length} entries, got {len(flat)}", tok, spec)
    return flat


def _as_int(value, key, tok, spec) -> int:
    if not isinstance(value, Fraction) or value.denominator != 1:
        raise _err(f"{key} must be an integer", tok, spec)
    return int(value)


def _err(msg, tok, spec):
    return SpecError(msg, tok.line, tok.col, spec.source_name)


def parse_spec(spec: SpecFile | str) -> ParsedSpec:
    if isinstance(spec, str):
        spec = SpecFile(spec)
    stmts = _Parser(spec).statements()
    for key in REQUIRED_KEYS:
        if key not in stmts:
            raise SpecError(f"missing required key {key!r}", source=spec.source_name)

    mats = {k: (_as_matrix(stmts[k][0]), stmts[k][1]) for k in MATRIX_KEYS if k in stmts}
    A, tA = mats["A"]
    n = A.rows
    if A.cols != n:
        raise _err(f"dimension mismatch: A must be square, got {A.rows}x{A.cols}", tA, spec)
    B, tB = mats["B"]
    if B.rows != n:
        raise _err(f"dimension mismatch: B must have {n} rows, got {B.rows}", tB, spec)
    m = B.cols
    C, tC = mats["C"]
    if C.cols != n:
        raise _err(f"dimension mismatch: C must have {n} columns, got {C.cols}", tC, spec)
    p = C.rows
    D, tD = mats["D"]
    if D.shape != (p, m):
        raise _err(f"dimension mismatch: D must be {p}x{m}, got {D.rows}x{D.cols}", tD, spec)
    K = None
    if "K" in mats:
        K, tK = mats["K"]
        if K.shape != (m, n):
            raise _err(f"dimension mismatch: K must be {m}x{n}, got {K.rows}x{K.cols}", tK, spec)

    ib_v, ib_t = stmts["implementation.int_bits"]
    fb_v, fb_t = stmts["implementation.frac_bits"]
    int_bits = _as_int(ib_v, "implementation.int_bits", ib_t, spec)
    frac_bits = _as_int(fb_v, "implementation.frac_bits", fb_t, spec)
    if int_bits < 1:
        raise _err("implementation.int_bits must be at least 1 (it includes the sign bit)", ib_t, spec)
    if frac_bits < 0:
        raise _err("implementation.frac_bits must be non-negative", fb_t, spec)
    if int_bits + frac_bits < 2:
        raise _err("total word length int_bits + frac_bits must be at least 2", ib_t, spec)
    fmt = FixedPointFormat(int_bits, frac_bits)

    x0 = None
    if "states.initial" in stmts:
        v, t = stmts["states.initial"]
        x0 = _as_vector(v, n, "states.initial", t, spec)
    lo = hi = None
    if ("inputs.min" in stmts) != ("inputs.max" in stmts):
        key = "inputs.min" if "inputs.min" in stmts else "inputs.max"
        raise _err("inputs.min and inputs.max must be given together", stmts[key][1], spec)
    if "inputs.min" in stmts:
        (lo_v, lo_t), (hi_v, hi_t) = stmts["inputs.min"], stmts["inputs.max"]
        lo = _as_vector(lo_v, m, "inputs.min", lo_t, spec)
        hi = _as_vector(hi_v, m, "inputs.max", hi_t, spec)
        for a, b in zip(lo, hi):
            if a > b:
                raise _err("inputs.min exceeds inputs.max", lo_t, spec)

    bound = DEFAULT_BOUND
    if "bound" in stmts:
        v, t = stmts["bound"]
        bound = _as_int(v, "bound", t, spec)
        if bound < 1:
            raise _err("bound must be at least 1", t, spec)
    eps = None
    if "error.bound" in stmts:
        v, t = stmts["error.bound"]
        if not isinstance(v, Fraction) or v <= 0:
            raise _err("error.bound must be a positive number", t, spec)
        eps = v

    name = spec.source_name.rsplit("/", 1)[-1]
    if name.endswith(".ss"):
        name = name[:-3]
    system = StateSpaceSystem(A, B, C, D, x0=x0, input_lo=lo, input_hi=hi, K=K, name=name)
    return ParsedSpec(system, fmt, bound, eps)


# writing ----------------------------------------------------------------------

def format_decimal(x: Fraction) -> str:
    """Exact decimal rendering; fails for values without a finite expansion."""
    x = Fraction(x)
    d = x.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        raise ValueError(f"{x} has no finite decimal expansion")
    places = max(twos, fives)
    scaled = abs(x.numerator) * 10 ** places // x.denominator
    sign = "-" if x < 0 else ""
    if places == 0:
        return f"{sign}{scaled}"
    s = str(scaled).rjust(places + 1, "0")
    return f"{sign}{s[:-places]}.{s[-places:]}"


def _fmt_matrix(M) -> str:
    return "[" + "; ".join(" ".join(format_decimal(x) for x in row) for row in M) + "]"


def format_spec(parsed: ParsedSpec) -> str:
    s = parsed.system
    lines = [f"% {s.name}"]
    for key in ("A", "B", "C", "D"):
        lines.append(f"{key} = {_fmt_matrix(getattr(s, key))};")
    if s.K is not None:
        lines.append(f"K = {_fmt_matrix(s.K)};")
    lines.append(f"states.initial = {_fmt_matrix([[v] for v in s.x0])};")
    if s.input_lo is not None:
        lines.append(f"inputs.min = {_fmt_matrix([list(s.input_lo)])};")
        lines.append(f"inputs.max = {_fmt_matrix([list(s.input_hi)])};")
    lines.append(f"implementation.int_bits = {parsed.format.int_bits};")
    lines.append(f"implementation.frac_bits = {parsed.format.frac_bits};")
    if parsed.error_bound is not None:
        lines.append(f"error.bound = {format_decimal(parsed.error_bound)};")
    lines.append(f"bound = {parsed.bound};")
    return "\n".join(lines) + "\n"
