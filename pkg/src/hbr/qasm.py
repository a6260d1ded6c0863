"""OpenQASM 2.0 subset reader/writer.

Supported: the standard header, one ``qreg``, at most one ``creg``, the gate
names of :class:`~hbr.circuit.GateKind` (``mcx``/``mcz`` take any number of
qubits), ``barrier`` and terminal ``measure q[i] -> c[j];``. Angles may use
``pi``, numeric literals and ``+ - * /`` with parentheses.
"""
from __future__ import annotations

import math
import re

from .circuit import Circuit, CircuitError, Gate, GateKind

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'

_BY_NAME = {k.value: k for k in GateKind}


class QasmError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<op>[\[\](){};,+\-*/])
    """,
    re.VERBOSE,
)


class _Tokens:
    def __init__(self, text: str):
        self.items: list[tuple[str, str, int, int]] = []
        line, col, pos = 1, 1, 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise QasmError(f"unexpected character {text[pos]!r}", line, col)
            kind, value = m.lastgroup, m.group()
            if kind == "nl":
                line, col = line + 1, 1
            else:
                if kind not in ("ws", "comment"):
                    self.items.append((kind, value, line, col))
                col += len(value)
            pos = m.end()
        self.i = 0
        self.eof = ("eof", "", line, col)

    def peek(self):
        return self.items[self.i] if self.i < len(self.items) else self.eof

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str, kind: str | None = None):
        tok = self.next()
        if tok[1] != value or (kind and tok[0] != kind):
            raise QasmError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2], tok[3])
        return tok

    def expect_kind(self, kind: str):
        tok = self.next()
        if tok[0] != kind:
            raise QasmError(f"expected {kind}, found {tok[1] or 'end of input'!r}", tok[2], tok[3])
        return tok


def _expr(toks: _Tokens) -> float:
    value = _term(toks)
    while toks.peek()[1] in ("+", "-"):
        op = toks.next()[1]
        rhs = _term(toks)
        value = value + rhs if op == "+" else value - rhs
    return value


def _term(toks: _Tokens) -> float:
    value = _unary(toks)
    while toks.peek()[1] in ("*", "/"):
        op = toks.next()
        rhs = _unary(toks)
        if op[1] == "/":
            if rhs == 0:
                raise QasmError("division by zero", op[2], op[3])
            value /= rhs
        else:
            value *= rhs
    return value


def _unary(toks: _Tokens) -> float:
    if toks.peek()[1] == "-":
        toks.next()
        return -_unary(toks)
    if toks.peek()[1] == "+":
        toks.next()
        return _unary(toks)
    tok = toks.next()
    if tok[0] == "number":
        return float(tok[1])
    if tok[0] == "ident" and tok[1] == "pi":
        return math.pi
    if tok[1] == "(":
        value = _expr(toks)
        toks.expect(")")
        return value
    raise QasmError(f"bad expression near {tok[1] or 'end of input'!r}", tok[2], tok[3])


def _index(toks: _Tokens, reg: str, size: int, what: str) -> int:
    tok = toks.expect_kind("ident")
    if tok[1] != reg:
        raise QasmError(f"unknown {what} register {tok[1]!r}", tok[2], tok[3])
    toks.expect("[")
    num = toks.expect_kind("number")
    toks.expect("]")
    if not num[1].isdigit():
        raise QasmError("register index must be an integer", num[2], num[3])
    idx = int(num[1])
    if idx >= size:
        raise QasmError(f"{what} index {idx} out of range for {reg}[{size}]", num[2], num[3])
    return idx


def _register(toks: _Tokens) -> tuple[str, int]:
    name = toks.expect_kind("ident")[1]
    toks.expect("[")
    size = toks.expect_kind("number")
    toks.expect("]")
    toks.expect(";")
    if not size[1].isdigit():
        raise QasmError("register size must be an integer", size[2], size[3])
    return name, int(size[1])


def parse_qasm(text: str) -> Circuit:
    toks = _Tokens(text)
    toks.expect("OPENQASM")
    version = toks.expect_kind("number")
    if version[1] != "2.0":
        raise QasmError(f"unsupported version {version[1]}", version[2], version[3])
    toks.expect(";")
    if toks.peek()[1] == "include":
        toks.next()
        inc = toks.expect_kind("string")
        if inc[1] != '"qelib1.inc"':
            raise QasmError(f"unsupported include {inc[1]}", inc[2], inc[3])
        toks.expect(";")

    qreg: tuple[str, int] | None = None
    creg: tuple[str, int] | None = None
    gates: list[Gate] = []
    measured: dict[int, int] = {}

    while toks.peek()[0] != "eof":
        tok = toks.next()
        name, line, col = tok[1], tok[2], tok[3]
        if tok[0] != "ident":
            raise QasmError(f"expected statement, found {name!r}", line, col)
        if name == "qreg":
            if qreg is not None:
                raise QasmError("only one qreg is supported", line, col)
            qreg = _register(toks)
            continue
        if name == "creg":
            if creg is not None:
                raise QasmError("only one creg is supported", line, col)
            creg = _register(toks)
            continue
        if qreg is None:
            raise QasmError("statement before qreg declaration", line, col)
        if name == "measure":
            q = _index(toks, qreg[0], qreg[1], "qubit")
            toks.expect("->", "arrow")
            if creg is None:
                raise QasmError("measure without creg", line, col)
            c = _index(toks, creg[0], creg[1], "clbit")
            toks.expect(";")
            if c in measured or q in measured.values():
                raise QasmError("duplicate measurement", line, col)
            measured[c] = q
            continue
        kind = _BY_NAME.get(name)
        if kind is None or kind is GateKind.MEASURE:
            raise QasmError(f"unknown gate {name!r}", line, col)
        params: list[float] = []
        if toks.peek()[1] == "(":
            toks.next()
            if toks.peek()[1] != ")":
                params.append(_expr(toks))
                while toks.peek()[1] == ",":
                    toks.next()
                    params.append(_expr(toks))
            toks.expect(")")
        qubits = [_index(toks, qreg[0], qreg[1], "qubit")]
        while toks.peek()[1] == ",":
            toks.next()
            qubits.append(_index(toks, qreg[0], qreg[1], "qubit"))
        toks.expect(";")
        try:
            gates.append(Gate(kind, tuple(qubits), tuple(params)))
        except CircuitError as exc:
            raise QasmError(str(exc), line, col) from None

    if qreg is None:
        tok = toks.eof
        raise QasmError("missing qreg declaration", tok[2], tok[3])
    if measured and sorted(measured) != list(range(len(measured))):
        raise QasmError("classical bits must be measured contiguously from 0", *toks.eof[2:])
    return Circuit(qreg[1], tuple(gates), tuple(measured[c] for c in sorted(measured)))


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_qasm(c: Circuit) -> str:
    lines = [HEADER.rstrip("\n"), f"qreg q[{c.n_qubits}];"]
    if c.measured_qubits:
        lines.append(f"creg c[{len(c.measured_qubits)}];")
    for g in c.gates:
        head = g.kind.value
        if g.params:
            head += "(" + ",".join(_fmt(p) for p in g.params) + ")"
        lines.append(head + " " + ",".join(f"q[{q}]" for q in g.qubits) + ";")
    for i, q in enumerate(c.measured_qubits):
        lines.append(f"measure q[{q}] -> c[{i}];")
    return "\n".join(lines) + "\n"
