"""Text syntax for formulas and restricted-addition expressions.

Formula grammar (whitespace insignificant)::

    formula := quant | bool
    quant   := ("exists" | "forall") var "." formula
    bool    := conj ("|" conj)*
    conj    := literal ("&" literal)*
    literal := ["!"] atom | "(" formula ")" | "true" | "false"
    atom    := "D4[" int "](" term "," term "," term "," term ")"
             | "R[" int "," int "](" term "," term "," term ")"
    term    := var | rational
    var     := "x" nat
    rational:= ["-"] nat ["/" nat]

Box expressions extend the term layer::

    expr    := rational "*" expr | primary
    primary := "boxp(" expr "," expr ")" | "boxm(" expr "," expr ")"
             | "boxg[" int "](" expr "," expr ")" | var | rational | "(" expr ")"
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Optional

from .arith import format_rational
from .formula import (
    FALSE,
    TRUE,
    And,
    Const,
    D4,
    Exists,
    FalseF,
    Forall,
    Formula,
    Not,
    Or,
    Rnm,
    Term,
    TrueF,
    Var,
)
from .subaffine import BoxExpr, BoxMinus, BoxPlus, BoxPlusGamma, BoxConst, BoxVar, Scale


class ParseError(ValueError):
    """Syntax error carrying 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<name>[A-Za-z][A-Za-z0-9]*)
  | (?P<number>-?\d+(?:/\d+)?)
  | (?P<punct>[\[\](),.&|!*])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"exists", "forall", "true", "false"}


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int, int]] = []
        line, col = 1, 1
        pos = 0
        while pos < len(text):
            match = _TOKEN_RE.match(text, pos)
            if match is None:
                raise ParseError(f"unexpected character {text[pos]!r}", line, col)
            kind = match.lastgroup
            value = match.group()
            if kind != "ws":
                self.toks.append((kind, value, line, col))
            newlines = value.count("\n")
            if newlines:
                line += newlines
                col = len(value) - value.rfind("\n")
            else:
                col += len(value)
            pos = match.end()
        self.toks.append(("eof", "", line, col))
        self.i = 0

    def peek(self) -> tuple[str, str, int, int]:
        return self.toks[self.i]

    def next(self) -> tuple[str, str, int, int]:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, got, line, col = self.next()
        if got != value:
            raise ParseError(f"expected {value!r}, found {got or 'end of input'!r}", line, col)

    def error(self, message: str) -> ParseError:
        _, _, line, col = self.peek()
        return ParseError(message, line, col)


def _parse_int(toks: _Tokens) -> int:
    kind, value, line, col = toks.next()
    if kind != "number" or "/" in value:
        raise ParseError(f"expected an integer, found {value!r}", line, col)
    return int(value)


def _parse_rational(value: str, line: int, col: int) -> Fraction:
    try:
        return Fraction(value)
    except ZeroDivisionError:
        raise ParseError(f"constant {value!r} has denominator zero", line, col) from None


def _parse_term(toks: _Tokens) -> Term:
    kind, value, line, col = toks.next()
    if kind == "name":
        if value.startswith("x") and value[1:].isdigit():
            return Var(int(value[1:]))
        raise ParseError(f"expected a term, found {value!r}", line, col)
    if kind == "number":
        return Const(_parse_rational(value, line, col))
    raise ParseError(f"expected a term, found {value!r}", line, col)


def _parse_atom(toks: _Tokens, name: str, line: int, col: int) -> Formula:
    if name == "D4":
        toks.expect("[")
        k = _parse_int(toks)
        toks.expect("]")
        toks.expect("(")
        terms = [_parse_term(toks)]
        for _ in range(3):
            toks.expect(",")
            terms.append(_parse_term(toks))
        toks.expect(")")
        return D4(k, *terms)
    if name == "R":
        toks.expect("[")
        n = _parse_int(toks)
        toks.expect(",")
        m = _parse_int(toks)
        toks.expect("]")
        if n < 1 or m < 1:
            raise ParseError(f"R[{n},{m}] needs positive subscripts", line, col)
        toks.expect("(")
        terms = [_parse_term(toks)]
        for _ in range(2):
            toks.expect(",")
            terms.append(_parse_term(toks))
        toks.expect(")")
        return Rnm(n, m, *terms)
    raise ParseError(f"unknown relation {name!r}", line, col)


def _parse_literal(toks: _Tokens) -> Formula:
    kind, value, line, col = toks.peek()
    if value == "!":
        toks.next()
        return Not(_parse_literal(toks))
    if value == "(":
        toks.next()
        inner = _parse_formula(toks)
        toks.expect(")")
        return inner
    if kind == "name":
        toks.next()
        if value == "true":
            return TRUE
        if value == "false":
            return FALSE
        if value in ("exists", "forall"):
            raise ParseError("quantifier must start a formula or be parenthesized", line, col)
        return _parse_atom(toks, value, line, col)
    raise ParseError(f"expected a literal, found {value or 'end of input'!r}", line, col)


def _parse_conj(toks: _Tokens) -> Formula:
    items = [_parse_literal(toks)]
    while toks.peek()[1] == "&":
        toks.next()
        items.append(_parse_literal(toks))
    return items[0] if len(items) == 1 else And(tuple(items))


def _parse_bool(toks: _Tokens) -> Formula:
    items = [_parse_conj(toks)]
    while toks.peek()[1] == "|":
        toks.next()
        items.append(_parse_conj(toks))
    return items[0] if len(items) == 1 else Or(tuple(items))


def _parse_formula(toks: _Tokens) -> Formula:
    kind, value, line, col = toks.peek()
    if value in ("exists", "forall"):
        toks.next()
        tkind, tvalue, tline, tcol = toks.next()
        if tkind != "name" or not (tvalue.startswith("x") and tvalue[1:].isdigit()):
            raise ParseError(f"expected a variable after {value}", tline, tcol)
        toks.expect(".")
        body = _parse_formula(toks)
        node = Exists if value == "exists" else Forall
        return node(int(tvalue[1:]), body)
    return _parse_bool(toks)


def parse(text: str) -> Formula:
    """Parse a formula; raises ParseError with location on bad input."""
    toks = _Tokens(text)
    f = _parse_formula(toks)
    kind, value, line, col = toks.peek()
    if kind != "eof":
        raise ParseError(f"trailing input {value!r}", line, col)
    return f


# -- printing ---------------------------------------------------------------


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return f"x{t.index}"
    return format_rational(t.value)


def print_formula(f: Formula) -> str:
    """Canonical text form; parse(print_formula(f)) is structurally f."""
    return _print(f, 0)


def _print(f: Formula, level: int) -> str:
    # levels: 0 formula, 1 disjunct, 2 literal
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, D4):
        args = ", ".join(print_term(t) for t in (f.t1, f.t2, f.t3, f.t4))
        return f"D4[{f.k}]({args})"
    if isinstance(f, Rnm):
        args = ", ".join(print_term(t) for t in (f.t1, f.t2, f.t3))
        return f"R[{f.n},{f.m}]({args})"
    if isinstance(f, Not):
        body = _print(f.body, 2)
        return f"!{body}"
    if isinstance(f, And):
        text = " & ".join(_print(g, 2) for g in f.items)
        return f"({text})" if level >= 2 else text
    if isinstance(f, Or):
        text = " | ".join(_print(g, 1) for g in f.items)
        return f"({text})" if level >= 1 else text
    if isinstance(f, (Exists, Forall)):
        word = "exists" if isinstance(f, Exists) else "forall"
        text = f"{word} x{f.var}. {_print(f.body, 0)}"
        return f"({text})" if level >= 1 else text
    raise TypeError(f"not a formula: {f!r}")


# -- box expressions ---------------------------------------------------------


def _parse_box_primary(toks: _Tokens) -> BoxExpr:
    kind, value, line, col = toks.next()
    if value == "(":
        inner = _parse_box(toks)
        toks.expect(")")
        return inner
    if kind == "name":
        if value.startswith("x") and value[1:].isdigit():
            return BoxVar(int(value[1:]))
        if value in ("boxp", "boxm"):
            toks.expect("(")
            e1 = _parse_box(toks)
            toks.expect(",")
            e2 = _parse_box(toks)
            toks.expect(")")
            return BoxPlus(e1, e2) if value == "boxp" else BoxMinus(e1, e2)
        if value == "boxg":
            toks.expect("[")
            gamma = _parse_int(toks)
            toks.expect("]")
            toks.expect("(")
            e1 = _parse_box(toks)
            toks.expect(",")
            e2 = _parse_box(toks)
            toks.expect(")")
            return BoxPlusGamma(gamma, e1, e2)
        raise ParseError(f"unknown operator {value!r}", line, col)
    if kind == "number":
        return BoxConst(_parse_rational(value, line, col))
    raise ParseError(f"expected an expression, found {value!r}", line, col)


def _parse_box(toks: _Tokens) -> BoxExpr:
    kind, value, line, col = toks.peek()
    if kind == "number":
        save = toks.i
        toks.next()
        if toks.peek()[1] == "*":
            toks.next()
            return Scale(_parse_rational(value, line, col), _parse_box(toks))
        toks.i = save
    return _parse_box_primary(toks)


def parse_box(text: str) -> BoxExpr:
    """Parse a restricted-addition expression."""
    toks = _Tokens(text)
    e = _parse_box(toks)
    kind, value, line, col = toks.peek()
    if kind != "eof":
        raise ParseError(f"trailing input {value!r}", line, col)
    return e


def print_box(e: BoxExpr) -> str:
    if isinstance(e, BoxVar):
        return f"x{e.index}"
    if isinstance(e, BoxConst):
        return format_rational(e.value)
    if isinstance(e, Scale):
        return f"{format_rational(e.coeff)} * {print_box(e.body)}"
    if isinstance(e, BoxPlus):
        return f"boxp({print_box(e.left)}, {print_box(e.right)})"
    if isinstance(e, BoxMinus):
        return f"boxm({print_box(e.left)}, {print_box(e.right)})"
    if isinstance(e, BoxPlusGamma):
        return f"boxg[{e.gamma}]({print_box(e.left)}, {print_box(e.right)})"
    raise TypeError(f"not a box expression: {e!r}")
