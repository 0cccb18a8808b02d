"""Text syntax: parsing, printing, and error reporting."""

from fractions import Fraction

import pytest

from padicqe.formula import And, Const, D4, Exists, Not, Rnm, Var
from padicqe.parser import ParseError, parse, parse_box, print_box, print_formula
from padicqe.subaffine import BoxConst, BoxMinus, BoxPlus, BoxPlusGamma, BoxVar, Scale

F = Fraction

ROUNDTRIP_CORPUS = [
    "D4[0](x0, x1, x2, x3)",
    "R[2,1](x0, 1/3, 2)",
    "exists x1. R[1,1](x0, x1, 1) & D4[2](x1, 0, x0, 0)",
    "forall x0. exists x1. D4[0](x0, 0, x1, 0)",
    "!R[1,1](0, x0, 1)",
    "!D4[-3](x0, 0, 5/7, 0)",
    "true",
    "false",
    "D4[1](x0, 0, x1, 0) & R[1,1](x0, x1, 1) & D4[0](0, 1, x0, x1)",
    "D4[1](x0, 0, x1, 0) | R[1,1](x0, x1, 1) | false",
    "(D4[0](x0, 0, 1, 0) | R[1,1](0, x0, 2)) & !R[2,2](x0, x1, 9)",
    "R[1,1](-1, x0, -2/3)",
    "exists x0. true",
    "forall x2. R[3,2](x2, x2, 0)",
    "D4[-1](1/2, -1/2, 0, 81)",
    "exists x1. (D4[0](x1, 0, x0, 0) | R[1,1](x1, 0, 1)) & !D4[2](x1, x0, 1, 0)",
    "R[1,1](x0, x1, x2) & R[1,2](x1, x2, x0)",
    "!(D4[0](x0, 0, 1, 0) & R[1,1](0, x0, 1))",
    "forall x0. (exists x1. D4[0](x0, 0, x1, 0)) & R[1,1](x0, x0, 0)",
    "D4[4](x0, x1, x1, x0)",
]


@pytest.mark.parametrize("text", ROUNDTRIP_CORPUS)
def test_roundtrip(text):
    f = parse(text)
    assert parse(print_formula(f)) == f


def test_parse_atoms():
    assert parse("D4[0](x0, x1, x2, x3)") == D4(0, Var(0), Var(1), Var(2), Var(3))
    assert parse("R[2,1](x0, 1/3, 2)") == Rnm(2, 1, Var(0), Const(F(1, 3)), Const(F(2)))
    f = parse("exists x1. R[1,1](x0, x1, 1) & D4[2](x1, 0, x0, 0)")
    assert isinstance(f, Exists) and isinstance(f.body, And)


def test_whitespace_insensitive():
    assert parse("D4[0](x0,x1,x2,x3)") == parse(" D4[ 0 ] ( x0 , x1 , x2 , x3 ) ")


def test_syntax_error_reports_location():
    with pytest.raises(ParseError) as err:
        parse("D4[0](x0, x1, x2")
    assert err.value.line == 1 and err.value.column > 1


def test_unknown_relation():
    with pytest.raises(ParseError, match="unknown relation"):
        parse("Q[1,1](x0, x1, x2)")


def test_bad_constant():
    with pytest.raises(ParseError, match="denominator zero"):
        parse("R[1,1](x0, 1/0, 1)")


def test_bad_subscripts():
    with pytest.raises(ParseError):
        parse("R[0,1](x0, x1, x2)")


def test_trailing_garbage():
    with pytest.raises(ParseError, match="trailing"):
        parse("true true")


def test_negation_binds_tightly():
    f = parse("!D4[0](x0, 0, 1, 0) & R[1,1](0, x0, 1)")
    assert isinstance(f, And) and isinstance(f.items[0], Not)


def test_box_roundtrip():
    cases = [
        "boxp(x0, 1)",
        "boxm(3 * x1, 1/3)",
        "boxg[-2](x0, boxp(x1, -5))",
        "2 * boxg[1](x0, x0)",
        "-1/3 * x2",
    ]
    for text in cases:
        e = parse_box(text)
        assert parse_box(print_box(e)) == e


def test_box_shapes():
    assert parse_box("boxp(x0, 1)") == BoxPlus(BoxVar(0), BoxConst(F(1)))
    assert parse_box("boxg[-2](x0, 2 * x1)") == BoxPlusGamma(
        -2, BoxVar(0), Scale(F(2), BoxVar(1))
    )
    assert parse_box("boxm(x0, x1)") == BoxMinus(BoxVar(0), BoxVar(1))
