"""Formula semantics, negation normal form, and shift lowering."""

import random
from fractions import Fraction

import pytest

from padicqe.arith import Ambient
from padicqe.formula import (
    FALSE,
    TRUE,
    And,
    Const,
    D4,
    Exists,
    Forall,
    Not,
    Or,
    Rnm,
    Var,
    atoms_of,
    eval_qf,
    eval_quantified,
    free_vars,
    is_qf,
    lower_shifts,
    nnf,
    quantifier_count,
)
from padicqe.parser import parse
from padicqe.qe import build_universe

F = Fraction
amb3 = Ambient(3)


def C(v):
    return Const(F(v))


def test_eval_qf_examples():
    # ord(9-0) < ord(3-0): 2 < 1 fails
    assert not eval_qf(D4(0, C(9), C(0), C(3), C(0)), {}, amb3)
    assert eval_qf(Rnm(2, 1, C(0), C(9), C(1)), {}, amb3)
    # ord(x-x) = inf on the left: never strictly below anything
    f = D4(1, Var(0), Var(0), Var(1), Var(2))
    for sigma in ({0: F(1), 1: F(2), 2: F(5)}, {0: F(3), 1: F(1), 2: F(1)}):
        assert not eval_qf(f, sigma, amb3)


def test_eval_qf_zero_coset_convention():
    f = Rnm(1, 1, Var(0), Var(1), C(0))
    assert eval_qf(f, {0: F(4), 1: F(4)}, amb3)
    assert not eval_qf(f, {0: F(4), 1: F(5)}, amb3)


def test_eval_qf_unbound_variable():
    with pytest.raises(KeyError):
        eval_qf(D4(0, Var(0), C(0), C(1), C(0)), {}, amb3)


def test_eval_quantified_examples():
    U = [F(1), F(2)]
    assert not eval_quantified(Exists(0, FALSE), {}, U, amb3)
    assert eval_quantified(Forall(0, Rnm(1, 1, Var(0), Var(0), C(0))), {}, U, amb3)
    f = Exists(0, And((D4(0, C(1), C(0), Var(0), C(0)), D4(0, Var(0), C(0), C(81), C(0)))))
    U2 = [F(3) ** j for j in range(-3, 6)]
    assert eval_quantified(f, {}, U2, amb3)


def test_nnf_shapes():
    a = D4(0, Var(0), C(0), C(1), C(0))
    b = Rnm(1, 1, C(0), Var(0), C(1))
    assert nnf(Not(And((a, b)))) == Or((Not(a), Not(b)))
    assert nnf(Not(Exists(0, a))) == Forall(0, Not(a))
    assert nnf(Not(Not(a))) == a
    assert nnf(Not(TRUE)) == FALSE


def test_nnf_preserves_semantics():
    rng = random.Random(3)
    fixtures = [
        "!(D4[0](x0, 0, x1, 0) & R[1,1](x0, x1, 1))",
        "!(!D4[1](x0, x1, 1, 0) | R[2,1](0, x0, 3))",
        "!(R[1,1](x0, 0, 1) & (D4[0](x0, 0, 1, 0) | !R[1,1](x1, 0, 2)))",
    ]
    for text in fixtures:
        f = parse(text)
        g = nnf(f)
        for _ in range(400):
            sigma = {
                v: F(3) ** rng.randint(-3, 3) * rng.choice([0, 1, 2, 4, 5, -1])
                for v in free_vars(f)
            }
            assert eval_qf(f, sigma, amb3) == eval_qf(g, sigma, amb3)


def test_free_vars():
    f = parse("exists x1. R[1,1](x0, x1, 1) & D4[2](x1, 0, x2, 0)")
    assert free_vars(f) == {0, 2}
    assert quantifier_count(f) == 1 and not is_qf(f)


def test_lower_shifts_identity_on_zero_shift():
    f = parse("D4[0](x0, 0, x1, 0)")
    assert lower_shifts(f) == f


def test_lower_shifts_negative_shape():
    f = parse("D4[-2](x0, 0, x1, 0)")
    g = lower_shifts(f)
    # existential chain of two witnesses, only zero-shift atoms
    assert quantifier_count(g) == 2
    assert all(a.k == 0 for a in atoms_of(g) if isinstance(a, D4))
    assert parse("exists x2. exists x3. D4[0](x0, 0, x2, 0) & D4[0](x2, 0, x3, 0) & D4[0](x3, 0, x1, 0)") == g


def test_lower_shifts_positive_uses_universals():
    g = lower_shifts(parse("D4[1](x0, 0, x1, 0)"))
    assert quantifier_count(g) == 1
    assert all(a.k == 0 for a in atoms_of(g) if isinstance(a, D4))


def _inner_universe(f, ambient, margin):
    uni = build_universe(f, 2 + margin, ambient)
    inner = [u for u in uni.elements if u == 0 or uni.lo + margin <= ambient.ord(u) <= uni.hi - margin]
    return uni.elements, inner


@pytest.mark.parametrize(
    "text",
    [
        "D4[-2](x0, 0, x1, 0)",
        "D4[-1](x0, x1, x2, x3)",
        "D4[1](x0, 0, x1, 0)",
        "D4[2](x0, x1, x2, 0)",
        "D4[3](x0, 0, x1, 0)",
        "!D4[2](x0, 0, x1, 0)",
        "D4[-1](x0, x1, x2, x3) & R[2,1](x0, x1, 1)",
        "exists x1. D4[1](x0, 0, x1, 0)",
    ],
)
def test_lower_shifts_oracle(text):
    """Equivalence over universes realizing every order in the window.

    Assignments stay inside the window by the formula's shift budget so
    the interpolation witnesses the rewrite needs are available.
    """
    f = parse(text)
    g = lower_shifts(f)
    assert all(a.k == 0 for a in atoms_of(g) if isinstance(a, D4))
    kf = sum(abs(a.k) for a in atoms_of(f) if isinstance(a, D4))
    m_star = max((a.m for a in atoms_of(f) if isinstance(a, Rnm)), default=1)
    margin = kf + m_star
    U, inner = _inner_universe(f, amb3, margin)
    rng = random.Random(11)
    for _ in range(120):
        sigma = {v: rng.choice(inner) for v in free_vars(f)}
        assert eval_quantified(f, sigma, U, amb3) == eval_quantified(g, sigma, U, amb3), sigma
