"""Cell data model: membership, projection, sections, graphs, serialization."""

import random
from fractions import Fraction

import pytest

from padicqe.arith import INF, Ambient, Coset
from padicqe.cells import (
    Cell,
    CosetCond,
    OrdLt,
    PolyConst,
    Precell,
    ShiftDiff,
    ShiftVar,
    cell_from_json,
    cell_member,
    cell_section,
    cell_to_json,
    classify_graph,
    cond_holds,
    poly_ord,
    precell_member,
    project_cell,
)
from padicqe.formula import Const, Var

from helpers import fiber_exists_brute, rand_cell, rand_point

F = Fraction
amb3 = Ambient(3)


def test_poly_ord_examples():
    assert poly_ord(ShiftVar(2, 0, F(1)), (F(4),), amb3) == 3
    assert poly_ord(PolyConst(F(0)), (), amb3) == INF
    assert poly_ord(ShiftDiff(-1, 0, 1), (F(5), F(1)), Ambient(2)) == 1


def test_shiftdiff_rejects_equal_indices():
    with pytest.raises(ValueError):
        ShiftDiff(0, 1, 1)


def test_cell_member_examples():
    lam = amb3.rho(F(1), 1, 1)
    C = Cell(Precell.full(0), Const(F(0)), None, None, lam)
    assert cell_member(C, (F(1),), amb3)
    assert not cell_member(C, (F(0),), amb3)
    Z = Cell(Precell.full(1), Var(0), None, None, Coset.zero(1, 1))
    a = F(7)
    assert cell_member(Z, (a, a), amb3)
    assert not cell_member(Z, (a, a + 1), amb3)


def test_zero_coset_with_upper_bound_is_empty():
    C = Cell(Precell.full(0), Const(F(0)), None, PolyConst(F(9)), Coset.zero(1, 1))
    for t in (F(0), F(1), F(9), F(27)):
        assert not cell_member(C, (t,), amb3)


def test_precell_conditions():
    cond = OrdLt(ShiftVar(0, 0, F(0)), PolyConst(F(9)), 0)
    assert cond_holds(cond, (F(3),), amb3)
    assert not cond_holds(cond, (F(9),), amb3)
    # infinity on the left never satisfies a strict bound
    assert not cond_holds(cond, (F(0),), amb3)
    neg = OrdLt(ShiftVar(0, 0, F(0)), PolyConst(F(9)), 0, negated=True)
    assert cond_holds(neg, (F(0),), amb3)
    cc = CosetCond(Var(0), Const(F(1)), amb3.rho(F(3), 2, 1))
    assert cond_holds(cc, (F(4),), amb3)      # 4 - 1 = 3
    assert not cond_holds(cc, (F(2),), amb3)  # 2 - 1 = 1 is in the unit class


def test_project_zero_coset():
    C = Cell(Precell.full(1), Var(0), None, None, Coset.zero(1, 1))
    pieces = project_cell(C, amb3)
    assert len(pieces) == 1 and pieces[0] == Precell.full(1)


def test_project_two_sided_examples():
    lam = amb3.rho(F(1), 2, 1)
    C = Cell(Precell.full(0), Const(F(0)), PolyConst(F(1)), PolyConst(F(81)), lam)
    pieces = project_cell(C, amb3)
    assert any(precell_member(P, (), amb3) for P in pieces)
    C2 = Cell(Precell.full(0), Const(F(0)), PolyConst(F(1)), PolyConst(F(9)), lam)
    assert not any(precell_member(P, (), amb3) for P in project_cell(C2, amb3))


def test_project_one_sided():
    lam = amb3.rho(F(1), 1, 1)
    low = Cell(Precell.full(1), Const(F(0)), ShiftVar(0, 0, F(0)), None, lam)
    pieces = project_cell(low, amb3)
    # projection excludes x0 = 0, where the lower bound is infinite
    assert any(precell_member(P, (F(3),), amb3) for P in pieces)
    assert not any(precell_member(P, (F(0),), amb3) for P in pieces)
    up = Cell(Precell.full(1), Const(F(0)), None, ShiftVar(0, 0, F(0)), lam)
    assert project_cell(up, amb3) == [Precell.full(1)]


@pytest.mark.parametrize("p", [2, 3, 5])
def test_project_matches_brute_force(p):
    ambient = Ambient(p)
    rng = random.Random(100 + p)
    for _ in range(60):
        arity = rng.randint(0, 2)
        C = rand_cell(rng, ambient, arity)
        pieces = project_cell(C, ambient)
        for _ in range(25):
            x = rand_point(rng, p, arity)
            want = fiber_exists_brute(C, x, ambient)
            got = any(precell_member(P, x, ambient) for P in pieces)
            assert want == got, (C, x)


def test_section_examples():
    Z = Cell(Precell.full(1), Var(0), None, None, Coset.zero(1, 1))
    sec = cell_section(Z, amb3)
    assert sec.value_at((F(5),), amb3) == F(5)

    lam = amb3.rho(F(1), 2, 1)
    C = Cell(Precell.full(0), Const(F(0)), None, PolyConst(F(9)), lam)
    t = sec_val = cell_section(C, amb3).value_at((), amb3)
    assert sec_val == 1 and cell_member(C, (t,), amb3)

    lam2 = amb3.rho(F(2), 1, 1)
    NB = Cell(Precell.full(1), Var(0), None, None, lam2)
    sec2 = cell_section(NB, amb3)
    rng = random.Random(5)
    for _ in range(200):
        x = rand_point(rng, 3, 1)
        t = sec2.value_at(x, amb3)
        assert t == x[0] + 2 and cell_member(NB, x + (t,), amb3)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_section_validity_random(p):
    ambient = Ambient(p)
    rng = random.Random(40 + p)
    for _ in range(50):
        arity = rng.randint(0, 2)
        C = rand_cell(rng, ambient, arity)
        pieces = project_cell(C, ambient)
        sec = cell_section(C, ambient)
        for _ in range(20):
            x = rand_point(rng, p, arity)
            if not any(precell_member(P, x, ambient) for P in pieces):
                continue
            t = sec.value_at(x, ambient)
            assert t is not None and cell_member(C, x + (t,), ambient), (C, x, t)


def test_classify_graph():
    idcell = Cell(Precell.full(1), Var(0), None, None, Coset.zero(1, 1))
    const5 = Cell(Precell.full(1), Const(F(5)), None, None, Coset.zero(1, 1))
    assert classify_graph([idcell], amb3) == [(idcell, Var(0))]
    assert classify_graph([const5], amb3) == [(const5, Const(F(5)))]
    bad = Cell(Precell.full(1), Var(0), None, None, amb3.rho(F(1), 1, 1))
    with pytest.raises(ValueError, match="not a function graph"):
        classify_graph([bad], amb3)
    with pytest.raises(ValueError, match="multi-point"):
        classify_graph([idcell, const5], amb3, sample_points=[(F(0),), (F(1),)])


def test_cell_json_roundtrip():
    rng = random.Random(77)
    for p in (2, 3, 5):
        ambient = Ambient(p)
        for _ in range(25):
            C = rand_cell(rng, ambient, rng.randint(0, 2))
            blob = cell_to_json(C, ambient)
            assert cell_from_json(blob) == C


def test_precell_dnf_conventions():
    assert Precell.empty(1).trivially_empty
    assert precell_member(Precell.full(2), (F(1), F(2)), amb3)
    assert not precell_member(Precell.empty(2), (F(1), F(2)), amb3)
