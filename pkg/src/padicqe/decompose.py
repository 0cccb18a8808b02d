"""Constructive cell algorithms: intersection and QF decomposition.

``intersect_cells`` realizes the intersection of two cells as a finite
disjoint union of cells whose centers come from the inputs.  The fiber
point t is classified by the order type of (ord(t-c1), ord(c2-c1),
ord(t-c2)); on each zone the "other" cell's conditions collapse to
conditions on the base, using the coset-of-a-sum case rules.  Zones with
an order gap below the angular precision enumerate coset classes at the
native levels only, so everything stays small and exact.

``decompose_qf`` turns a quantifier-free formula into disjoint cells over
a chosen fiber variable: Shannon expansion into disjoint literal paths,
one cell family per literal, then pairwise intersection.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Optional, Sequence, Union

from .arith import Ambient, Coset
from .cells import (
    Cell,
    CosetCond,
    LDistPoly,
    OrdLt,
    PolyConst,
    Precell,
    PrecellCond,
    cell_trivially_empty,
    diff_poly,
    poly_is_zero,
    poly_nonzero_cond,
    poly_zero_conds,
    shift_poly,
)
from .formula import (
    And,
    Const,
    D4,
    FalseF,
    Formula,
    Not,
    Or,
    Rnm,
    Term,
    TrueF,
    Var,
    free_vars,
    is_atom,
    is_qf,
    nnf,
)

# -- coset-of-a-sum for whole classes ----------------------------------------


def rho_sum_of_classes(
    ambient: Ambient,
    rep_a: Fraction,
    rep_b: Fraction,
    gap: int,
    delta: int,
    n: int,
    m: int,
) -> Union[Coset, str, None]:
    """Coset of a + delta*b at level (n, m) for whole coset classes.

    Here a ranges over the class of rep_a, b over the class of rep_b, with
    ord b - ord a = gap >= 0 pinned.  Returns None when the combination is
    inconsistent with the classes' order residues, the string "cancel" when
    gap = 0 and the leading parts cancel at class level (no member keeps
    ord(a + delta*b) = ord a), and the determined coset otherwise.
    """
    oa, ob = int(ambient.ord(rep_a)), int(ambient.ord(rep_b))
    rn = oa + gap - ob
    if rn % n != 0:
        return None
    if gap >= m:
        return ambient.rho(rep_a, n, m)
    val = rep_a + delta * rep_b * Fraction(ambient.p) ** rn
    if val == 0 or ambient.ord(val) != oa:
        return "cancel"
    return ambient.rho(val, n, m)


def _fiber_classes(
    ambient: Ambient, lam: Coset, n2: int, m2: int
) -> list[tuple[Coset, Coset]]:
    """Pairs (fiber coset, its class at level (n2, m2)) refining lam.

    When lam's level already determines the (n2, m2) class, no refinement
    happens and lam itself is returned.
    """
    if lam.n % n2 == 0 and lam.m >= m2:
        return [(lam, ambient.rho(lam.rep(ambient.p), n2, m2))]
    n_join, m_join = lcm(lam.n, n2), max(lam.m, m2)
    return [
        (fine, ambient.rho(fine.rep(ambient.p), n2, m2))
        for fine in ambient.refine_coset(lam, n_join, m_join)
    ]


# -- bound merging -------------------------------------------------------------

BoundPieces = list[tuple[tuple[PrecellCond, ...], Optional[LDistPoly]]]


def _lower_pieces(cands: Sequence[LDistPoly]) -> BoundPieces:
    """Partition by which candidate has the maximal order (ties to the first)."""
    if not cands:
        return [((), None)]
    if len(cands) == 1:
        return [((), cands[0])]
    out: BoundPieces = []
    for j, pj in enumerate(cands):
        conds = tuple(
            OrdLt(p2, pj, 0 if j2 < j else 1)
            for j2, p2 in enumerate(cands)
            if j2 != j
        )
        out.append((conds, pj))
    return out


def _upper_pieces(cands: Sequence[LDistPoly]) -> BoundPieces:
    """Partition by the minimal-order candidate; vanished bounds are vacuous."""
    if not cands:
        return [((), None)]
    if len(cands) == 1:
        return [((), cands[0])]
    out: BoundPieces = []
    for j, pj in enumerate(cands):
        conds: list[PrecellCond] = []
        nz = poly_nonzero_cond(pj)
        if nz is not None:
            conds.append(nz)
        for j2, p2 in enumerate(cands):
            if j2 != j:
                conds.append(OrdLt(pj, p2, 0 if j2 < j else 1))
        out.append((tuple(conds), pj))
    all_zero: list[PrecellCond] = []
    possible = True
    for pj in cands:
        zc = poly_zero_conds(pj)
        if zc is None:
            possible = False
            break
        all_zero.extend(zc)
    if possible:
        out.append((tuple(all_zero), None))
    return out


# -- intersection --------------------------------------------------------------


def intersect_cells(C1: Cell, C2: Cell, ambient: Ambient) -> list[Cell]:
    """C1 intersect C2 as pairwise-disjoint cells centered at c1 or c2."""
    if C1.arity != C2.arity:
        raise ValueError("cell arity mismatch")
    base = C1.base.intersect(C2.base, ambient)
    if base.trivially_empty:
        return []

    out: list[Cell] = []

    def emit(
        conds: Sequence[PrecellCond],
        center: Term,
        lower: Optional[LDistPoly],
        upper: Optional[LDistPoly],
        coset: Coset,
    ) -> None:
        b = base.conjoin(conds, ambient)
        if b.trivially_empty:
            return
        cell = Cell(b, center, lower, upper, coset)
        if not cell_trivially_empty(cell, ambient):
            out.append(cell)

    z1, z2 = C1.coset.is_zero, C2.coset.is_zero
    same_center = C1.center == C2.center

    if z1 or z2:
        _intersect_with_zero(C1, C2, same_center, emit, ambient)
    elif same_center:
        _intersect_same_center(C1, C2, emit, ambient)
    else:
        _intersect_zones(C1, C2, emit, ambient)
    return out


def _degenerate_bound_conds(C: Cell) -> Optional[list[PrecellCond]]:
    """Base conditions equivalent to C's bounds at a pinned fiber t = c(x)."""
    if C.upper is not None:
        return None  # ord(t-c) = +inf can never be below an order
    conds: list[PrecellCond] = []
    if C.lower is not None:
        nz = poly_nonzero_cond(C.lower)
        if nz is not None:
            conds.append(nz)
    return conds


def _intersect_with_zero(C1: Cell, C2: Cell, same_center, emit, ambient) -> None:
    z1, z2 = C1.coset.is_zero, C2.coset.is_zero
    if z1 and z2:
        d1 = _degenerate_bound_conds(C1)
        d2 = _degenerate_bound_conds(C2)
        if d1 is None or d2 is None:
            return
        conds = d1 + d2
        if not same_center:
            conds.append(CosetCond(C1.center, C2.center, Coset.zero(1, 1)))
        emit(conds, C1.center, None, None, C1.coset)
        return
    if z2:
        # swap so the pinned cell is C1
        _intersect_with_zero(C2, C1, same_center, emit, ambient)
        return
    # C1 pins t = c1; C2 has a full coset fiber
    if same_center:
        return  # t - c2 = 0 is not in a nonzero coset
    d1 = _degenerate_bound_conds(C1)
    if d1 is None:
        return
    E0 = diff_poly(C1.center, C2.center, 0, ambient)
    conds = d1 + [CosetCond(C1.center, C2.center, C2.coset)]
    if C2.lower is not None:
        conds.append(OrdLt(C2.lower, E0, 0))
    if C2.upper is not None:
        conds.append(OrdLt(E0, C2.upper, 0))
    emit(conds, C1.center, None, None, C1.coset)


def _intersect_same_center(C1: Cell, C2: Cell, emit, ambient) -> None:
    lam1, lam2 = C1.coset, C2.coset
    lowers = [a for a in (C1.lower, C2.lower) if a is not None]
    uppers = [a for a in (C1.upper, C2.upper) if a is not None]
    for sigma, tau in _fiber_classes(ambient, lam1, lam2.n, lam2.m):
        if tau != lam2:
            continue
        for cl, lo in _lower_pieces(lowers):
            for cu, up in _upper_pieces(uppers):
                emit(list(cl) + list(cu), C1.center, lo, up, sigma)


def _intersect_zones(C1: Cell, C2: Cell, emit, ambient) -> None:
    """Both cosets nonzero, distinct centers: classify by order type.

    With a := ord(t-c1), b := ord(c2-c1), g := ord(t-c2), the zones are
    a > b (fiber near c1), a < b (centers cluster), a = b = g, and
    a = b < g (fiber near c2, emitted with center c2).
    """
    p = ambient.p
    c1, c2 = C1.center, C2.center
    lam1, lam2 = C1.coset, C2.coset
    n1, m1, n2, m2 = lam1.n, lam1.m, lam2.n, lam2.m
    a11, a21, a12, a22 = C1.lower, C1.upper, C2.lower, C2.upper
    E0 = diff_poly(c2, c1, 0, ambient)

    def E(k: int) -> LDistPoly:
        return shift_poly(E0, k, ambient)

    def c1_conds(s: int) -> list[PrecellCond]:
        # C1's bounds at pinned ord(t-c1) = ord E + s
        conds = []
        if a11 is not None:
            conds.append(OrdLt(a11, E0, s))
        if a21 is not None:
            conds.append(OrdLt(E0, a21, -s))
        return conds

    def c2_conds(s: int) -> list[PrecellCond]:
        conds = []
        if a12 is not None:
            conds.append(OrdLt(a12, E0, s))
        if a22 is not None:
            conds.append(OrdLt(E0, a22, -s))
        return conds

    fibers1 = _fiber_classes(ambient, lam1, n2, m2)
    fibers2 = _fiber_classes(ambient, lam2, n1, m1)

    # zone a > b, gap v below m2: everything about C2 is class-determined
    for v in range(1, m2):
        for sigma, tau in fibers1:
            for mu in ambient.cosets(n2, m2):
                res = rho_sum_of_classes(
                    ambient, mu.rep(p), tau.rep(p), v, 1, n2, m2
                )
                if not isinstance(res, Coset) or res != lam2:
                    continue
                conds = [CosetCond(c1, c2, mu)] + c1_conds(v) + c2_conds(0)
                emit(conds, c1, E(v - 1), E(v + 1), sigma)

    # zone a >= b + m2: rho(t-c2) = rho(c1-c2)
    conds_big = [CosetCond(c1, c2, lam2)] + c2_conds(0)
    lower_cands = ([a11] if a11 is not None else []) + [E(m2 - 1)]
    for cl, lo in _lower_pieces(lower_cands):
        emit(conds_big + list(cl), c1, lo, a21, lam1)

    # zone a < b, gap u below m2
    for u in range(1, m2):
        for sigma, tau in fibers1:
            for mu in ambient.cosets(n2, m2):
                res = rho_sum_of_classes(
                    ambient, tau.rep(p), mu.rep(p), u, -1, n2, m2
                )
                if not isinstance(res, Coset) or res != lam2:
                    continue
                conds = [CosetCond(c2, c1, mu)] + c1_conds(-u) + c2_conds(-u)
                emit(conds, c1, E(-u - 1), E(-u + 1), sigma)

    # zone a <= b - m2 (includes points where the centers coincide):
    # t - c2 and t - c1 share their coset at level (n2, m2)
    for sigma, tau in fibers1:
        if tau != lam2:
            continue
        lowers = [x for x in (a11, a12) if x is not None]
        uppers = [x for x in (a21, a22) if x is not None] + [E(1 - m2)]
        for cl, lo in _lower_pieces(lowers):
            for cu, up in _upper_pieces(uppers):
                emit(list(cl) + list(cu), c1, lo, up, sigma)

    # zone a = b = g: no class-level cancellation
    for sigma, tau in fibers1:
        for mu in ambient.cosets(n2, m2):
            res = rho_sum_of_classes(ambient, tau.rep(p), mu.rep(p), 0, -1, n2, m2)
            if not isinstance(res, Coset) or res != lam2:
                continue
            conds = [CosetCond(c2, c1, mu)] + c1_conds(0) + c2_conds(0)
            emit(conds, c1, E(-1), E(1), sigma)

    # zone a = b < g, gap w below m1: center c2
    for w in range(1, m1):
        for sigma2, tau2 in fibers2:
            for mu in ambient.cosets(n1, m1):
                res = rho_sum_of_classes(
                    ambient, mu.rep(p), tau2.rep(p), w, 1, n1, m1
                )
                if not isinstance(res, Coset) or res != lam1:
                    continue
                conds = [CosetCond(c2, c1, mu)] + c1_conds(0) + c2_conds(w)
                emit(conds, c2, E(w - 1), E(w + 1), sigma2)

    # zone g >= b + m1: rho(t-c1) = rho(c2-c1)
    conds_big2 = [CosetCond(c2, c1, lam1)] + c1_conds(0)
    lower_cands2 = ([a12] if a12 is not None else []) + [E(m1 - 1)]
    for cl, lo in _lower_pieces(lower_cands2):
        emit(conds_big2 + list(cl), c2, lo, a22, lam2)


# -- literal -> cells ----------------------------------------------------------


def _full_fiber_cells(
    conds: Sequence[PrecellCond], arity: int, ambient: Ambient
) -> list[Cell]:
    """Partition of {x | conds} x K into center-0 cells."""
    base = Precell.full(arity).conjoin(conds, ambient)
    if base.trivially_empty:
        return []
    zero = Cell(base, Const(Fraction(0)), None, None, Coset.zero(1, 1))
    cells = [zero]
    for lam in ambient.cosets(1, 1):
        cells.append(Cell(base, Const(Fraction(0)), None, None, lam))
    return cells


def _combine_pieces(
    x_conds: Sequence[PrecellCond],
    fiber_cells: Sequence[Cell],
    arity: int,
    ambient: Ambient,
) -> list[Cell]:
    """Conjunction of x-conditions with zero, one or two fiber constraints."""
    if not fiber_cells:
        return _full_fiber_cells(x_conds, arity, ambient)
    merged = [fiber_cells[0]]
    for other in fiber_cells[1:]:
        merged = [
            c for cell in merged for c in intersect_cells(cell, other, ambient)
        ]
    out = []
    for cell in merged:
        b = cell.base.conjoin(x_conds, ambient)
        if not b.trivially_empty:
            c = Cell(b, cell.center, cell.lower, cell.upper, cell.coset)
            if not cell_trivially_empty(c, ambient):
                out.append(c)
    return out


def _neg_coset(lam: Coset, ambient: Ambient) -> Coset:
    if lam.is_zero:
        return lam
    return ambient.rho(-lam.rep(ambient.p), lam.n, lam.m)


def _r_literal_cells(
    atom: Rnm, negated: bool, arity: int, ambient: Ambient
) -> list[Cell]:
    n, m = atom.n, atom.m
    k = arity  # fiber index
    full = Precell.full(arity)

    def fiber_coset_cell(center: Term, lam: Coset) -> Cell:
        return Cell(full, center, None, None, lam)

    # split on the coset of the scale term t3
    scale_cases: list[tuple[Coset, list[PrecellCond], Optional[Cell]]] = []
    t3 = atom.t3
    if isinstance(t3, Const):
        scale_cases.append((ambient.rho(t3.value, n, m), [], None))
    elif t3.index == k:
        scale_cases.append(
            (Coset.zero(n, m), [], fiber_coset_cell(Const(Fraction(0)), Coset.zero(1, 1)))
        )
        for lam in ambient.cosets(n, m):
            scale_cases.append((lam, [], fiber_coset_cell(Const(Fraction(0)), lam)))
    else:
        zero_cond = CosetCond(t3, Const(Fraction(0)), Coset.zero(1, 1))
        scale_cases.append((Coset.zero(n, m), [zero_cond], None))
        for lam in ambient.cosets(n, m):
            scale_cases.append((lam, [CosetCond(t3, Const(Fraction(0)), lam)], None))

    def diff_pieces(lam: Coset) -> list[tuple[list[PrecellCond], Optional[Cell]]]:
        """Pieces for (t2 - t1 in lam*Q), or its complement when negated."""
        targets: list[Coset]
        if negated:
            targets = [Coset.zero(n, m)] + list(ambient.cosets(n, m))
            targets = [mu for mu in targets if mu != lam]
        else:
            targets = [lam]
        t1, t2 = atom.t1, atom.t2
        fib1 = isinstance(t1, Var) and t1.index == k
        fib2 = isinstance(t2, Var) and t2.index == k
        pieces: list[tuple[list[PrecellCond], Optional[Cell]]] = []
        for mu in targets:
            if fib1 and fib2:
                if mu.is_zero:
                    pieces.append(([], None))
                continue
            if fib2:
                pieces.append(([], fiber_coset_cell(t1, mu)))
            elif fib1:
                pieces.append(([], fiber_coset_cell(t2, _neg_coset(mu, ambient))))
            else:
                pieces.append(([CosetCond(t2, t1, mu)], None))
        return pieces

    cells: list[Cell] = []
    for lam, s_conds, s_cell in scale_cases:
        for d_conds, d_cell in diff_pieces(lam):
            fibs = [c for c in (s_cell, d_cell) if c is not None]
            cells.extend(_combine_pieces(s_conds + d_conds, fibs, arity, ambient))
    return cells


def _d4_positive_cells(atom: D4, arity: int, ambient: Ambient) -> list[Cell]:
    k = arity
    full = Precell.full(arity)
    r = atom.k

    def side(a: Term, b: Term):
        fa = isinstance(a, Var) and a.index == k
        fb = isinstance(b, Var) and b.index == k
        if fa and fb:
            return ("x", PolyConst(Fraction(0)))
        if fa:
            return ("fiber", b)
        if fb:
            return ("fiber", a)
        return ("x", diff_poly(a, b, 0, ambient))

    left = side(atom.t1, atom.t2)
    right = side(atom.t3, atom.t4)
    lam11 = list(ambient.cosets(1, 1))

    if left[0] == "x" and right[0] == "x":
        return _full_fiber_cells([OrdLt(left[1], right[1], r)], arity, ambient)

    if left[0] == "fiber" and right[0] == "x":
        c, g = left[1], right[1]
        if poly_is_zero(g) is True:
            # right side has infinite order: condition is t != c
            return [Cell(full, c, None, None, lam) for lam in lam11]
        upper = shift_poly(g, r, ambient)
        return [Cell(full, c, None, upper, lam) for lam in lam11]

    if left[0] == "x" and right[0] == "fiber":
        g, c = left[1], right[1]
        if poly_is_zero(g) is True:
            return []
        lower = shift_poly(g, -r, ambient)
        cells = [Cell(full, c, lower, None, lam) for lam in lam11]
        nz = poly_nonzero_cond(g)
        base = full.conjoin([nz] if nz is not None else [], ambient)
        cells.append(Cell(base, c, None, None, Coset.zero(1, 1)))
        return cells

    c1, c2 = left[1], right[1]
    if c1 == c2:
        if r >= 1:
            return [Cell(full, c1, None, None, lam) for lam in lam11]
        return []

    E0 = diff_poly(c1, c2, 0, ambient)

    def E(s: int) -> LDistPoly:
        return shift_poly(E0, s, ambient)

    cells: list[Cell] = []
    # ord(t-c1) > ord(c1-c2): then ord(t-c2) = ord(c1-c2), window of width r
    if r >= 2:
        for lam in lam11:
            cells.append(Cell(full, c1, E0, E(r), lam))
    # ord(t-c1) < ord(c1-c2): then ord(t-c2) = ord(t-c1), condition is r >= 1
    if r >= 1:
        for lam in lam11:
            cells.append(Cell(full, c1, None, E0, lam))
        # ord(t-c1) = ord(c1-c2): any extra cancellation only helps
        for lam in lam11:
            cells.append(Cell(full, c1, E(-1), E(1), lam))
    else:
        # equal-order region: need ord(t-c2) > ord(c1-c2) - r
        for lam in lam11:
            cells.append(Cell(full, c2, E(-r), None, lam))
        nz = poly_nonzero_cond(E0)
        base = full.conjoin([nz] if nz is not None else [], ambient)
        cells.append(Cell(base, c2, None, None, Coset.zero(1, 1)))
    return cells


def _zero_side_piece(
    a: Term, b: Term, k: int, ambient: Ambient
) -> Optional[tuple[list[PrecellCond], Optional[Cell]]]:
    """Conditions for a - b = 0; None when impossible to satisfy... never None."""
    fa = isinstance(a, Var) and a.index == k
    fb = isinstance(b, Var) and b.index == k
    full = Precell.full(k)
    if fa and fb:
        return ([], None)
    if fa:
        return ([], Cell(full, b, None, None, Coset.zero(1, 1)))
    if fb:
        return ([], Cell(full, a, None, None, Coset.zero(1, 1)))
    return ([CosetCond(a, b, Coset.zero(1, 1))], None)


def _d4_literal_cells(
    atom: D4, negated: bool, arity: int, ambient: Ambient
) -> list[Cell]:
    if not negated:
        return _d4_positive_cells(atom, arity, ambient)
    # not(ord A < ord B + r)  <=>  ord B < ord A + (1 - r), or A = B = 0
    swapped = D4(1 - atom.k, atom.t3, atom.t4, atom.t1, atom.t2)
    cells = _d4_positive_cells(swapped, arity, ambient)
    zl = _zero_side_piece(atom.t1, atom.t2, arity, ambient)
    zr = _zero_side_piece(atom.t3, atom.t4, arity, ambient)
    fibs = [c for c in (zl[1], zr[1]) if c is not None]
    cells.extend(_combine_pieces(zl[0] + zr[0], fibs, arity, ambient))
    return cells


def literal_cells(lit: Formula, arity: int, ambient: Ambient) -> list[Cell]:
    """Cells for one literal over fiber variable x_arity."""
    negated = isinstance(lit, Not)
    atom = lit.body if negated else lit
    if isinstance(atom, D4):
        return _d4_literal_cells(atom, negated, arity, ambient)
    if isinstance(atom, Rnm):
        return _r_literal_cells(atom, negated, arity, ambient)
    raise ValueError(f"not a literal: {lit!r}")


# -- Shannon paths -------------------------------------------------------------


def _fold(f: Formula) -> Formula:
    if isinstance(f, Not):
        body = _fold(f.body)
        if isinstance(body, TrueF):
            return FalseF()
        if isinstance(body, FalseF):
            return TrueF()
        return Not(body)
    if isinstance(f, And):
        items = []
        for g in f.items:
            g = _fold(g)
            if isinstance(g, FalseF):
                return FalseF()
            if not isinstance(g, TrueF):
                items.append(g)
        return And(tuple(items)) if items else TrueF()
    if isinstance(f, Or):
        items = []
        for g in f.items:
            g = _fold(g)
            if isinstance(g, TrueF):
                return TrueF()
            if not isinstance(g, FalseF):
                items.append(g)
        return Or(tuple(items)) if items else FalseF()
    return f


def _substitute(f: Formula, atom: Formula, value: bool) -> Formula:
    if f == atom:
        return TrueF() if value else FalseF()
    if isinstance(f, Not):
        return Not(_substitute(f.body, atom, value))
    if isinstance(f, And):
        return And(tuple(_substitute(g, atom, value) for g in f.items))
    if isinstance(f, Or):
        return Or(tuple(_substitute(g, atom, value) for g in f.items))
    return f


def _first_atom(f: Formula):
    if is_atom(f):
        return f
    if isinstance(f, Not):
        return _first_atom(f.body)
    if isinstance(f, (And, Or)):
        for g in f.items:
            a = _first_atom(g)
            if a is not None:
                return a
    return None


def shannon_paths(f: Formula) -> list[list[Formula]]:
    """Mutually exclusive literal conjunctions whose union is f."""
    f = _fold(f)
    if isinstance(f, TrueF):
        return [[]]
    if isinstance(f, FalseF):
        return []
    atom = _first_atom(f)
    paths = []
    for value, lit in ((True, atom), (False, Not(atom))):
        for rest in shannon_paths(_fold(_substitute(f, atom, value))):
            paths.append([lit] + rest)
    return paths


# -- decomposition -------------------------------------------------------------


def decompose_qf(f: Formula, last_var: int, ambient: Ambient) -> list[Cell]:
    """Disjoint cells over fiber x_last_var whose union is f's solution set."""
    if not is_qf(f):
        raise ValueError("decompose_qf requires a quantifier-free formula")
    if any(v > last_var for v in free_vars(f)):
        raise ValueError("formula uses variables beyond the fiber variable")
    f = nnf(f)
    arity = last_var
    cells: list[Cell] = []
    for path in shannon_paths(f):
        if not path:
            path_cells = _full_fiber_cells([], arity, ambient)
        else:
            path_cells = literal_cells(path[0], arity, ambient)
            for lit in path[1:]:
                lit_cells = literal_cells(lit, arity, ambient)
                path_cells = [
                    c
                    for have in path_cells
                    for new in lit_cells
                    for c in intersect_cells(have, new, ambient)
                ]
                if not path_cells:
                    break
        cells.extend(path_cells)
    return [c for c in cells if not cell_trivially_empty(c, ambient)]
