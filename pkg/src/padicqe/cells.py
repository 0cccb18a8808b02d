"""Cell and precell data model over the distance language.

A precell is a DNF boolean combination of order comparisons between bound
polynomials and coset conditions between terms.  A cell adds one fiber
variable: a center (a variable or constant), optional strict order bounds
on ord(t - c(x)), and a coset constraint t - c(x) in lambda * Q_{n,m}.
Membership is evaluated exactly; nothing here is approximate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .arith import INF, Ambient, Coset, format_rational, parse_rational
from .formula import Const, Term, Var, eval_term

# -- bound polynomials --------------------------------------------------------


@dataclass(frozen=True)
class PolyConst:
    """The constant polynomial a (any pi-power folded into the value)."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class ShiftVar:
    """pi^k * (x_i - a)."""

    k: int
    i: int
    a: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))


@dataclass(frozen=True)
class ShiftDiff:
    """pi^k * (x_i - x_j), i != j."""

    k: int
    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("ShiftDiff needs distinct variable indices")


LDistPoly = Union[PolyConst, ShiftVar, ShiftDiff]


def poly_eval(f: LDistPoly, x: Sequence[Fraction], ambient: Ambient) -> Fraction:
    """Exact value of the polynomial at a point."""
    if isinstance(f, PolyConst):
        return f.value
    if isinstance(f, ShiftVar):
        return Fraction(ambient.p) ** f.k * (x[f.i] - f.a)
    return Fraction(ambient.p) ** f.k * (x[f.i] - x[f.j])


def poly_ord(f: LDistPoly, x: Sequence[Fraction], ambient: Ambient):
    """ord of the polynomial at a point, honoring ord(0) = +inf."""
    if isinstance(f, PolyConst):
        return ambient.ord(f.value)
    if isinstance(f, ShiftVar):
        d = x[f.i] - f.a
        return INF if d == 0 else f.k + ambient.ord(d)
    d = x[f.i] - x[f.j]
    return INF if d == 0 else f.k + ambient.ord(d)


def shift_poly(f: LDistPoly, dk: int, ambient: Ambient) -> LDistPoly:
    """Multiply by pi^dk."""
    if isinstance(f, PolyConst):
        return PolyConst(f.value * Fraction(ambient.p) ** dk)
    if isinstance(f, ShiftVar):
        return ShiftVar(f.k + dk, f.i, f.a)
    return ShiftDiff(f.k + dk, f.i, f.j)


def diff_poly(c2: Term, c1: Term, k: int, ambient: Ambient) -> LDistPoly:
    """pi^k * (c2 - c1) as a bound polynomial (sign only matters through ord)."""
    if isinstance(c2, Var) and isinstance(c1, Var):
        if c2.index == c1.index:
            return PolyConst(Fraction(0))
        return ShiftDiff(k, c2.index, c1.index)
    if isinstance(c2, Var):
        return ShiftVar(k, c2.index, c1.value)
    if isinstance(c1, Var):
        return ShiftVar(k, c1.index, c2.value)
    return PolyConst(Fraction(ambient.p) ** k * (c2.value - c1.value))


def poly_is_zero(f: LDistPoly) -> Optional[bool]:
    """True/False when identically zero/nonzero is syntactically known."""
    if isinstance(f, PolyConst):
        return f.value == 0
    return False if isinstance(f, ShiftDiff) else None if isinstance(f, ShiftVar) else None


# -- precell conditions -------------------------------------------------------


@dataclass(frozen=True)
class OrdLt:
    """ord a1(x) < ord a2(x) + shift (negated: the complement)."""

    a1: LDistPoly
    a2: LDistPoly
    shift: int = 0
    negated: bool = False


@dataclass(frozen=True)
class CosetCond:
    """b1(x) - b2(x) in coset (zero coset means equality; negated: complement)."""

    b1: Term
    b2: Term
    coset: Coset
    negated: bool = False


PrecellCond = Union[OrdLt, CosetCond]


def cond_holds(cond: PrecellCond, x: Sequence[Fraction], ambient: Ambient) -> bool:
    sigma = {i: v for i, v in enumerate(x)}
    if isinstance(cond, OrdLt):
        holds = poly_ord(cond.a1, x, ambient) < poly_ord(cond.a2, x, ambient) + cond.shift
    else:
        d = eval_term(cond.b1, sigma) - eval_term(cond.b2, sigma)
        c = cond.coset
        if c.is_zero:
            holds = d == 0
        else:
            holds = d != 0 and ambient.rho(d, c.n, c.m) == c
    return holds != cond.negated


def cond_static(cond: PrecellCond, ambient: Ambient) -> Optional[bool]:
    """Truth value when it does not depend on x, else None."""
    if isinstance(cond, OrdLt):
        if isinstance(cond.a1, PolyConst) and isinstance(cond.a2, PolyConst):
            holds = ambient.ord(cond.a1.value) < ambient.ord(cond.a2.value) + cond.shift
            return holds != cond.negated
        if isinstance(cond.a1, PolyConst) and cond.a1.value == 0:
            # ord a1 = +inf: strictly-less never holds
            return cond.negated
        return None
    if isinstance(cond.b1, Const) and isinstance(cond.b2, Const):
        d = cond.b1.value - cond.b2.value
        c = cond.coset
        holds = (d == 0) if c.is_zero else (d != 0 and ambient.rho(d, c.n, c.m) == c)
        return holds != cond.negated
    if (
        isinstance(cond.b1, Var)
        and isinstance(cond.b2, Var)
        and cond.b1.index == cond.b2.index
    ):
        holds = cond.coset.is_zero
        return holds != cond.negated
    return None


def simplify_conjunct(
    conds: Iterable[PrecellCond], ambient: Ambient
) -> Optional[tuple[PrecellCond, ...]]:
    """Drop statically-true conditions; None when one is statically false."""
    out: list[PrecellCond] = []
    for cond in conds:
        static = cond_static(cond, ambient)
        if static is False:
            return None
        if static is None and cond not in out:
            out.append(cond)
    return tuple(out)


# -- precells and cells -------------------------------------------------------


@dataclass(frozen=True)
class Precell:
    """{x in K^arity | dnf}; dnf () is empty, ((),) is all of K^arity."""

    arity: int
    dnf: tuple[tuple[PrecellCond, ...], ...]

    @classmethod
    def full(cls, arity: int) -> "Precell":
        return cls(arity, ((),))

    @classmethod
    def empty(cls, arity: int) -> "Precell":
        return cls(arity, ())

    def conjoin(self, conds: Sequence[PrecellCond], ambient: Ambient) -> "Precell":
        """Conjunction with extra conditions, statically simplified."""
        out = []
        for clause in self.dnf:
            merged = simplify_conjunct(tuple(clause) + tuple(conds), ambient)
            if merged is not None:
                out.append(merged)
        return Precell(self.arity, tuple(out))

    def intersect(self, other: "Precell", ambient: Ambient) -> "Precell":
        if self.arity != other.arity:
            raise ValueError("arity mismatch")
        out = []
        for c1 in self.dnf:
            for c2 in other.dnf:
                merged = simplify_conjunct(tuple(c1) + tuple(c2), ambient)
                if merged is not None:
                    out.append(merged)
        return Precell(self.arity, tuple(out))

    @property
    def trivially_empty(self) -> bool:
        return not self.dnf


def precell_member(P: Precell, x: Sequence[Fraction], ambient: Ambient) -> bool:
    if len(x) != P.arity:
        raise ValueError("point arity mismatch")
    return any(all(cond_holds(c, x, ambient) for c in clause) for clause in P.dnf)


@dataclass(frozen=True)
class Cell:
    """{(x,t) in D x K | ord a1(x) < ord(t-c(x)) < ord a2(x), t-c(x) in coset}.

    Bounds are optional and strict; the zero coset pins the fiber to t = c(x).
    """

    base: Precell
    center: Term
    lower: Optional[LDistPoly]
    upper: Optional[LDistPoly]
    coset: Coset

    @property
    def arity(self) -> int:
        return self.base.arity


def cell_member(C: Cell, point: Sequence[Fraction], ambient: Ambient) -> bool:
    if len(point) != C.arity + 1:
        raise ValueError("point arity mismatch")
    x, t = point[: C.arity], point[C.arity]
    if not precell_member(C.base, x, ambient):
        return False
    sigma = {i: v for i, v in enumerate(x)}
    d = t - eval_term(C.center, sigma)
    if C.coset.is_zero:
        if d != 0:
            return False
    else:
        if d == 0 or ambient.rho(d, C.coset.n, C.coset.m) != C.coset:
            return False
    od = INF if d == 0 else ambient.ord(d)
    if C.lower is not None and not poly_ord(C.lower, x, ambient) < od:
        return False
    if C.upper is not None and not od < poly_ord(C.upper, x, ambient):
        return False
    return True


def cell_trivially_empty(C: Cell, ambient: Ambient) -> bool:
    """Cheap sound emptiness checks used to prune constructions."""
    if C.base.trivially_empty:
        return True
    if C.coset.is_zero and C.upper is not None:
        return True
    if C.lower is not None and poly_is_zero(C.lower) is True:
        return True
    if (
        C.lower is not None
        and C.upper is not None
        and isinstance(C.lower, PolyConst)
        and isinstance(C.upper, PolyConst)
    ):
        lo, hi = ambient.ord(C.lower.value), ambient.ord(C.upper.value)
        if lo is not INF and hi is not INF and hi - lo < 2:
            return True
    return False


# -- zero / nonzero helper conditions ----------------------------------------


def poly_zero_conds(f: LDistPoly) -> Optional[list[PrecellCond]]:
    """Conditions for f(x) = 0; None when f is never zero."""
    if isinstance(f, PolyConst):
        return [] if f.value == 0 else None
    if isinstance(f, ShiftVar):
        return [CosetCond(Var(f.i), Const(f.a), Coset.zero(1, 1))]
    return [CosetCond(Var(f.i), Var(f.j), Coset.zero(1, 1))]


def poly_nonzero_cond(f: LDistPoly) -> Optional[PrecellCond]:
    """A condition for f(x) != 0; None when statically nonzero."""
    if isinstance(f, PolyConst):
        if f.value == 0:
            return OrdLt(PolyConst(Fraction(0)), PolyConst(Fraction(0)), 0)  # false
        return None
    # ord f < +inf
    return OrdLt(f, PolyConst(Fraction(0)), 0)


# -- projection ---------------------------------------------------------------


def _diff_of_poly(f: LDistPoly) -> Optional[tuple[Term, Term]]:
    if isinstance(f, ShiftVar):
        return Var(f.i), Const(f.a)
    if isinstance(f, ShiftDiff):
        return Var(f.i), Var(f.j)
    return None


def project_cell(C: Cell, ambient: Ambient) -> list[Precell]:
    """The exact projection {x | exists t: (x,t) in C} as a union of precells."""
    base = C.base
    if base.trivially_empty:
        return []

    if C.coset.is_zero:
        # fiber pinned to t = c(x); an upper bound can never hold there
        if C.upper is not None:
            return []
        if C.lower is not None:
            nz = poly_nonzero_cond(C.lower)
            base = base.conjoin([nz] if nz is not None else [], ambient)
        return [] if base.trivially_empty else [base]

    if C.lower is None:
        # value group unbounded below: some valid order always exists
        return [base]
    if C.upper is None:
        nz = poly_nonzero_cond(C.lower)
        base = base.conjoin([nz] if nz is not None else [], ambient)
        return [] if base.trivially_empty else [base]

    # two-sided: need an order = ord(lambda) mod n strictly inside the window
    n = C.coset.n
    lam_ord = C.coset.ord_class
    out: list[Precell] = []

    def window_cond(low_ord_residue: int) -> OrdLt:
        zeta = (lam_ord - low_ord_residue) % n
        step = zeta if zeta >= 1 else n
        return OrdLt(C.lower, C.upper, -step)

    if isinstance(C.lower, PolyConst):
        if C.lower.value == 0:
            return []
        residue = int(ambient.ord(C.lower.value)) % n
        piece = base.conjoin([window_cond(residue)], ambient)
        if not piece.trivially_empty:
            out.append(piece)
        return out

    d1, d2 = _diff_of_poly(C.lower)
    for lam in ambient.cosets(n, 1):
        residue = (C.lower.k + lam.ord_class) % n
        conds = [CosetCond(d1, d2, lam), window_cond(residue)]
        piece = base.conjoin(conds, ambient)
        if not piece.trivially_empty:
            out.append(piece)
    return out


# -- sections -----------------------------------------------------------------


@dataclass(frozen=True)
class SectionPiece:
    """On {x | conds}: t(x) = c(x) + coeff * (poly(x) if poly else 1)."""

    conds: tuple[PrecellCond, ...]
    center: Term
    coeff: Fraction
    poly: Optional[LDistPoly]

    def value(self, x: Sequence[Fraction], ambient: Ambient) -> Fraction:
        sigma = {i: v for i, v in enumerate(x)}
        base = eval_term(self.center, sigma)
        if self.coeff == 0:
            return base
        scale = poly_eval(self.poly, x, ambient) if self.poly is not None else Fraction(1)
        return base + self.coeff * scale


@dataclass(frozen=True)
class CellSection:
    """Piecewise description of a section x -> t(x) of a cell's projection."""

    pieces: tuple[SectionPiece, ...]

    def value_at(self, x: Sequence[Fraction], ambient: Ambient) -> Optional[Fraction]:
        for piece in self.pieces:
            if all(cond_holds(c, x, ambient) for c in piece.conds):
                return piece.value(x, ambient)
        return None


def _coset_pieces_of_poly(
    f: LDistPoly, n: int, m: int, ambient: Ambient
) -> list[tuple[tuple[PrecellCond, ...], Optional[Fraction]]]:
    """Pieces (conds, representative-of-f's-coset); representative None when f = 0."""
    if isinstance(f, PolyConst):
        if f.value == 0:
            return [((), None)]
        return [((), ambient.coset_rep(f.value, n, m))]
    d1, d2 = _diff_of_poly(f)
    pieces: list[tuple[tuple[PrecellCond, ...], Optional[Fraction]]] = []
    scale = Fraction(ambient.p) ** f.k
    for lam in ambient.cosets(n, m):
        rep = ambient.coset_rep(scale * lam.rep(ambient.p), n, m)
        pieces.append(((CosetCond(d1, d2, lam),), rep))
    pieces.append(((CosetCond(d1, d2, Coset.zero(1, 1)),), None))
    return pieces


def cell_section(C: Cell, ambient: Ambient) -> CellSection:
    """A definable section of the projection, built per the bound shape.

    Pieces are indexed by the coset of the governing bound; each piece's
    value has order as close as possible to that bound, which makes both
    order conditions hold at every projection point.
    """
    p = ambient.p
    lam_coset = C.coset
    if lam_coset.is_zero:
        return CellSection((SectionPiece((), C.center, Fraction(0), None),))

    n, m = lam_coset.n, lam_coset.m
    lam = lam_coset.rep(p)
    ord_lam = lam_coset.ord_class

    def no_bound_piece(conds: tuple[PrecellCond, ...]) -> SectionPiece:
        return SectionPiece(conds, C.center, lam, None)

    def lower_pieces(conds: tuple[PrecellCond, ...]) -> list[SectionPiece]:
        # order just above ord(lower); pieces by the coset of the lower bound
        if C.lower is None:
            return [no_bound_piece(conds)]
        out = []
        for sub, rep in _coset_pieces_of_poly(C.lower, n, m, ambient):
            if rep is None:
                continue  # lower bound infinite: empty fiber, piece omitted
            ord_mu = ambient.ord(rep)
            if ord_lam <= ord_mu:
                coeff = lam * Fraction(p) ** n / rep
            else:
                coeff = lam / rep
            out.append(SectionPiece(conds + sub, C.center, coeff, C.lower))
        return out

    if C.upper is None:
        return CellSection(tuple(lower_pieces(())))

    # upper bound present: order just below ord(upper)
    pieces: list[SectionPiece] = []
    for sub, rep in _coset_pieces_of_poly(C.upper, n, m, ambient):
        if rep is None:
            # upper bound infinite here: behave as if absent
            pieces.extend(lower_pieces(sub))
            continue
        ord_mu = ambient.ord(rep)
        if ord_lam < ord_mu:
            coeff = lam / rep
        else:
            coeff = lam / (Fraction(p) ** n * rep)
        pieces.append(SectionPiece(sub, C.center, coeff, C.upper))
    return CellSection(tuple(pieces))


# -- graph classification ------------------------------------------------------


def classify_graph(
    cells: Sequence[Cell],
    ambient: Ambient,
    sample_points: Optional[Sequence[Sequence[Fraction]]] = None,
) -> list[tuple[Cell, Term]]:
    """For cells partitioning a function graph, return each cell's trivial form.

    Every cell of a graph must pin its fiber (zero coset); the center is then
    the function on that cell.  Optionally cross-checks single-valuedness on
    sample base points.
    """
    for C in cells:
        if not C.coset.is_zero:
            raise ValueError("not a function graph: cell with a full coset fiber")
    if sample_points is not None:
        for x in sample_points:
            sigma = {i: v for i, v in enumerate(x)}
            values = {
                eval_term(C.center, sigma)
                for C in cells
                if precell_member(C.base, x, ambient)
            }
            if len(values) > 1:
                raise ValueError("not a function graph: multi-point fiber")
    return [(C, C.center) for C in cells]


# -- serialization -------------------------------------------------------------


def term_to_json(t: Term) -> dict:
    if isinstance(t, Var):
        return {"var": t.index}
    return {"const": format_rational(t.value)}


def term_from_json(d: dict) -> Term:
    if "var" in d:
        return Var(d["var"])
    return Const(parse_rational(d["const"]))


def poly_to_json(f: Optional[LDistPoly]) -> Optional[dict]:
    if f is None:
        return None
    if isinstance(f, PolyConst):
        return {"pi_exp": 0, "form": "const", "value": format_rational(f.value)}
    if isinstance(f, ShiftVar):
        return {"pi_exp": f.k, "form": "var-const", "var": f.i, "const": format_rational(f.a)}
    return {"pi_exp": f.k, "form": "var-var", "var1": f.i, "var2": f.j}


def poly_from_json(d: Optional[dict]) -> Optional[LDistPoly]:
    if d is None:
        return None
    if d["form"] == "const":
        return PolyConst(parse_rational(d["value"]))
    if d["form"] == "var-const":
        return ShiftVar(d["pi_exp"], d["var"], parse_rational(d["const"]))
    return ShiftDiff(d["pi_exp"], d["var1"], d["var2"])


def coset_to_json(c: Coset, ambient: Ambient) -> dict:
    lam = "0" if c.is_zero else f"p^{c.ord_class}*{c.unit_class}"
    return {"lambda": lam, "n": c.n, "m": c.m}


def coset_from_json(d: dict) -> Coset:
    if d["lambda"] == "0":
        return Coset.zero(d["n"], d["m"])
    head, unit = d["lambda"].split("*")
    return Coset(d["n"], d["m"], int(head[2:]), int(unit))


def cond_to_json(c: PrecellCond) -> dict:
    if isinstance(c, OrdLt):
        return {
            "kind": "ord-lt",
            "lhs": poly_to_json(c.a1),
            "rhs": poly_to_json(c.a2),
            "shift": c.shift,
            "negated": c.negated,
        }
    return {
        "kind": "coset",
        "b1": term_to_json(c.b1),
        "b2": term_to_json(c.b2),
        "coset": {
            "lambda": "0" if c.coset.is_zero else f"p^{c.coset.ord_class}*{c.coset.unit_class}",
            "n": c.coset.n,
            "m": c.coset.m,
        },
        "negated": c.negated,
    }


def cond_from_json(d: dict) -> PrecellCond:
    if d["kind"] == "ord-lt":
        return OrdLt(poly_from_json(d["lhs"]), poly_from_json(d["rhs"]), d["shift"], d["negated"])
    return CosetCond(
        term_from_json(d["b1"]),
        term_from_json(d["b2"]),
        coset_from_json(d["coset"]),
        d["negated"],
    )


def cell_to_json(C: Cell, ambient: Ambient) -> dict:
    return {
        "base": [[cond_to_json(c) for c in clause] for clause in C.base.dnf],
        "arity": C.arity,
        "center": term_to_json(C.center),
        "lower": poly_to_json(C.lower),
        "upper": poly_to_json(C.upper),
        "coset": coset_to_json(C.coset, ambient),
    }


def cell_from_json(d: dict) -> Cell:
    base = Precell(
        d["arity"],
        tuple(tuple(cond_from_json(c) for c in clause) for clause in d["base"]),
    )
    return Cell(
        base,
        term_from_json(d["center"]),
        poly_from_json(d["lower"]),
        poly_from_json(d["upper"]),
        coset_from_json(d["coset"]),
    )
