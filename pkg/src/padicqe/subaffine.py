"""Restricted-addition calculus: box expressions, normal forms, atom cells.

The binary operations add their arguments only when both have order at
least a threshold (0 for the plain ring-restricted forms) and return 0
otherwise.  Every expression built from them, scalar multiplications,
variables and constants collapses, on each region of a finite partition,
to one of three shapes: an x-only expression, a*t, or a*t truncated-added
to an x-only expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .arith import INF, Ambient, Coset, format_rational

# -- expressions ----------------------------------------------------------------


@dataclass(frozen=True)
class BoxVar:
    index: int


@dataclass(frozen=True)
class BoxConst:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Scale:
    coeff: Fraction
    body: "BoxExpr"

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))


@dataclass(frozen=True)
class BoxPlus:
    left: "BoxExpr"
    right: "BoxExpr"


@dataclass(frozen=True)
class BoxMinus:
    left: "BoxExpr"
    right: "BoxExpr"


@dataclass(frozen=True)
class BoxPlusGamma:
    gamma: int
    left: "BoxExpr"
    right: "BoxExpr"


@dataclass(frozen=True)
class Diff:
    """Exact difference left - right; internal condition plumbing only."""

    left: "BoxExpr"
    right: "BoxExpr"


BoxExpr = Union[BoxVar, BoxConst, Scale, BoxPlus, BoxMinus, BoxPlusGamma, Diff]

ZERO_E = BoxConst(Fraction(0))


def eval_box(e: BoxExpr, sigma: Mapping[int, Fraction], ambient: Ambient) -> Fraction:
    """Exact evaluation with the threshold semantics."""
    if isinstance(e, BoxVar):
        return sigma[e.index]
    if isinstance(e, BoxConst):
        return e.value
    if isinstance(e, Scale):
        return e.coeff * eval_box(e.body, sigma, ambient)
    if isinstance(e, Diff):
        return eval_box(e.left, sigma, ambient) - eval_box(e.right, sigma, ambient)
    l = eval_box(e.left, sigma, ambient)
    r = eval_box(e.right, sigma, ambient)
    gamma = e.gamma if isinstance(e, BoxPlusGamma) else 0
    if ambient.ord(l) < gamma or ambient.ord(r) < gamma:
        return Fraction(0)
    return l - r if isinstance(e, BoxMinus) else l + r


def box_vars(e: BoxExpr) -> set[int]:
    if isinstance(e, BoxVar):
        return {e.index}
    if isinstance(e, BoxConst):
        return set()
    if isinstance(e, Scale):
        return box_vars(e.body)
    return box_vars(e.left) | box_vars(e.right)


def box_to_text(e: BoxExpr) -> str:
    if isinstance(e, BoxVar):
        return f"x{e.index}"
    if isinstance(e, BoxConst):
        return format_rational(e.value)
    if isinstance(e, Scale):
        return f"{format_rational(e.coeff)} * {box_to_text(e.body)}"
    if isinstance(e, BoxPlus):
        return f"boxp({box_to_text(e.left)}, {box_to_text(e.right)})"
    if isinstance(e, BoxMinus):
        return f"boxm({box_to_text(e.left)}, {box_to_text(e.right)})"
    if isinstance(e, BoxPlusGamma):
        return f"boxg[{e.gamma}]({box_to_text(e.left)}, {box_to_text(e.right)})"
    return f"diff({box_to_text(e.left)}, {box_to_text(e.right)})"


def distribute_scale(a: Fraction, gamma: int, e1: BoxExpr, e2: BoxExpr, ambient: Ambient) -> BoxPlusGamma:
    """a * (e1 boxg[gamma] e2) = (a*e1) boxg[gamma + ord a] (a*e2)."""
    a = Fraction(a)
    if a == 0:
        raise ValueError("the scale-distribution rule requires a nonzero scalar")
    return BoxPlusGamma(gamma + int(ambient.ord(a)), Scale(a, e1), Scale(a, e2))


def _scale_expr(c: Fraction, e: BoxExpr) -> BoxExpr:
    if c == 0 or e == ZERO_E:
        return ZERO_E
    if c == 1:
        return e
    if isinstance(e, BoxConst):
        return BoxConst(c * e.value)
    if isinstance(e, Scale):
        return _scale_expr(c * e.coeff, e.body)
    return Scale(c, e)


# -- normal forms ----------------------------------------------------------------


@dataclass(frozen=True)
class PureX:
    """Value h(x); no occurrence of the distinguished variable."""

    expr: BoxExpr


@dataclass(frozen=True)
class Linear:
    """Value a * t."""

    a: Fraction


@dataclass(frozen=True)
class Truncated:
    """Value a*t boxg[gamma] d(x) with a != 0 and d t-free."""

    a: Fraction
    gamma: int
    d: BoxExpr


NormalForm = Union[PureX, Linear, Truncated]


def eval_normal(
    nf: NormalForm, sigma: Mapping[int, Fraction], t: Fraction, ambient: Ambient
) -> Fraction:
    if isinstance(nf, PureX):
        return eval_box(nf.expr, sigma, ambient)
    if isinstance(nf, Linear):
        return nf.a * t
    at = nf.a * t
    d = eval_box(nf.d, sigma, ambient)
    if ambient.ord(at) < nf.gamma or ambient.ord(d) < nf.gamma:
        return Fraction(0)
    return at + d


# -- piece conditions --------------------------------------------------------------


@dataclass(frozen=True)
class XOrd:
    """ord expr(x) >= threshold (geq) or < threshold."""

    expr: BoxExpr
    threshold: int
    geq: bool


@dataclass(frozen=True)
class TOrd:
    """ord(t - center(x)) >= threshold (geq) or < threshold."""

    center: BoxExpr
    threshold: int
    geq: bool


@dataclass(frozen=True)
class TOrdRel:
    """ord(t - center(x)) < ord(ref(x)) + shift (less) or its complement."""

    center: BoxExpr
    ref: BoxExpr
    shift: int
    less: bool


BoxCond = Union[XOrd, TOrd, TOrdRel]


@dataclass(frozen=True)
class BoxCell:
    """A region {(x,t)} cut out by order conditions plus an optional coset fiber."""

    x_conds: tuple[XOrd, ...] = ()
    t_conds: tuple[BoxCond, ...] = ()
    center: Optional[BoxExpr] = None
    coset: Optional[Coset] = None


def box_cond_holds(
    cond: BoxCond, sigma: Mapping[int, Fraction], t: Fraction, ambient: Ambient
) -> bool:
    if isinstance(cond, XOrd):
        o = ambient.ord(eval_box(cond.expr, sigma, ambient))
        return (o >= cond.threshold) == cond.geq
    if isinstance(cond, TOrd):
        o = ambient.ord(t - eval_box(cond.center, sigma, ambient))
        return (o >= cond.threshold) == cond.geq
    oc = ambient.ord(t - eval_box(cond.center, sigma, ambient))
    orf = ambient.ord(eval_box(cond.ref, sigma, ambient))
    return (oc < orf + cond.shift) == cond.less


def box_cell_member(
    cell: BoxCell, sigma: Mapping[int, Fraction], t: Fraction, ambient: Ambient
) -> bool:
    for cond in cell.x_conds:
        if not box_cond_holds(cond, sigma, t, ambient):
            return False
    for cond in cell.t_conds:
        if not box_cond_holds(cond, sigma, t, ambient):
            return False
    if cell.coset is not None:
        d = t - eval_box(cell.center, sigma, ambient)
        if cell.coset.is_zero:
            return d == 0
        return d != 0 and ambient.rho(d, cell.coset.n, cell.coset.m) == cell.coset
    return True


# -- normalization -----------------------------------------------------------------

# a piece is (x_conds, t_conds, a, d, d_min, at_min): value a*t + d(x) on the
# region, with known lower bounds for ord d(x) (d_min) and ord(a*t) (at_min);
# None means no bound is known.
_Piece = tuple[list, list, Fraction, BoxExpr, object, object]


def _static_xord(cond: XOrd, ambient: Ambient) -> Optional[bool]:
    if isinstance(cond.expr, BoxConst):
        o = ambient.ord(cond.expr.value)
        return (o >= cond.threshold) == cond.geq
    return None


def _add_conds(
    xc: list, tc: list, new_x: Sequence[XOrd], new_t: Sequence[BoxCond], ambient: Ambient
) -> Optional[tuple[list, list]]:
    """Merge condition lists; None when a static or syntactic contradiction shows."""
    out_x = list(xc)
    for c in new_x:
        s = _static_xord(c, ambient)
        if s is False:
            return None
        if s is True or c in out_x:
            continue
        opposite = XOrd(c.expr, c.threshold, not c.geq)
        if opposite in out_x:
            return None
        out_x.append(c)
    out_t = list(tc)
    for c in new_t:
        if c in out_t:
            continue
        if isinstance(c, TOrd):
            opposite: BoxCond = TOrd(c.center, c.threshold, not c.geq)
        elif isinstance(c, TOrdRel):
            opposite = TOrdRel(c.center, c.ref, c.shift, not c.less)
        else:
            opposite = None
        if opposite is not None and opposite in out_t:
            return None
        out_t.append(c)
    return out_x, out_t


def _ord_ge_splits(
    a: Fraction, d: BoxExpr, d_min, at_min, gamma: int, ambient: Ambient
) -> list[tuple[list, list, bool, object, object]]:
    """Splits of a region by [ord(a*t + d(x)) >= gamma].

    Yields (extra_x, extra_t, alive, d_min', at_min') pieces that partition
    the region; bounds are updated on the alive branch.
    """
    if a == 0:
        if isinstance(d, BoxConst):
            alive = ambient.ord(d.value) >= gamma
            return [([], [], alive, d_min, at_min)]
        if d_min is not None and d_min >= gamma:
            return [([], [], True, d_min, at_min)]
        lo = gamma if d_min is None else max(d_min, gamma)
        return [
            ([XOrd(d, gamma, True)], [], True, lo, at_min),
            ([XOrd(d, gamma, False)], [], False, d_min, at_min),
        ]
    ord_a = int(ambient.ord(a))
    if d == ZERO_E:
        if at_min is not None and at_min >= gamma:
            return [([], [], True, d_min, at_min)]
        cond = TOrd(ZERO_E, gamma - ord_a, True)
        return [
            ([], [cond], True, d_min, max_bound(at_min, gamma)),
            ([], [TOrd(ZERO_E, gamma - ord_a, False)], False, d_min, at_min),
        ]
    center = _scale_expr(Fraction(-1) / a, d)
    cond = TOrd(center, gamma - ord_a, True)
    new_at = max_bound(at_min, min(gamma, d_min))
    return [
        ([], [cond], True, d_min, new_at),
        ([], [TOrd(center, gamma - ord_a, False)], False, d_min, at_min),
    ]


def max_bound(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _pieces(e: BoxExpr, t_var: int, ambient: Ambient) -> list[_Piece]:
    if isinstance(e, BoxVar):
        if e.index == t_var:
            return [([], [], Fraction(1), ZERO_E, INF, None)]
        return [([], [], Fraction(0), e, None, INF)]
    if isinstance(e, BoxConst):
        return [([], [], Fraction(0), e, ambient.ord(e.value), INF)]
    if isinstance(e, Scale):
        out = []
        for xc, tc, a, d, dm, am in _pieces(e.body, t_var, ambient):
            if e.coeff == 0:
                out.append((xc, tc, Fraction(0), ZERO_E, INF, INF))
                continue
            oc = int(ambient.ord(e.coeff))
            dm2 = None if dm is None else dm + oc
            am2 = None if am is None else am + oc
            out.append((xc, tc, e.coeff * a, _scale_expr(e.coeff, d), dm2, am2))
        return out
    if isinstance(e, BoxPlus):
        return _box_gamma(0, e.left, e.right, 1, t_var, ambient)
    if isinstance(e, BoxMinus):
        return _box_gamma(0, e.left, e.right, -1, t_var, ambient)
    if isinstance(e, BoxPlusGamma):
        return _box_gamma(e.gamma, e.left, e.right, 1, t_var, ambient)
    raise TypeError(f"not a box expression: {e!r}")


def _box_gamma(
    gamma: int, left: BoxExpr, right: BoxExpr, sign: int, t_var: int, ambient: Ambient
) -> list[_Piece]:
    out: list[_Piece] = []
    zero_piece = (Fraction(0), ZERO_E, INF, INF)
    for xc1, tc1, a1, d1, dm1, am1 in _pieces(left, t_var, ambient):
        for xc2, tc2, a2, d2, dm2, am2 in _pieces(right, t_var, ambient):
            merged = _add_conds(xc1, tc1, xc2, tc2, ambient)
            if merged is None:
                continue
            xc0, tc0 = merged
            for ex1, et1, alive1, dm1b, am1b in _ord_ge_splits(
                a1, d1, dm1, am1, gamma, ambient
            ):
                step1 = _add_conds(xc0, tc0, ex1, et1, ambient)
                if step1 is None:
                    continue
                xcA, tcA = step1
                if not alive1:
                    out.append((xcA, tcA, *zero_piece))
                    continue
                for ex2, et2, alive2, dm2b, am2b in _ord_ge_splits(
                    a2, d2, dm2, am2, gamma, ambient
                ):
                    step2 = _add_conds(xcA, tcA, ex2, et2, ambient)
                    if step2 is None:
                        continue
                    xcB, tcB = step2
                    if not alive2:
                        out.append((xcB, tcB, *zero_piece))
                        continue
                    a = a1 + sign * a2
                    d2s = _scale_expr(Fraction(sign), d2)
                    if d1 == ZERO_E:
                        d, dm = d2s, dm2b
                    elif d2s == ZERO_E:
                        d, dm = d1, dm1b
                    else:
                        gd = min(dm1b, dm2b)
                        d, dm = BoxPlusGamma(int(gd), d1, d2s), gd
                    am = _merged_at_bound(
                        a, (a1, am1b), (a2, am2b), ambient
                    )
                    out.append((xcB, tcB, a, d, dm, am))
    return out


def _merged_at_bound(a: Fraction, info1, info2, ambient: Ambient):
    """Known lower bound for ord(a*t) from the branch bounds on ord(a_i*t)."""
    if a == 0:
        return INF
    t_bounds = []
    for ai, ami in (info1, info2):
        if ai != 0 and ami is not None:
            t_bounds.append(ami - int(ambient.ord(ai)))
    if not t_bounds:
        return None
    return int(ambient.ord(a)) + max(t_bounds)


def normalize(e: BoxExpr, t_var: int, ambient: Ambient) -> list[tuple[BoxCell, NormalForm]]:
    """Partition of (x, t)-space with one normal shape per region.

    Regions are cut by integer order thresholds on t relative to x-expression
    centers and by order thresholds on x-expressions; on each region the
    expression's value is PureX, Linear, or Truncated, exactly.
    """
    out: list[tuple[BoxCell, NormalForm]] = []
    for xc, tc, a, d, dm, am in _pieces(e, t_var, ambient):
        cell = BoxCell(tuple(xc), tuple(tc))
        if a == 0:
            out.append((cell, PureX(d)))
            continue
        if d == ZERO_E:
            out.append((cell, Linear(a)))
            continue
        out.append((cell, Truncated(a, int(min(dm, am)), d)))
    return out


def piecewise_value(
    pieces: Sequence[tuple[BoxCell, NormalForm]],
    sigma: Mapping[int, Fraction],
    t: Fraction,
    ambient: Ambient,
) -> Optional[Fraction]:
    for cell, nf in pieces:
        if box_cell_member(cell, sigma, t, ambient):
            return eval_normal(nf, sigma, t, ambient)
    return None


# -- atom decompositions -------------------------------------------------------------


def decompose_s1(
    a: Fraction,
    gamma: int,
    d: BoxExpr,
    lam: Fraction,
    n: int,
    m: int,
    ambient: Ambient,
) -> list[BoxCell]:
    """Cells for {(x,t) | a*t boxg[gamma] d(x) in lam * Q_{n,m}}, a != 0."""
    a = Fraction(a)
    if a == 0:
        raise ValueError("decompose_s1 requires a nonzero linear coefficient")
    lam = Fraction(lam)
    thr = gamma - int(ambient.ord(a))
    center = _scale_expr(Fraction(-1) / a, d)
    d_live = () if isinstance(d, BoxConst) and ambient.ord(d.value) >= gamma else (XOrd(d, gamma, True),)
    d_dead: Optional[tuple] = (XOrd(d, gamma, False),)
    if isinstance(d, BoxConst):
        d_dead = None if ambient.ord(d.value) >= gamma else ()
    cells: list[BoxCell] = []
    if lam == 0:
        cells.append(BoxCell(t_conds=(TOrd(ZERO_E, thr, False),)))
        if d_dead is not None:
            cells.append(BoxCell(x_conds=tuple(d_dead), t_conds=(TOrd(ZERO_E, thr, True),)))
        cells.append(
            BoxCell(
                x_conds=d_live,
                t_conds=(TOrd(ZERO_E, thr, True),),
                center=center,
                coset=Coset.zero(n, m),
            )
        )
        return cells
    cells.append(
        BoxCell(
            x_conds=d_live,
            t_conds=(TOrd(ZERO_E, thr, True),),
            center=center,
            coset=ambient.rho(lam / a, n, m),
        )
    )
    return cells


def decompose_s2(
    a2: Fraction,
    gamma2: int,
    d2: BoxExpr,
    a3: Fraction,
    gamma3: int,
    d3: BoxExpr,
    ambient: Ambient,
) -> list[BoxCell]:
    """Cells for {(x,t) | ord(a2*t boxg[g2] d2) < ord(a3*t boxg[g3] d3)}."""
    a2, a3 = Fraction(a2), Fraction(a3)
    if a2 == 0 or a3 == 0:
        raise ValueError("decompose_s2 requires nonzero linear coefficients")
    o2, o3 = int(ambient.ord(a2)), int(ambient.ord(a3))
    thr2, thr3 = gamma2 - o2, gamma3 - o3
    d2p = _scale_expr(Fraction(-1) / a2, d2)
    d3p = _scale_expr(Fraction(-1) / a3, d3)
    ediff = Diff(d2p, d3p)

    live2_t, live2_x = (TOrd(ZERO_E, thr2, True),), (XOrd(d2, gamma2, True),)
    dead3 = [
        ((TOrd(ZERO_E, thr3, False),), ()),
        ((TOrd(ZERO_E, thr3, True),), (XOrd(d3, gamma3, False),)),
    ]
    live3_t, live3_x = (TOrd(ZERO_E, thr3, True),), (XOrd(d3, gamma3, True),)

    cells: list[BoxCell] = []
    # left live, right collapsed to 0: need left value nonzero
    for t_dead, x_dead in dead3:
        for mu in ambient.cosets(1, 1):
            cells.append(
                BoxCell(
                    x_conds=live2_x + x_dead,
                    t_conds=live2_t + t_dead,
                    center=d2p,
                    coset=mu,
                )
            )
    base_x = live2_x + live3_x
    base_t = live2_t + live3_t
    # both live: compare ord a2(t - d2') with ord a3(t - d3')
    if o2 < o3:
        cells.append(
            BoxCell(x_conds=base_x, t_conds=base_t + (TOrdRel(d2p, ediff, 0, True),))
        )
    cells.append(
        BoxCell(
            x_conds=base_x,
            t_conds=base_t
            + (
                TOrdRel(d2p, ediff, 0, False),
                TOrdRel(d2p, ediff, 1, True),
                TOrdRel(d3p, ediff, o2 - o3 + 1, False),
            ),
        )
    )
    cells.append(
        BoxCell(
            x_conds=base_x,
            t_conds=base_t
            + (TOrdRel(d2p, ediff, 1, False), TOrdRel(d2p, ediff, o3 - o2, True)),
        )
    )
    return cells


def check_function_form(
    e: BoxExpr, t_var: int, ambient: Ambient
) -> list[tuple[BoxCell, str, NormalForm]]:
    """Per-region shape report: "pure-x", "linear", or "truncated"."""
    out = []
    for cell, nf in normalize(e, t_var, ambient):
        if isinstance(nf, PureX):
            shape = "pure-x"
        elif isinstance(nf, Linear):
            shape = "linear"
        else:
            shape = "truncated"
        out.append((cell, shape, nf))
    return out


def find_mismatch(
    pieces: Sequence[tuple[BoxCell, NormalForm]],
    oracle,
    probes: Sequence[tuple[Mapping[int, Fraction], Fraction]],
    ambient: Ambient,
):
    """First probe point where the piecewise value disagrees with the oracle.

    Probes are (sigma, t) pairs; the oracle maps them to the required value.
    Returns (sigma, t, got, want) or None.
    """
    for sigma, t in probes:
        want = oracle(sigma, t)
        got = piecewise_value(pieces, sigma, t, ambient)
        if got != want:
            return (sigma, t, got, want)
    return None


# -- serialization ---------------------------------------------------------------


def box_cond_to_json(c: BoxCond) -> dict:
    if isinstance(c, XOrd):
        return {"kind": "x-ord", "expr": box_to_text(c.expr), "threshold": c.threshold, "geq": c.geq}
    if isinstance(c, TOrd):
        return {"kind": "t-ord", "center": box_to_text(c.center), "threshold": c.threshold, "geq": c.geq}
    return {
        "kind": "t-ord-rel",
        "center": box_to_text(c.center),
        "ref": box_to_text(c.ref),
        "shift": c.shift,
        "less": c.less,
    }


def normal_form_to_json(nf: NormalForm) -> dict:
    if isinstance(nf, PureX):
        return {"shape": "pure-x", "expr": box_to_text(nf.expr)}
    if isinstance(nf, Linear):
        return {"shape": "linear", "a": format_rational(nf.a)}
    return {
        "shape": "truncated",
        "a": format_rational(nf.a),
        "gamma": nf.gamma,
        "d": box_to_text(nf.d),
    }


def piece_to_json(cell: BoxCell, nf: NormalForm) -> dict:
    return {
        "x_conds": [box_cond_to_json(c) for c in cell.x_conds],
        "t_conds": [box_cond_to_json(c) for c in cell.t_conds],
        "form": normal_form_to_json(nf),
    }
