"""Quantifier elimination by innermost projection, plus the sampling oracle.

Each innermost existential is removed by decomposing its matrix into cells
over the bound variable and projecting every cell onto the base; universals
dualize through negation.  Truth of quantified formulas is certified by
evaluation over a finite universe whose order window is derived from the
formula, wide enough that every atom's truth value is realized.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .arith import Ambient, format_rational
from .cells import (
    CosetCond,
    OrdLt,
    PolyConst,
    Precell,
    PrecellCond,
    ShiftDiff,
    ShiftVar,
    project_cell,
)
from .decompose import decompose_qf
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
    TrueF,
    Var,
    all_vars,
    atoms_of,
    constants_of,
    eval_qf,
    eval_quantified,
    free_vars,
    is_atom,
    is_qf,
    nnf,
    quantifier_count,
)

# -- prenexing ------------------------------------------------------------------


def _rename_term(t, old: int, new: int):
    if isinstance(t, Var) and t.index == old:
        return Var(new)
    return t


def rename_free_var(f: Formula, old: int, new: int) -> Formula:
    """Substitute x_new for free occurrences of x_old."""
    if isinstance(f, D4):
        return D4(f.k, *(_rename_term(t, old, new) for t in (f.t1, f.t2, f.t3, f.t4)))
    if isinstance(f, Rnm):
        return Rnm(f.n, f.m, *(_rename_term(t, old, new) for t in (f.t1, f.t2, f.t3)))
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return Not(rename_free_var(f.body, old, new))
    if isinstance(f, And):
        return And(tuple(rename_free_var(g, old, new) for g in f.items))
    if isinstance(f, Or):
        return Or(tuple(rename_free_var(g, old, new) for g in f.items))
    if f.var == old:
        return f  # shadowed
    cls = Exists if isinstance(f, Exists) else Forall
    return cls(f.var, rename_free_var(f.body, old, new))


def prenex(f: Formula) -> tuple[list[tuple[str, int]], Formula]:
    """(prefix, matrix) with fresh bound variables; input must be in NNF."""
    counter = [max(all_vars(f), default=-1) + 1]

    def fresh() -> int:
        v = counter[0]
        counter[0] += 1
        return v

    def go(g: Formula) -> tuple[list[tuple[str, int]], Formula]:
        if is_atom(g) or isinstance(g, (TrueF, FalseF, Not)):
            return [], g
        if isinstance(g, (And, Or)):
            prefix: list[tuple[str, int]] = []
            matrices = []
            for item in g.items:
                px, mx = go(item)
                prefix.extend(px)
                matrices.append(mx)
            node = And if isinstance(g, And) else Or
            return prefix, node(tuple(matrices))
        # quantifier: rename its variable fresh, then pull
        v = fresh()
        body = rename_free_var(g.body, g.var, v)
        px, mx = go(body)
        kind = "exists" if isinstance(g, Exists) else "forall"
        return [(kind, v)] + px, mx

    return go(f)


# -- precell -> formula ----------------------------------------------------------


def _poly_term_pair(poly, remap: dict[int, int]):
    if isinstance(poly, PolyConst):
        return Const(poly.value), Const(Fraction(0)), 0
    if isinstance(poly, ShiftVar):
        return Var(remap[poly.i]), Const(poly.a), poly.k
    return Var(remap[poly.i]), Var(remap[poly.j]), poly.k


def _remap_term(t, remap: dict[int, int]):
    if isinstance(t, Var):
        return Var(remap[t.index])
    return t


def cond_to_literal(cond: PrecellCond, remap: dict[int, int], ambient: Ambient) -> Formula:
    if isinstance(cond, OrdLt):
        l1, l2, k1 = _poly_term_pair(cond.a1, remap)
        r1, r2, k2 = _poly_term_pair(cond.a2, remap)
        atom: Formula = D4(cond.shift + k2 - k1, l1, l2, r1, r2)
    else:
        c = cond.coset
        rep = Const(c.rep(ambient.p))
        atom = Rnm(c.n, c.m, _remap_term(cond.b2, remap), _remap_term(cond.b1, remap), rep)
    return Not(atom) if cond.negated else atom


def precell_to_formula(P: Precell, remap: dict[int, int], ambient: Ambient) -> Formula:
    if not P.dnf:
        return FALSE
    disjuncts = []
    for clause in P.dnf:
        if not clause:
            return TRUE
        lits = tuple(cond_to_literal(c, remap, ambient) for c in clause)
        disjuncts.append(lits[0] if len(lits) == 1 else And(lits))
    return disjuncts[0] if len(disjuncts) == 1 else Or(tuple(disjuncts))


# -- elimination ------------------------------------------------------------------


@dataclass(frozen=True)
class QeStage:
    var: int
    quantifier: str
    cell_count: int
    precell_count: int

    def to_json(self) -> dict:
        return {
            "var": self.var,
            "quantifier": self.quantifier,
            "cells": self.cell_count,
            "precells": self.precell_count,
        }


@dataclass
class QeTrace:
    input_formula: Formula
    stages: list[QeStage] = field(default_factory=list)
    output_formula: Optional[Formula] = None

    def to_json(self) -> dict:
        from .parser import print_formula

        return {
            "input": print_formula(self.input_formula),
            "stages": [s.to_json() for s in self.stages],
            "output": print_formula(self.output_formula)
            if self.output_formula is not None
            else None,
        }


def _eliminate_exists(var: int, matrix: Formula, ambient: Ambient, stages: list) -> Formula:
    frees = sorted(free_vars(matrix) - {var})
    if var not in free_vars(matrix):
        # the bound variable is unconstrained; an element always exists
        stages.append(QeStage(var, "exists", 0, 0))
        return matrix
    remap = {v: i for i, v in enumerate(frees)}
    remap[var] = len(frees)
    inverse = {i: v for v, i in remap.items()}
    matrix2 = matrix
    # relabel via a fresh intermediate range to avoid collisions
    tmp_base = max(all_vars(matrix), default=-1) + 1
    for old, new in remap.items():
        matrix2 = rename_free_var(matrix2, old, tmp_base + new)
    for old, new in remap.items():
        matrix2 = rename_free_var(matrix2, tmp_base + new, new)
    cells = decompose_qf(matrix2, len(frees), ambient)
    precells = [P for C in cells for P in project_cell(C, ambient)]
    stages.append(QeStage(var, "exists", len(cells), len(precells)))
    pieces = [precell_to_formula(P, inverse, ambient) for P in precells]
    pieces = [g for g in pieces if not isinstance(g, FalseF)]
    if not pieces:
        return FALSE
    if any(isinstance(g, TrueF) for g in pieces):
        return TRUE
    return pieces[0] if len(pieces) == 1 else Or(tuple(pieces))


def eliminate_innermost(f: Formula, ambient: Ambient, stages: Optional[list] = None) -> Formula:
    """Remove the innermost quantifier of a prenex NNF formula."""
    if stages is None:
        stages = []
    prefix, matrix = prenex(nnf(f))
    if not prefix:
        return f
    kind, var = prefix[-1]
    if kind == "exists":
        matrix = _eliminate_exists(var, matrix, ambient, stages)
    else:
        inner = nnf(Not(matrix))
        res = _eliminate_exists(var, inner, ambient, stages)
        stages[-1] = QeStage(var, "forall", stages[-1].cell_count, stages[-1].precell_count)
        matrix = nnf(Not(res))
    out = matrix
    for kind, v in reversed(prefix[:-1]):
        out = Exists(v, out) if kind == "exists" else Forall(v, out)
    return out


def qe(f: Formula, ambient: Ambient) -> tuple[Formula, QeTrace]:
    """Equivalent quantifier-free formula plus the per-stage trace."""
    trace = QeTrace(f)
    if is_qf(f):
        trace.output_formula = f
        return f, trace
    prefix, matrix = prenex(nnf(f))
    for kind, var in reversed(prefix):
        if kind == "exists":
            matrix = _eliminate_exists(var, nnf(matrix), ambient, trace.stages)
        else:
            inner = nnf(Not(matrix))
            matrix = _eliminate_exists(var, inner, ambient, trace.stages)
            trace.stages[-1] = QeStage(
                var, "forall", trace.stages[-1].cell_count, trace.stages[-1].precell_count
            )
            matrix = nnf(Not(matrix))
    trace.output_formula = matrix
    return matrix, trace


# -- sampling universes ------------------------------------------------------------


@dataclass(frozen=True)
class SampleUniverse:
    """All p^j * w for j in [lo, hi], w a unit mod p^m_star, plus 0."""

    lo: int
    hi: int
    m_star: int
    elements: tuple[Fraction, ...]


def _shift_weight(f: Formula) -> int:
    return sum(abs(a.k) if isinstance(a, D4) else a.n for a in atoms_of(f))


def build_universe(f: Formula, padding: int, ambient: Ambient) -> SampleUniverse:
    """Finite universe realizing every relevant order around f's constants.

    The window spans the constants' orders extended by the sum of atom
    shifts and coset moduli (plus one step per quantifier), plus the
    requested padding.
    """
    if padding < 0:
        raise ValueError("padding must be non-negative")
    atoms = atoms_of(f)
    kf = _shift_weight(f) + quantifier_count(f)
    m_star = max((a.m for a in atoms if isinstance(a, Rnm)), default=1)
    orders = [int(ambient.ord(c)) for c in constants_of(f) if c != 0]
    lo0, hi0 = (min(orders + [0]), max(orders + [0]))
    lo, hi = lo0 - kf - padding, hi0 + kf + padding
    p = ambient.p
    units = [w for w in range(1, p**m_star) if w % p != 0]
    elements = [Fraction(0)]
    for j in range(lo, hi + 1):
        scale = Fraction(p) ** j
        for w in units:
            elements.append(scale * w)
    return SampleUniverse(lo, hi, m_star, tuple(elements))


# -- adaptive quantifier truth ---------------------------------------------------
#
# A fixed multiplicative universe cannot witness conditions like
# "t - x0 in lambda*Q_{n,m}" when x0 is generic: the witnesses live at
# x0 + p^j*w, not at p^j*w.  Quantified truth is therefore evaluated over
# translation-closed pools b + p^j*w centered at the values in scope,
# rebuilt at every quantifier; candidates are deduplicated by their order
# and angular-component pattern relative to the scope, which is all the
# atoms can observe.


def _pattern_of(
    t: Fraction,
    scope: Sequence[Fraction],
    ambient: Ambient,
    n_hat: int,
    m_hat: int,
    lo: int,
    hi: int,
):
    key = []
    for b in scope:
        d = t - b
        if d == 0:
            key.append(("z",))
            continue
        o = int(ambient.ord(d))
        clipped = min(max(o, lo - 1), hi + 1)
        key.append((clipped, o % n_hat, ambient.ac(d, m_hat)))
    return tuple(key)


def _adaptive_pool(
    scope: Sequence[Fraction],
    ambient: Ambient,
    n_hat: int,
    m_hat: int,
    slack: int,
) -> list[Fraction]:
    """Witness candidates b + p^j*w, one per observable pattern."""
    p = ambient.p
    orders = [0]
    for v in scope:
        if v != 0:
            orders.append(int(ambient.ord(v)))
    for i, a in enumerate(scope):
        for b in scope[i + 1 :]:
            if a != b:
                orders.append(int(ambient.ord(a - b)))
    lo, hi = min(orders) - slack, max(orders) + slack
    units = [w for w in range(1, p**m_hat) if w % p != 0]
    pool: list[Fraction] = []
    seen = set()
    for t in list(scope) + [Fraction(0)]:
        key = _pattern_of(t, scope, ambient, n_hat, m_hat, lo, hi)
        if key not in seen:
            seen.add(key)
            pool.append(t)
    for b in scope:
        for j in range(lo, hi + 1):
            pj = Fraction(p) ** j
            for w in units:
                t = b + pj * w
                key = _pattern_of(t, scope, ambient, n_hat, m_hat, lo, hi)
                if key not in seen:
                    seen.add(key)
                    pool.append(t)
    return pool


def adaptive_truth(f: Formula, sigma, ambient: Ambient, padding: int = 2) -> bool:
    """Truth over Q_p via per-quantifier translation-closed witness pools."""
    from math import lcm

    atoms = atoms_of(f)
    n_hat = 1
    for a in atoms:
        if isinstance(a, Rnm):
            n_hat = lcm(n_hat, a.n)
    m_hat = max((a.m for a in atoms if isinstance(a, Rnm)), default=1)
    slack = _shift_weight(f) + m_hat + 1 + padding
    consts = sorted(constants_of(f))

    def go(g: Formula, env: dict) -> bool:
        if isinstance(g, TrueF):
            return True
        if isinstance(g, FalseF):
            return False
        if is_atom(g):
            return eval_qf(g, env, ambient)
        if isinstance(g, Not):
            return not go(g.body, env)
        if isinstance(g, And):
            return all(go(h, env) for h in g.items)
        if isinstance(g, Or):
            return any(go(h, env) for h in g.items)
        scope = list(dict.fromkeys(list(env.values()) + consts + [Fraction(0)]))
        pool = _adaptive_pool(scope, ambient, n_hat, m_hat, slack)
        if isinstance(g, Exists):
            for t in pool:
                if go(g.body, {**env, g.var: t}):
                    return True
            return False
        for t in pool:
            if not go(g.body, {**env, g.var: t}):
                return False
        return True

    return go(f, dict(sigma))


# -- equivalence checking ------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    equivalent: bool
    counterexample: Optional[dict]
    trials: int

    def describe(self) -> str:
        if self.equivalent:
            return f"Equivalent-on-samples ({self.trials} trials)"
        parts = ", ".join(
            f"x{v}={format_rational(val)}" for v, val in sorted(self.counterexample.items())
        )
        return f"Counterexample({parts})"


def _sample_value(rng: random.Random, universe: Sequence[Fraction]) -> Fraction:
    if rng.random() < 0.5:
        return rng.choice(universe)
    num = rng.randint(-100, 100)
    den = rng.randint(1, 30)
    return Fraction(num, den)


def equiv_check(
    f: Formula,
    g: Formula,
    trials: int,
    seed: int,
    ambient: Ambient,
    padding: int = 2,
) -> Verdict:
    """Sampled equivalence: quantified formulas evaluate over a derived universe."""
    fv, gv = free_vars(f), free_vars(g)
    if not (fv <= gv or gv <= fv):
        raise ValueError("free-variable mismatch")
    rng = random.Random(seed)
    universe = build_universe(Or((f, g)), padding, ambient).elements
    frees = sorted(fv | gv)

    def evaluate(h: Formula, sigma) -> bool:
        if is_qf(h):
            return eval_qf(h, sigma, ambient)
        return adaptive_truth(h, sigma, ambient, padding)

    for trial in range(trials):
        if trial == 0:
            sigma = {v: Fraction(0) for v in frees}
        else:
            sigma = {v: _sample_value(rng, universe) for v in frees}
        if evaluate(f, sigma) != evaluate(g, sigma):
            return Verdict(False, sigma, trial + 1)
    return Verdict(True, None, trials)
