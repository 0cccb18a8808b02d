"""First-order syntax and semantics for the distance language.

Atoms are the shifted order comparison D4[k](x, y, z, t), meaning
ord(x - y) < ord(z - t) + k, and the coset relation R[n,m](x, y, z),
meaning y - x lies in z * Q_{n,m}.  Quantifier-free evaluation is exact;
quantified evaluation ranges over an explicit finite universe and serves
as the semantic oracle for the cell machinery.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .arith import INF, Ambient, format_rational

# -- terms ------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


Term = Union[Var, Const]


def eval_term(t: Term, sigma: Mapping[int, Fraction]) -> Fraction:
    if isinstance(t, Var):
        if t.index not in sigma:
            raise KeyError(f"unbound variable x{t.index}")
        return sigma[t.index]
    return t.value


def term_vars(t: Term) -> set[int]:
    return {t.index} if isinstance(t, Var) else set()


# -- formulas ---------------------------------------------------------------


@dataclass(frozen=True)
class D4:
    """ord(t1 - t2) < ord(t3 - t4) + k."""

    k: int
    t1: Term
    t2: Term
    t3: Term
    t4: Term


@dataclass(frozen=True)
class Rnm:
    """t2 - t1 in t3 * Q_{n,m} (zero coset convention when t3 = 0)."""

    n: int
    m: int
    t1: Term
    t2: Term
    t3: Term

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("R[n,m] needs n, m >= 1")


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    items: tuple

    def __post_init__(self):
        if not self.items:
            raise ValueError("And needs at least one conjunct")
        object.__setattr__(self, "items", tuple(self.items))


@dataclass(frozen=True)
class Or:
    items: tuple

    def __post_init__(self):
        if not self.items:
            raise ValueError("Or needs at least one disjunct")
        object.__setattr__(self, "items", tuple(self.items))


@dataclass(frozen=True)
class Exists:
    var: int
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: int
    body: "Formula"


Atom = Union[D4, Rnm]
Formula = Union[D4, Rnm, TrueF, FalseF, Not, And, Or, Exists, Forall]

TRUE = TrueF()
FALSE = FalseF()


def is_atom(f: Formula) -> bool:
    return isinstance(f, (D4, Rnm))


def is_literal(f: Formula) -> bool:
    return is_atom(f) or (isinstance(f, Not) and is_atom(f.body))


# -- structural helpers -----------------------------------------------------


def free_vars(f: Formula) -> set[int]:
    if isinstance(f, D4):
        return term_vars(f.t1) | term_vars(f.t2) | term_vars(f.t3) | term_vars(f.t4)
    if isinstance(f, Rnm):
        return term_vars(f.t1) | term_vars(f.t2) | term_vars(f.t3)
    if isinstance(f, (TrueF, FalseF)):
        return set()
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or)):
        out: set[int] = set()
        for g in f.items:
            out |= free_vars(g)
        return out
    return free_vars(f.body) - {f.var}


def all_vars(f: Formula) -> set[int]:
    if isinstance(f, (Exists, Forall)):
        return all_vars(f.body) | {f.var}
    if isinstance(f, Not):
        return all_vars(f.body)
    if isinstance(f, (And, Or)):
        out: set[int] = set()
        for g in f.items:
            out |= all_vars(g)
        return out
    return free_vars(f)


def atoms_of(f: Formula) -> list[Atom]:
    """All atoms, in syntactic order, duplicates removed."""
    seen: list[Atom] = []

    def walk(g: Formula) -> None:
        if is_atom(g):
            if g not in seen:
                seen.append(g)
        elif isinstance(g, Not):
            walk(g.body)
        elif isinstance(g, (And, Or)):
            for h in g.items:
                walk(h)
        elif isinstance(g, (Exists, Forall)):
            walk(g.body)

    walk(f)
    return seen


def constants_of(f: Formula) -> set[Fraction]:
    out: set[Fraction] = set()
    for a in atoms_of(f):
        terms = (a.t1, a.t2, a.t3, a.t4) if isinstance(a, D4) else (a.t1, a.t2, a.t3)
        for t in terms:
            if isinstance(t, Const):
                out.add(t.value)
    return out


def quantifier_count(f: Formula) -> int:
    if isinstance(f, (Exists, Forall)):
        return 1 + quantifier_count(f.body)
    if isinstance(f, Not):
        return quantifier_count(f.body)
    if isinstance(f, (And, Or)):
        return sum(quantifier_count(g) for g in f.items)
    return 0


def is_qf(f: Formula) -> bool:
    return quantifier_count(f) == 0


def nnf(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form; negations remain only on atoms."""
    if isinstance(f, TrueF):
        return FALSE if negate else TRUE
    if isinstance(f, FalseF):
        return TRUE if negate else FALSE
    if is_atom(f):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return nnf(f.body, not negate)
    if isinstance(f, And):
        items = tuple(nnf(g, negate) for g in f.items)
        return Or(items) if negate else And(items)
    if isinstance(f, Or):
        items = tuple(nnf(g, negate) for g in f.items)
        return And(items) if negate else Or(items)
    if isinstance(f, Exists):
        body = nnf(f.body, negate)
        return Forall(f.var, body) if negate else Exists(f.var, body)
    if isinstance(f, Forall):
        body = nnf(f.body, negate)
        return Exists(f.var, body) if negate else Forall(f.var, body)
    raise TypeError(f"not a formula: {f!r}")


# -- semantics --------------------------------------------------------------


def eval_atom(a: Atom, sigma: Mapping[int, Fraction], ambient: Ambient) -> bool:
    if isinstance(a, D4):
        lhs = ambient.ord(eval_term(a.t1, sigma) - eval_term(a.t2, sigma))
        rhs = ambient.ord(eval_term(a.t3, sigma) - eval_term(a.t4, sigma))
        return lhs < rhs + a.k
    diff = eval_term(a.t2, sigma) - eval_term(a.t1, sigma)
    scale = eval_term(a.t3, sigma)
    if scale == 0:
        return diff == 0
    return ambient.in_qnm(diff / scale, a.n, a.m)


def eval_qf(f: Formula, sigma: Mapping[int, Fraction], ambient: Ambient) -> bool:
    """Exact truth value of a quantifier-free formula."""
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if is_atom(f):
        return eval_atom(f, sigma, ambient)
    if isinstance(f, Not):
        return not eval_qf(f.body, sigma, ambient)
    if isinstance(f, And):
        return all(eval_qf(g, sigma, ambient) for g in f.items)
    if isinstance(f, Or):
        return any(eval_qf(g, sigma, ambient) for g in f.items)
    raise ValueError("eval_qf requires a quantifier-free formula")


def eval_quantified(
    f: Formula,
    sigma: Mapping[int, Fraction],
    universe: Sequence[Fraction],
    ambient: Ambient,
) -> bool:
    """Tarskian evaluation with quantifiers ranging over a finite universe."""
    if not universe:
        raise ValueError("universe must be non-empty")
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if is_atom(f):
        return eval_atom(f, sigma, ambient)
    if isinstance(f, Not):
        return not eval_quantified(f.body, sigma, universe, ambient)
    if isinstance(f, And):
        return all(eval_quantified(g, sigma, universe, ambient) for g in f.items)
    if isinstance(f, Or):
        return any(eval_quantified(g, sigma, universe, ambient) for g in f.items)
    if isinstance(f, Exists):
        base = dict(sigma)
        for u in universe:
            base[f.var] = u
            if eval_quantified(f.body, base, universe, ambient):
                return True
        return False
    if isinstance(f, Forall):
        base = dict(sigma)
        for u in universe:
            base[f.var] = u
            if not eval_quantified(f.body, base, universe, ambient):
                return False
        return True
    raise TypeError(f"not a formula: {f!r}")


# -- lowering shifted atoms to the base relation -----------------------------

ZERO = Const(Fraction(0))


def lower_shifts(f: Formula) -> Formula:
    """Rewrite every D4[k] atom into quantified D4[0] form.

    For k < 0 the shift becomes an existential chain of |k| fresh witnesses
    whose orders interpolate strictly between the two sides; for k > 0 it
    becomes a universal schema: every strictly increasing k-chain above the
    right side ends above the left side.  A zero-difference guard keeps the
    conventions at ord = +inf intact.
    """
    fresh = [max(all_vars(f), default=-1) + 1]

    def next_var() -> int:
        v = fresh[0]
        fresh[0] += 1
        return v

    def rewrite(g: Formula) -> Formula:
        if isinstance(g, D4):
            return lower_one(g)
        if isinstance(g, Rnm) or isinstance(g, (TrueF, FalseF)):
            return g
        if isinstance(g, Not):
            return Not(rewrite(g.body))
        if isinstance(g, And):
            return And(tuple(rewrite(h) for h in g.items))
        if isinstance(g, Or):
            return Or(tuple(rewrite(h) for h in g.items))
        if isinstance(g, Exists):
            return Exists(g.var, rewrite(g.body))
        if isinstance(g, Forall):
            return Forall(g.var, rewrite(g.body))
        raise TypeError(f"not a formula: {g!r}")

    def lower_one(a: D4) -> Formula:
        k = a.k
        if k == 0:
            return a
        left = (a.t1, a.t2)
        right = (a.t3, a.t4)
        if k < 0:
            # ord(left) < ord u_1 < ... < ord u_{-k} < ord(right)
            us = [next_var() for _ in range(-k)]
            chain = [D4(0, a.t1, a.t2, Var(us[0]), ZERO)]
            for lo, hi in zip(us, us[1:]):
                chain.append(D4(0, Var(lo), ZERO, Var(hi), ZERO))
            chain.append(D4(0, Var(us[-1]), ZERO, a.t3, a.t4))
            body: Formula = And(tuple(chain))
            for u in reversed(us):
                body = Exists(u, body)
            return body
        # k > 0: nonzero left difference, and every increasing chain of k
        # witnesses above ord(right) stays above ord(left).
        us = [next_var() for _ in range(k)]
        antecedent = [D4(0, right[0], right[1], Var(us[0]), ZERO)]
        for lo, hi in zip(us, us[1:]):
            antecedent.append(D4(0, Var(lo), ZERO, Var(hi), ZERO))
        consequent = D4(0, left[0], left[1], Var(us[-1]), ZERO)
        body = Or(tuple([Not(c) for c in antecedent] + [consequent]))
        for u in reversed(us):
            body = Forall(u, body)
        nonzero_left = D4(0, left[0], left[1], ZERO, ZERO)
        return And((nonzero_left, body))

    return rewrite(f)
