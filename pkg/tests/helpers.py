"""Shared generators and oracles for the test suite."""

from __future__ import annotations

import random
from collections import defaultdict
from fractions import Fraction

from padicqe.arith import INF, Ambient, Coset
from padicqe.cells import (
    Cell,
    OrdLt,
    PolyConst,
    Precell,
    ShiftDiff,
    ShiftVar,
    cell_member,
    poly_ord,
)
from padicqe.formula import Const, Var, eval_term

F = Fraction


def rand_rational(rng: random.Random, p: int) -> Fraction:
    r = rng.random()
    if r < 0.45:
        return F(p) ** rng.randint(-3, 4) * rng.choice([1, 2, 4, 5, 7, -1, -2])
    if r < 0.55:
        return F(0)
    return F(rng.randint(-(p**3), p**3), rng.choice([1, 1, p, p * p]))


def rand_point(rng: random.Random, p: int, size: int) -> tuple:
    return tuple(rand_rational(rng, p) for _ in range(size))


def rand_term(rng: random.Random, p: int, arity: int):
    if arity and rng.random() < 0.5:
        return Var(rng.randrange(arity))
    return Const(F(p) ** rng.randint(-2, 2) * rng.choice([1, 2, -1, 4, 5]))


def rand_poly(rng: random.Random, p: int, arity: int):
    r = rng.random()
    k = rng.randint(-2, 2)
    if r < 0.3 or arity == 0:
        return PolyConst(F(p) ** rng.randint(-2, 2) * rng.choice([1, 2, -1, 4, 5]))
    if r < 0.8 or arity < 2:
        return ShiftVar(k, rng.randrange(arity), F(rng.choice([0, 1, 2, -1, p])))
    i, j = rng.sample(range(arity), 2)
    return ShiftDiff(k, i, j)


def rand_cell(
    rng: random.Random,
    ambient: Ambient,
    arity: int,
    allow_zero_coset: bool = True,
    max_nm: int = 3,
) -> Cell:
    p = ambient.p
    n, m = rng.randint(1, max_nm), rng.randint(1, max_nm)
    if allow_zero_coset and rng.random() < 0.1:
        coset = Coset.zero(n, m)
    else:
        coset = rng.choice(ambient.cosets(n, m))
    base = Precell.full(arity)
    if rng.random() < 0.3:
        base = base.conjoin(
            [OrdLt(rand_poly(rng, p, arity), rand_poly(rng, p, arity), rng.randint(-1, 1))],
            ambient,
        )
    return Cell(
        base,
        rand_term(rng, p, arity),
        rand_poly(rng, p, arity) if rng.random() < 0.55 else None,
        rand_poly(rng, p, arity) if rng.random() < 0.55 else None,
        coset,
    )


def guided_points(rng: random.Random, ambient: Ambient, cells, arity: int, count: int):
    """Point batch biased toward the cells' centers and coset fibers."""
    p = ambient.p
    centers = [c.center for c in cells]
    pts = []
    for _ in range(count):
        x = rand_point(rng, p, arity)
        if centers and rng.random() < 0.75:
            sigma = {i: v for i, v in enumerate(x)}
            cv = eval_term(rng.choice(centers), sigma)
            if rng.random() < 0.9:
                t = cv + F(p) ** rng.randint(-4, 5) * rng.choice([1, 2, 4, 5, 7, -1])
            else:
                t = cv
        else:
            t = rand_rational(rng, p)
        pts.append(x + (t,))
    return pts


class CosetIndex:
    """Groups cells by (center, coset) so membership scans stay small.

    A point can only belong to a cell whose coset equals the coset of
    t - center(x), so candidates per point are found by a dict lookup.
    """

    def __init__(self, cells, ambient: Ambient):
        self.ambient = ambient
        self.by_key = defaultdict(list)
        self.groups = set()
        for c in cells:
            self.by_key[(c.center, c.coset)].append(c)
            self.groups.add((c.center, c.coset.n, c.coset.m))

    def hits(self, point) -> int:
        ambient = self.ambient
        arity = len(point) - 1
        x, t = point[:arity], point[arity]
        sigma = {i: v for i, v in enumerate(x)}
        count = 0
        for cterm, n, m in self.groups:
            d = t - eval_term(cterm, sigma)
            rho = Coset.zero(n, m) if d == 0 else ambient.rho(d, n, m)
            for c in self.by_key.get((cterm, rho), ()):
                if cell_member(c, point, ambient):
                    count += 1
        return count


def fiber_exists_brute(C: Cell, x, ambient: Ambient) -> bool:
    """Witness search over t = c(x) + p^j * w for j around the bound orders.

    Sufficient because fiber membership only depends on ord(t - c) and the
    angular component of t - c.
    """
    sigma = {i: v for i, v in enumerate(x)}
    cv = eval_term(C.center, sigma)
    if cell_member(C, tuple(x) + (cv,), ambient):
        return True
    orders = [0]
    for b in (C.lower, C.upper):
        if b is not None:
            o = poly_ord(b, x, ambient)
            if o is not INF:
                orders.append(int(o))
    n, m = C.coset.n, C.coset.m
    p = ambient.p
    for j in range(min(orders) - n - 1, max(orders) + n + 2):
        scale = F(p) ** j
        for w in range(1, p**m):
            if w % p == 0:
                continue
            if cell_member(C, tuple(x) + (cv + scale * w,), ambient):
                return True
    return False
