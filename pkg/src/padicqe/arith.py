"""Exact arithmetic of Q_p elements and the coset predicate layer.

Field elements are plain ``fractions.Fraction`` values interpreted inside
Q_p for a fixed prime p.  Everything the predicate language needs (the
valuation ``ord``, angular components ``ac_m``, membership in the open
subgroups Q_{n,m} and their cosets) is exactly computable on rationals,
so there is no precision or truncation anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

#: ord(0); behaves correctly under ``+ k`` and comparisons.
INF = float("inf")

PElem = Fraction
Rat = Union[Fraction, int]


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("vp undefined at zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def format_rational(x: Fraction) -> str:
    """Serialize as "num/den", omitting the denominator when it is 1."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


@dataclass(frozen=True)
class Coset:
    """An element of K^x / Q_{n,m}, canonically represented, or the zero coset.

    A nonzero coset is the class of p^ord_class * unit_class with
    0 <= ord_class < n and unit_class a unit mod p^m.  The zero coset
    stands for the singleton {0} (convention: 0 * Q_{n,m} = {0}).
    """

    n: int
    m: int
    ord_class: Optional[int] = None
    unit_class: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise ValueError("coset parameters n, m must be positive")
        if (self.ord_class is None) != (self.unit_class is None):
            raise ValueError("ord_class and unit_class must be given together")
        if self.ord_class is not None and not 0 <= self.ord_class < self.n:
            raise ValueError("ord_class out of range")

    @property
    def is_zero(self) -> bool:
        return self.ord_class is None

    @classmethod
    def zero(cls, n: int, m: int) -> "Coset":
        return cls(n, m)

    def rep(self, p: int) -> Fraction:
        """The canonical representative p^l * w (0 for the zero coset)."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(p**self.ord_class * self.unit_class)

    def to_json(self) -> dict:
        if self.is_zero:
            return {"zero": True, "n": self.n, "m": self.m}
        return {
            "ord_class": self.ord_class,
            "unit_class": self.unit_class,
            "n": self.n,
            "m": self.m,
        }


@dataclass(frozen=True)
class RhoSum:
    """Result of ``rho_add``: the coset plus which rule produced it.

    ``case`` is one of "zero-sum", "dominated", "split-order", "equal-order"
    or "fallback"; ``lemma_applicable`` is False exactly in the fallback case
    (equal orders with cancellation past the equal-order guard).
    """

    coset: Coset
    case: str
    lemma_applicable: bool = True


class Ambient:
    """The ambient field Q_p: a checked prime plus the predicate operations."""

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self._reps_cache: dict[tuple[int, int], tuple[Fraction, ...]] = {}

    def __repr__(self) -> str:
        return f"Ambient(p={self.p})"

    # -- valuation and angular components ---------------------------------

    def ord(self, x: Rat) -> Union[int, float]:
        """p-adic valuation; +inf at 0."""
        x = Fraction(x)
        if x == 0:
            return INF
        return vp(x.numerator, self.p) - vp(x.denominator, self.p)

    def ord_int(self, num: int, den: int = 1) -> Union[int, float]:
        """Valuation of num/den without building a Fraction (num/den need not be reduced)."""
        if num == 0:
            return INF
        return vp(num, self.p) - (vp(den, self.p) if den % self.p == 0 else 0)

    def ac(self, x: Rat, m: int) -> int:
        """Angular component mod p^m: the unit part of x reduced mod p^m.

        Multiplicative, sends p to 1, and agrees with reduction mod p^m on
        units.  Undefined at zero.
        """
        if m < 1:
            raise ValueError("m must be positive")
        x = Fraction(x)
        if x == 0:
            raise ValueError("ac undefined at zero")
        return self.ac_int(x.numerator, x.denominator, m)

    def ac_int(self, num: int, den: int, m: int) -> int:
        """ac on an integer pair num/den (any representation of the rational)."""
        p = self.p
        pm = p**m
        un = num // p ** vp(num, p)
        ud = den // p ** vp(den, p)
        return (un * pow(ud, -1, pm)) % pm

    # -- the subgroups Q_{n,m} and their cosets ----------------------------

    def in_qnm(self, x: Rat, n: int, m: int) -> bool:
        """Membership in Q_{n,m} = union of p^{kn}(1 + p^m Z_p); false at 0."""
        x = Fraction(x)
        if x == 0:
            return False
        return self.ord(x) % n == 0 and self.ac(x, m) == 1

    def rho(self, x: Rat, n: int, m: int) -> Coset:
        """The canonical coset of x in K^x / Q_{n,m}; the zero coset at 0."""
        x = Fraction(x)
        if x == 0:
            return Coset.zero(n, m)
        return Coset(n, m, int(self.ord(x)) % n, self.ac(x, m))

    def coset_rep(self, x: Rat, n: int, m: int) -> Fraction:
        return self.rho(x, n, m).rep(self.p)

    def coset_reps(self, n: int, m: int) -> tuple[Fraction, ...]:
        """All canonical representatives p^l * w, sorted by (l, w)."""
        key = (n, m)
        if key not in self._reps_cache:
            p = self.p
            reps = [
                Fraction(p**ell * w)
                for ell in range(n)
                for w in range(1, p**m)
                if w % p != 0
            ]
            self._reps_cache[key] = tuple(reps)
        return self._reps_cache[key]

    def cosets(self, n: int, m: int) -> tuple[Coset, ...]:
        """The nonzero cosets in canonical (ord_class, unit_class) order."""
        return tuple(self.rho(r, n, m) for r in self.coset_reps(n, m))

    def refine_coset(self, coset: Coset, n2: int, m2: int) -> tuple[Coset, ...]:
        """Split a coset (or {0}) into the finer cosets mod Q_{n2,m2}.

        Requires n | n2 and m <= m2 so that Q_{n2,m2} is a subgroup of
        Q_{n,m}; returns every finer coset contained in the given one.
        """
        if n2 % coset.n != 0 or m2 < coset.m:
            raise ValueError("refinement level must divide/extend the coset level")
        if coset.is_zero:
            return (Coset.zero(n2, m2),)
        out = []
        for fine in self.cosets(n2, m2):
            if self.rho(fine.rep(self.p), coset.n, coset.m) == coset:
                out.append(fine)
        return tuple(out)

    # -- coset of a sum via the three-case rule -----------------------------

    def rho_add(self, a: Rat, b: Rat, delta: int, n: int, m: int) -> RhoSum:
        """Coset of a + delta*b computed from the cosets of a and b.

        Uses only the case rules (plus the symmetric swap) wherever one of
        the guards holds:

        * dominated:    m + ord a <= ord b          ->  rho(a)
        * split-order:  -m + ord b < ord a < ord b  ->  rho(lam + delta*mu*p^rn),
                        rn = ord(lam*b / (mu*a))
        * equal-order:  ord a = ord b = ord(a+delta*b) -> rho(lam + delta*mu)

        Equal orders with cancellation past the equal-order guard fall back
        to direct computation and are flagged as not lemma-applicable.
        """
        if delta not in (1, -1):
            raise ValueError("delta must be +1 or -1")
        a, b = Fraction(a), Fraction(b)
        s = a + delta * b
        if s == 0:
            return RhoSum(Coset.zero(n, m), "zero-sum")
        if a == 0:
            return RhoSum(self.rho(delta * b, n, m), "dominated")
        if b == 0:
            return RhoSum(self.rho(a, n, m), "dominated")

        oa, ob = self.ord(a), self.ord(b)
        if oa > ob:
            # symmetric roles: a + delta*b = delta*(b + delta*a)
            swapped = self.rho_add(b, a, delta, n, m)
            if delta == 1:
                return swapped
            return RhoSum(
                self.rho(-swapped.coset.rep(self.p) if not swapped.coset.is_zero else 0, n, m)
                if not swapped.coset.is_zero
                else swapped.coset,
                swapped.case,
                swapped.lemma_applicable,
            )

        lam = self.coset_rep(a, n, m)
        mu = self.coset_rep(b, n, m)
        if m + oa <= ob:
            return RhoSum(self.rho(a, n, m), "dominated")
        if -m + ob < oa < ob:
            rn = self.ord(lam * b / (mu * a))
            val = lam + delta * mu * Fraction(self.p) ** int(rn)
            return RhoSum(self.rho(val, n, m), "split-order")
        # now ord a = ord b
        if self.ord(s) == oa:
            return RhoSum(self.rho(lam + delta * mu, n, m), "equal-order")
        return RhoSum(self.rho(s, n, m), "fallback", lemma_applicable=False)
