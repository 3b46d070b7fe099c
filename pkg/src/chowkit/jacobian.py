"""Truncated model of the Pontryagin algebra generated by curve classes on a
Jacobian.

The variable x_s stands for the weight-s component of a curve class; the
Pontryagin product is free commutative polynomial multiplication and the
truncation ideal drops monomials of total s-weight above N (the bracket and
the product both preserve or add s-weights, so this is an ideal for both).
A monomial is a sorted tuple of variable indices with multiplicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ChowkitError, TruncationMismatchError
from .linalg import ZERO, as_fraction

QQ = Fraction


def _weight(mon: tuple) -> int:
    return sum(mon)


class TautPoly:
    """Polynomial in x_0..x_N, truncated by total s-weight."""

    __slots__ = ("trunc", "terms")

    def __init__(self, trunc: int, terms: dict, *, _clean=False):
        self.trunc = trunc
        if _clean:
            self.terms = terms
        else:
            self.terms = {}
            for mon, c in terms.items():
                mon = tuple(sorted(mon))
                if any(s < 0 or s > trunc for s in mon):
                    raise ChowkitError(f"variable index out of range in {mon}")
                c = as_fraction(c)
                if c and _weight(mon) <= trunc:
                    self.terms[mon] = self.terms.get(mon, ZERO) + c
            self.terms = {m: c for m, c in self.terms.items() if c}

    @classmethod
    def zero(cls, trunc: int) -> "TautPoly":
        return cls(trunc, {}, _clean=True)

    @classmethod
    def unit(cls, trunc: int) -> "TautPoly":
        return cls(trunc, {(): QQ(1)}, _clean=True)

    @classmethod
    def gen(cls, trunc: int, s: int) -> "TautPoly":
        if not 0 <= s <= trunc:
            raise ChowkitError(f"generator index {s} outside truncation {trunc}")
        return cls(trunc, {(s,): QQ(1)}, _clean=True)

    @classmethod
    def curve_class(cls, trunc: int) -> "TautPoly":
        """Sum of all generators x_0 + ... + x_N."""
        return cls(trunc, {(s,): QQ(1) for s in range(trunc + 1)}, _clean=True)

    def _check(self, other: "TautPoly"):
        if not isinstance(other, TautPoly) or other.trunc != self.trunc:
            raise TruncationMismatchError("operands have different truncation")

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return (
            isinstance(other, TautPoly)
            and other.trunc == self.trunc
            and other.terms == self.terms
        )

    def __hash__(self):
        return hash((self.trunc, frozenset(self.terms.items())))

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for mon, c in other.terms.items():
            s = terms.get(mon, ZERO) + c
            if s:
                terms[mon] = s
            else:
                terms.pop(mon, None)
        return TautPoly(self.trunc, terms, _clean=True)

    def __neg__(self):
        return TautPoly(
            self.trunc, {m: -c for m, c in self.terms.items()}, _clean=True
        )

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "TautPoly":
        c = as_fraction(c)
        if not c:
            return TautPoly.zero(self.trunc)
        return TautPoly(
            self.trunc, {m: c * x for m, x in self.terms.items()}, _clean=True
        )

    __mul__ = scale
    __rmul__ = scale

    def __str__(self):
        if not self.terms:
            return "0"
        def mono_str(mon):
            if not mon:
                return "1"
            parts = []
            for s in sorted(set(mon)):
                k = mon.count(s)
                parts.append(f"x{s}" if k == 1 else f"x{s}^{k}")
            return "*".join(parts)
        keys = sorted(self.terms, key=lambda m: (_weight(m), len(m), m))
        out = []
        for mon in keys:
            c = self.terms[mon]
            body = mono_str(mon)
            if body == "1":
                piece = str(abs(c))
            elif abs(c) == 1:
                piece = body
            else:
                piece = f"{abs(c)}*{body}"
            if not out:
                out.append(piece if c > 0 else f"-{piece}")
            else:
                out.append(f"+ {piece}" if c > 0 else f"- {piece}")
        return " ".join(out)

    def __repr__(self):
        return f"<TautPoly N={self.trunc}: {self}>"

    def to_pairs(self):
        return [
            [list(mon), str(self.terms[mon])]
            for mon in sorted(self.terms, key=lambda m: (_weight(m), len(m), m))
        ]


def pontryagin_mul(p: TautPoly, q: TautPoly) -> TautPoly:
    """Free commutative product, then truncation by s-weight."""
    p._check(q)
    trunc = p.trunc
    acc = {}
    for m1, c1 in p.terms.items():
        w1 = _weight(m1)
        for m2, c2 in q.terms.items():
            if w1 + _weight(m2) > trunc:
                continue
            mon = tuple(sorted(m1 + m2))
            s = acc.get(mon, ZERO) + c1 * c2
            if s:
                acc[mon] = s
            else:
                acc.pop(mon, None)
    return TautPoly(trunc, acc, _clean=True)


def bracket_gen_coeff(s: int, t: int) -> Fraction:
    return QQ(-math.comb(s + t + 2, s + 1))


def bracket_gen(trunc: int, s: int, t: int) -> TautPoly:
    """Pairing of two generators: -binomial(s+t+2, s+1) x_{s+t}, truncated."""
    if s < 0 or t < 0:
        raise ChowkitError("generator indices must be nonnegative")
    if s + t > trunc:
        return TautPoly.zero(trunc)
    return TautPoly(trunc, {(s + t,): bracket_gen_coeff(s, t)}, _clean=True)


def bracket(p: TautPoly, q: TautPoly) -> TautPoly:
    """Symmetric bi-derivation extending bracket_gen: differentiate each
    factor of each monomial against each factor of the other."""
    p._check(q)
    trunc = p.trunc
    acc = TautPoly.zero(trunc)
    for m1, c1 in p.terms.items():
        for m2, c2 in q.terms.items():
            coef = c1 * c2
            for i, s in enumerate(m1):
                rest1 = m1[:i] + m1[i + 1 :]
                for j, t in enumerate(m2):
                    rest2 = m2[:j] + m2[j + 1 :]
                    mon = tuple(sorted(rest1 + rest2 + (s + t,)))
                    if _weight(mon) > trunc:
                        continue
                    term = TautPoly(
                        trunc,
                        {mon: coef * bracket_gen_coeff(s, t)},
                        _clean=True,
                    )
                    acc = acc + term
    return acc


def push_m(n: int, p: TautPoly) -> TautPoly:
    """Pushforward along multiplication by n: x_s -> n^{s+2} x_s, extended
    multiplicatively (the unit is preserved)."""
    if not isinstance(n, int):
        raise ChowkitError("push_m needs an integer")
    terms = {}
    for mon, c in p.terms.items():
        factor = QQ(1)
        for s in mon:
            factor *= QQ(n) ** (s + 2)
        if factor:
            terms[mon] = terms.get(mon, ZERO) + c * factor
    return TautPoly(p.trunc, terms)


def check_mn_identity(m: int, n: int, trunc: int) -> bool:
    """{[m]_* C, [n]_* C} = -mn ([m+n]_* C - [m]_* C - [n]_* C) at the given
    truncation, with C the full curve class; m, n must be nonzero."""
    if m == 0 or n == 0:
        raise ChowkitError("m and n must be nonzero integers")
    c = TautPoly.curve_class(trunc)
    lhs = bracket(push_m(m, c), push_m(n, c))
    rhs = (push_m(m + n, c) - push_m(m, c) - push_m(n, c)).scale(-m * n)
    return lhs == rhs


@dataclass(frozen=True)
class JordanWitness:
    s: int
    t: int
    lhs: TautPoly
    rhs: TautPoly


def jordan_failure_witness(trunc: int, search_bound: int | None = None):
    """Search generator pairs (x_s, x_t) for a failure of the Jordan identity
    {{x,y},{x,x}} = {x,{y,{x,x}}}; returns the first violating pair in
    (s+t, s) order, or None below the bound."""
    if trunc < 4:
        raise ChowkitError("truncation must be at least 4 for the search")
    bound = search_bound if search_bound is not None else trunc
    pairs = sorted(
        ((s, t) for s in range(bound + 1) for t in range(bound + 1)),
        key=lambda st: (st[0] + st[1], st[0], st[1]),
    )
    for s, t in pairs:
        x = TautPoly.gen(trunc, s)
        y = TautPoly.gen(trunc, t)
        xx = bracket(x, x)
        lhs = bracket(bracket(x, y), xx)
        rhs = bracket(x, bracket(y, xx))
        if lhs != rhs:
            return JordanWitness(s, t, lhs, rhs)
    return None
