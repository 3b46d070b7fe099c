"""Linear operators on the model algebra.

Operators are sparse exact matrices stored column-major (column j is the
image of basis blade j; for full-space operators the index of a blade is its
mask).  Composition clears denominators and multiplies over the integers,
then restores reduced fractions, which keeps the g = 4 suites fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ChowkitError, DimensionMismatchError, NotNilpotentError
from .linalg import ONE, ZERO, SpanBuilder, as_fraction
from .model import ExtClass, ModelContext, Polarization, fourier, pullback_scalar

QQ = Fraction


class LinOp:
    """Sparse exact endomorphism of a dim-dimensional space."""

    __slots__ = ("dim", "cols", "h_weight")

    def __init__(self, dim: int, cols: dict, *, h_weight=None, _clean=False):
        self.dim = dim
        self.h_weight = h_weight
        if _clean:
            self.cols = cols
        else:
            self.cols = {
                j: {i: as_fraction(c) for i, c in col.items() if c}
                for j, col in cols.items()
            }
            self.cols = {j: col for j, col in self.cols.items() if col}

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "LinOp":
        return cls(dim, {}, _clean=True)

    @classmethod
    def identity(cls, dim: int) -> "LinOp":
        return cls(dim, {j: {j: ONE} for j in range(dim)}, _clean=True)

    @classmethod
    def diagonal(cls, dim: int, values) -> "LinOp":
        return cls(
            dim,
            {j: {j: as_fraction(v)} for j, v in enumerate(values) if v},
            _clean=True,
        )

    @classmethod
    def from_function(cls, ctx: ModelContext, fn) -> "LinOp":
        """Matrix of a linear map given by its values on basis blades."""
        cols = {}
        for mask in range(ctx.dim):
            img = fn(ctx.blade(mask))
            if img.terms:
                cols[mask] = dict(img.terms)
        return cls(ctx.dim, cols, _clean=True)

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.cols

    def nnz(self) -> int:
        return sum(len(col) for col in self.cols.values())

    def entries_dict(self) -> dict:
        return {
            (i, j): c for j, col in self.cols.items() for i, c in col.items()
        }

    def to_triples(self):
        """Sorted sparse serialization: (row, col, rational string)."""
        return [
            (i, j, str(c)) for (i, j), c in sorted(self.entries_dict().items())
        ]

    def __eq__(self, other):
        return (
            isinstance(other, LinOp)
            and other.dim == self.dim
            and other.cols == self.cols
        )

    def __hash__(self):
        return hash((self.dim, frozenset((j, frozenset(c.items())) for j, c in self.cols.items())))

    def __repr__(self):
        return f"<LinOp dim={self.dim} nnz={self.nnz()}>"

    # -- vector actions -------------------------------------------------------

    def apply_vec(self, v):
        if len(v) != self.dim:
            raise DimensionMismatchError("vector length != operator dimension")
        acc = {}
        for j, x in enumerate(v):
            if not x:
                continue
            col = self.cols.get(j)
            if not col:
                continue
            for i, c in col.items():
                s = acc.get(i, ZERO) + c * x
                if s:
                    acc[i] = s
                else:
                    acc.pop(i, None)
        return tuple(acc.get(i, ZERO) for i in range(self.dim))

    def apply_class(self, x: ExtClass) -> ExtClass:
        if self.dim != x.ctx.dim:
            raise DimensionMismatchError("operator does not match the context")
        acc = {}
        for mask, coef in x.terms.items():
            col = self.cols.get(mask)
            if not col:
                continue
            for i, c in col.items():
                s = acc.get(i, ZERO) + c * coef
                if s:
                    acc[i] = s
                else:
                    acc.pop(i, None)
        return ExtClass(x.ctx, acc, _clean=True)

    # -- algebra ----------------------------------------------------------------

    def __add__(self, other):
        self._check(other)
        cols = {j: dict(col) for j, col in self.cols.items()}
        for j, col in other.cols.items():
            mine = cols.setdefault(j, {})
            for i, c in col.items():
                s = mine.get(i, ZERO) + c
                if s:
                    mine[i] = s
                else:
                    mine.pop(i, None)
            if not mine:
                del cols[j]
        return LinOp(self.dim, cols, _clean=True)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "LinOp":
        c = as_fraction(c)
        if not c:
            return LinOp.zero(self.dim)
        return LinOp(
            self.dim,
            {j: {i: c * x for i, x in col.items()} for j, col in self.cols.items()},
            _clean=True,
        )

    def _check(self, other):
        if not isinstance(other, LinOp) or other.dim != self.dim:
            raise DimensionMismatchError("operator dimension mismatch")

    def _int_scaled(self):
        den = 1
        for col in self.cols.values():
            for c in col.values():
                den = den * c.denominator // math.gcd(den, c.denominator)
        if den == 1:
            icols = {
                j: {i: c.numerator for i, c in col.items()}
                for j, col in self.cols.items()
            }
        else:
            icols = {
                j: {i: (c * den).numerator for i, c in col.items()}
                for j, col in self.cols.items()
            }
        return icols, den

    def compose(self, other: "LinOp") -> "LinOp":
        """self after other, exact; integer arithmetic internally."""
        self._check(other)
        ia, da = self._int_scaled()
        ib, db = other._int_scaled()
        d = da * db
        cols = {}
        for j, colb in ib.items():
            acc = {}
            for k, bkj in colb.items():
                cola = ia.get(k)
                if not cola:
                    continue
                for i, aik in cola.items():
                    acc[i] = acc.get(i, 0) + aik * bkj
            col = {i: Fraction(v, d) for i, v in acc.items() if v}
            if col:
                cols[j] = col
        return LinOp(self.dim, cols, _clean=True)

    def __matmul__(self, other):
        return self.compose(other)

    def commutator(self, other: "LinOp") -> "LinOp":
        return self.compose(other) - other.compose(self)

    def power_apply(self, x: ExtClass, n: int) -> ExtClass:
        for _ in range(n):
            x = self.apply_class(x)
        return x

    def restrict(self, indices) -> "LinOp":
        """Restriction to the span of the given basis indices; raises if a
        column leaks outside."""
        pos = {old: new for new, old in enumerate(indices)}
        cols = {}
        for j_old, j_new in pos.items():
            col = self.cols.get(j_old)
            if not col:
                continue
            new_col = {}
            for i, c in col.items():
                i_new = pos.get(i)
                if i_new is None:
                    raise ChowkitError(
                        "operator does not preserve the requested subspace"
                    )
                new_col[i_new] = c
            cols[j_new] = new_col
        return LinOp(len(pos), cols, _clean=True)


def proportional_scalar(left: LinOp, right: LinOp):
    """c with left = c * right, or None; 0 when both vanish."""
    if right.is_zero():
        return ZERO if left.is_zero() else None
    j, col = min(right.cols.items())
    i = min(col)
    c = left.cols.get(j, {}).get(i, ZERO) / col[i]
    return c if left == right.scale(c) else None


# -- multiplication operators and the sl2 triple ------------------------------


def op_mul_cup(a: ExtClass) -> LinOp:
    from .model import wedge

    return LinOp.from_function(a.ctx, lambda x: wedge(a, x))


def op_mul_pontryagin(a: ExtClass) -> LinOp:
    from .model import pontryagin

    return LinOp.from_function(a.ctx, lambda x: pontryagin(a, x))


def h_op(ctx: ModelContext) -> LinOp:
    """Grading operator: (k - g) id on degree-k blades."""
    return LinOp.diagonal(
        ctx.dim, (QQ(m.bit_count() - ctx.g) for m in range(ctx.dim))
    )


def scalar_pullback_op(ctx: ModelContext, c) -> LinOp:
    c = as_fraction(c)
    return LinOp.diagonal(ctx.dim, (c ** m.bit_count() for m in range(ctx.dim)))


@dataclass(frozen=True)
class Sl2Triple:
    pol: Polarization
    e: LinOp
    f: LinOp
    h: LinOp

    def check_relations(self) -> bool:
        two_e = self.e.scale(2)
        two_f = self.f.scale(2)
        return (
            self.e.commutator(self.f) == self.h
            and self.h.commutator(self.e) == two_e
            and self.h.commutator(self.f) == two_f.scale(-1)
        )


def sl2_of(pol: Polarization) -> Sl2Triple:
    """Lefschetz triple of a polarization: e = cup with d, f = Pontryagin
    with d^{g-1}/((g-1)! chi), h = (k - g) id on degree k."""
    ctx = pol.ctx
    g = ctx.g
    dpow = ctx.unit()
    for _ in range(g - 1):
        dpow = dpow.wedge(pol.d)
    f_class = dpow / (math.factorial(g - 1) * pol.chi)
    triple = Sl2Triple(
        pol=pol,
        e=op_mul_cup(pol.d),
        f=op_mul_pontryagin(f_class),
        h=h_op(ctx),
    )
    if not triple.check_relations():
        raise ChowkitError(
            f"sl2 relations failed for polarization {pol.name!r}"
        )
    return triple


def exp_nilpotent(t: LinOp, max_terms: int | None = None) -> LinOp:
    """sum t^k / k!, requiring nilpotency within dim steps."""
    cap = max_terms if max_terms is not None else t.dim + 1
    acc = LinOp.identity(t.dim)
    term = LinOp.identity(t.dim)
    for k in range(1, cap + 1):
        term = term.compose(t).scale(Fraction(1, k))
        if term.is_zero():
            return acc
        acc = acc + term
    raise NotNilpotentError(f"operator is not nilpotent within {cap} powers")


def fourier_op(pol: Polarization) -> LinOp:
    return LinOp.from_function(pol.ctx, lambda x: fourier(pol, x))


def minus_one_pullback_op(ctx: ModelContext) -> LinOp:
    return scalar_pullback_op(ctx, -1)


# -- differential-operator order ------------------------------------------------


def _even_mult_probes(ctx: ModelContext, product: str):
    probes = ctx._mult_probes.get(product)
    if probes is None:
        build = op_mul_cup if product == "cup" else op_mul_pontryagin
        probes = tuple(
            build(ctx.blade(m)).restrict(ctx.even_masks) for m in ctx.even_masks
        )
        ctx._mult_probes[product] = probes
    return probes


def restrict_even(t: LinOp, ctx: ModelContext) -> LinOp:
    """Restriction of a full-space operator to the even subalgebra; raises
    if some even blade maps outside it."""
    if t.dim != ctx.dim:
        raise DimensionMismatchError("operator does not match the context")
    try:
        return t.restrict(ctx.even_masks)
    except ChowkitError:
        raise ChowkitError("operator does not preserve the even subalgebra")


def diff_order(
    t: LinOp, product: str, ctx: ModelContext, max_order: int | None = None
) -> int:
    """Order of t as a differential operator on the even subalgebra with
    respect to the chosen commutative product.

    order(0) = -1, and order(t) <= n iff [t, M_b] has order <= n-1 for every
    multiplication operator M_b; probes run over the full even basis.  The
    search tracks the span of k-fold commutators, so each level is bounded
    by the operator-space dimension and zero operators prune immediately.
    """
    if product not in ("cup", "pontryagin"):
        raise ChowkitError(f"unknown product {product!r}")
    t_even = restrict_even(t, ctx)
    if t_even.is_zero():
        return -1
    probes = _even_mult_probes(ctx, product)
    cap = max_order if max_order is not None else 4 * ctx.n + 4
    current = [t_even]
    k = 0
    while True:
        span = SpanBuilder()
        nxt = []
        for x in current:
            for p in probes:
                c = x.commutator(p)
                if c.is_zero():
                    continue
                if span.insert(c.entries_dict()):
                    nxt.append(c)
        if not nxt:
            return k
        k += 1
        current = nxt
        if k > cap:
            raise ChowkitError(
                "no finite differential-operator order within the cap"
            )


def check_sl2_lowest_weight(pol: Polarization, a: ExtClass):
    """Compare the cup operator of F(a) with the (2g-k)-fold raising of the
    Pontryagin operator of a; returns (ok, proportionality constant)."""
    ctx = pol.ctx
    if a.ctx != ctx:
        raise ChowkitError("class does not live in the polarization context")
    if a.is_zero():
        return True, ZERO
    k = a.degree()
    if k is None or k % 2 != 0:
        raise ChowkitError("expected a homogeneous even class")
    triple = sl2_of(pol)
    raised = op_mul_pontryagin(a)
    for _ in range(ctx.n - k):
        raised = triple.e.commutator(raised)
    left = op_mul_cup(fourier(pol, a))
    c = proportional_scalar(left, raised)
    if c is None:
        return False, ZERO
    return c != 0, c
