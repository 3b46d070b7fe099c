"""Finite-dimensional cycle model of a polarized abelian variety.

The algebra is graded-commutative on 2g degree-1 generators a1..ag, b1..bg,
encoded sparsely: a basis blade is a bitmask over the generators (bit i is
generator i, wedge factors in ascending bit order), a class is a map from
masks to rationals.  Signs come from inversion counts between masks.

Orientation convention: integrate(a1^b1^...^ag^bg) = 1.  Since blades are
stored in index order a1..ag b1..bg, the coefficient of the full mask picks
up the sign of the unshuffle permutation, (-1)^(g(g-1)/2).

The product model (for the group law m(x,y) = x+y) is the exterior algebra
on 4g generators: low bits are the first factor, high bits the second.  The
sign rule (u (x) v)^(u' (x) v') = (-1)^{|v||u'|} (u^u') (x) (v^v') is then
ordinary exterior multiplication, and m^* sends each generator v to
v(x)1 + 1(x)v.  The pushforward m_* is the adjoint of m^* for the pairing
integrate(x ^ y) and has a closed form on blades (see _pontryagin_sign).
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import (
    ChowkitError,
    ContextMismatchError,
    DegeneratePolarizationError,
    DimensionMismatchError,
)
from .linalg import ONE, ZERO, as_fraction, det, freeze_matrix

QQ = Fraction


def merge_sign(a: int, b: int) -> int:
    """Sign reordering blade `a` followed by blade `b` into ascending bit
    order; masks must be disjoint."""
    sign = 1
    while b:
        low = b & -b
        if (a >> low.bit_length()).bit_count() & 1:
            sign = -sign
        b ^= low
    return sign


def _wedge_terms(t1: dict, t2: dict) -> dict:
    out = {}
    for m1, c1 in t1.items():
        for m2, c2 in t2.items():
            if m1 & m2:
                continue
            c = c1 * c2
            if merge_sign(m1, m2) < 0:
                c = -c
            m = m1 | m2
            prev = out.get(m)
            if prev is None:
                out[m] = c
            else:
                s = prev + c
                if s:
                    out[m] = s
                else:
                    del out[m]
    return {m: c for m, c in out.items() if c}


class ModelContext:
    """Ambient data for one abelian variety model of dimension g."""

    def __init__(self, g: int):
        if not 1 <= g <= 6:
            raise ChowkitError(f"g must be between 1 and 6, got {g}")
        self.g = g
        self.n = 2 * g  # number of degree-1 generators
        self.dim = 1 << self.n
        self.full_mask = self.dim - 1
        # unshuffle sign from the symplectic order a1 b1 ... ag bg
        self.orientation_sign = -1 if (g * (g - 1) // 2) % 2 else 1
        self.gen_names = tuple(
            f"a{i + 1}" for i in range(g)
        ) + tuple(f"b{i + 1}" for i in range(g))
        self._name_to_bit = {name: i for i, name in enumerate(self.gen_names)}
        self.even_masks = tuple(
            m for m in range(self.dim) if m.bit_count() % 2 == 0
        )
        self._product = None
        self._mult_probes = {}

    def __eq__(self, other):
        return type(other) is ModelContext and other.g == self.g

    def __hash__(self):
        return hash(("ModelContext", self.g))

    def __repr__(self):
        return f"ModelContext(g={self.g})"

    @property
    def product(self) -> "ProductContext":
        if self._product is None:
            self._product = ProductContext(self)
        return self._product

    def zero(self) -> "ExtClass":
        return ExtClass(self, {})

    def unit(self) -> "ExtClass":
        """The fundamental class [A]."""
        return ExtClass(self, {0: ONE})

    def point(self) -> "ExtClass":
        """The point class [0], normalized so integrate([0]) = 1."""
        return ExtClass(self, {self.full_mask: QQ(self.orientation_sign)})

    def gen(self, name_or_bit) -> "ExtClass":
        if isinstance(name_or_bit, str):
            bit = self._name_to_bit.get(name_or_bit)
            if bit is None:
                raise ChowkitError(f"unknown generator {name_or_bit!r}")
        else:
            bit = name_or_bit
            if not 0 <= bit < self.n:
                raise ChowkitError(f"generator index {bit} out of range")
        return ExtClass(self, {1 << bit: ONE})

    def blade(self, mask: int) -> "ExtClass":
        return ExtClass(self, {mask: ONE})

    def basis(self):
        return (self.blade(m) for m in range(self.dim))

    def mask_names(self, mask: int) -> tuple:
        return tuple(
            self.gen_names[i] for i in range(self.n) if mask >> i & 1
        )

    def mask_of_names(self, names) -> int:
        mask = 0
        for name in names:
            bit = self._name_to_bit.get(name)
            if bit is None:
                raise ChowkitError(f"unknown generator {name!r}")
            mask |= 1 << bit
        return mask

    def two_form(self, e_matrix) -> "ExtClass":
        """Degree-2 class sum_{i<j} E[i][j] gen_i ^ gen_j of an antisymmetric
        coefficient matrix in generator order a1..ag, b1..bg."""
        e = freeze_matrix(e_matrix)
        if len(e) != self.n or any(len(row) != self.n for row in e):
            raise DimensionMismatchError(f"expected a {self.n}x{self.n} matrix")
        terms = {}
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if e[i][j]:
                    terms[(1 << i) | (1 << j)] = e[i][j]
        return ExtClass(self, terms)

    def chi(self, c: "ExtClass") -> Fraction:
        """integrate(c^g) / g! for a degree-2 class."""
        power = self.unit()
        for _ in range(self.g):
            power = power.wedge(c)
        return power.integrate() / math.factorial(self.g)


class ProductContext:
    """Model of A x A; masks over 4g bits, low half = first factor."""

    def __init__(self, base: ModelContext):
        self.base = base
        self.n = 2 * base.n
        self.dim = 1 << self.n
        self.full_mask = self.dim - 1
        # integrate(x (x) y) = integrate(x) integrate(y) makes the top sign +1
        self.orientation_sign = 1
        self.gen_names = tuple(f"{nm}'" for nm in base.gen_names) + tuple(
            f"{nm}''" for nm in base.gen_names
        )

    def __eq__(self, other):
        return type(other) is ProductContext and other.base == self.base

    def __hash__(self):
        return hash(("ProductContext", self.base.g))

    def __repr__(self):
        return f"ProductContext(g={self.base.g})"

    def zero(self) -> "ExtClass":
        return ExtClass(self, {})

    def unit(self) -> "ExtClass":
        return ExtClass(self, {0: ONE})

    def mask_names(self, mask: int) -> tuple:
        return tuple(
            self.gen_names[i] for i in range(self.n) if mask >> i & 1
        )


class ExtClass:
    """Element of the model algebra (or of the product model): sparse map
    from generator bitmask to rational coefficient."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx, terms: dict, *, _clean=False):
        self.ctx = ctx
        if _clean:
            self.terms = terms
        else:
            self.terms = {
                m: as_fraction(c) for m, c in terms.items() if c
            }

    # -- basic structure ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, mask: int) -> Fraction:
        return self.terms.get(mask, ZERO)

    def degrees(self) -> set:
        return {m.bit_count() for m in self.terms}

    def degree(self):
        """Degree if homogeneous (0 for the zero class), else None."""
        degs = self.degrees()
        if not degs:
            return 0
        if len(degs) == 1:
            return degs.pop()
        return None

    def is_even(self) -> bool:
        return all(m.bit_count() % 2 == 0 for m in self.terms)

    def graded_piece(self, k: int) -> "ExtClass":
        return ExtClass(
            self.ctx,
            {m: c for m, c in self.terms.items() if m.bit_count() == k},
            _clean=True,
        )

    def _check(self, other: "ExtClass"):
        if not isinstance(other, ExtClass) or other.ctx != self.ctx:
            raise ContextMismatchError("classes live in different contexts")

    # -- linear operations --------------------------------------------------

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            s = terms.get(m, ZERO) + c
            if s:
                terms[m] = s
            else:
                terms.pop(m, None)
        return ExtClass(self.ctx, terms, _clean=True)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return ExtClass(
            self.ctx, {m: -c for m, c in self.terms.items()}, _clean=True
        )

    def scale(self, c) -> "ExtClass":
        c = as_fraction(c)
        if not c:
            return ExtClass(self.ctx, {}, _clean=True)
        return ExtClass(
            self.ctx, {m: c * x for m, x in self.terms.items()}, _clean=True
        )

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.scale(ONE / as_fraction(c))

    def __eq__(self, other):
        return (
            isinstance(other, ExtClass)
            and other.ctx == self.ctx
            and other.terms == self.terms
        )

    def __hash__(self):
        return hash((self.ctx, frozenset(self.terms.items())))

    # -- multiplicative structure --------------------------------------------

    def wedge(self, other: "ExtClass") -> "ExtClass":
        self._check(other)
        return ExtClass(self.ctx, _wedge_terms(self.terms, other.terms), _clean=True)

    def integrate(self) -> Fraction:
        c = self.terms.get(self.ctx.full_mask, ZERO)
        return c if self.ctx.orientation_sign > 0 else -c

    # -- presentation ---------------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: (mc[0].bit_count(), mc[0]))

    def to_pairs(self):
        """Serialization: list of (generator-name list, rational string)."""
        return [
            [list(self.ctx.mask_names(m)), str(c)] for m, c in self.sorted_terms()
        ]

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            names = ".".join(self.ctx.mask_names(m))
            if not names:
                body = str(abs(c))
            elif abs(c) == 1:
                body = names
            else:
                body = f"{abs(c)} {names}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self):
        return f"<ExtClass {self}>"


# -- spec-level operations ----------------------------------------------------


def wedge(x: ExtClass, y: ExtClass) -> ExtClass:
    return x.wedge(y)


def integrate(x: ExtClass) -> Fraction:
    return x.integrate()


def _scalar_of_matrix(m):
    """c if the matrix is c * identity, else None."""
    c = m[0][0]
    for i, row in enumerate(m):
        for j, x in enumerate(row):
            if (x != c) if i == j else (x != 0):
                return None
    return c


def pullback_linear(matrix, x: ExtClass) -> ExtClass:
    """Algebra endomorphism extending v -> M v on degree-1 classes."""
    ctx = x.ctx
    m = freeze_matrix(matrix)
    if len(m) != ctx.n or any(len(row) != ctx.n for row in m):
        raise DimensionMismatchError(f"expected a {ctx.n}x{ctx.n} matrix")
    c = _scalar_of_matrix(m)
    if c is not None:
        return ExtClass(
            ctx,
            {mask: coef * c ** mask.bit_count() for mask, coef in x.terms.items()},
        )
    images = [
        {1 << i: m[i][j] for i in range(ctx.n) if m[i][j]} for j in range(ctx.n)
    ]
    acc = {}
    for mask, coef in x.terms.items():
        part = {0: coef}
        b = mask
        while b and part:
            low = b & -b
            part = _wedge_terms(part, images[low.bit_length() - 1])
            b ^= low
        for mm, cc in part.items():
            s = acc.get(mm, ZERO) + cc
            if s:
                acc[mm] = s
            else:
                acc.pop(mm, None)
    return ExtClass(ctx, acc, _clean=True)


def pullback_scalar(c, x: ExtClass) -> ExtClass:
    """Pullback along multiplication by the scalar c ([c]^* for integer c)."""
    c = as_fraction(c)
    return ExtClass(
        x.ctx, {m: coef * c ** m.bit_count() for m, coef in x.terms.items()}
    )


def _submatrix(m, rows, cols):
    return tuple(tuple(m[i][j] for j in cols) for i in rows)


def _mask_bits(mask: int) -> tuple:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def pushforward_linear(matrix, x: ExtClass) -> ExtClass:
    """Adjoint of pullback_linear for the pairing integrate(x ^ w):
    integrate(pushforward(x) ^ w) = integrate(x ^ pullback(w)) for all w."""
    ctx = x.ctx
    m = freeze_matrix(matrix)
    if len(m) != ctx.n or any(len(row) != ctx.n for row in m):
        raise DimensionMismatchError(f"expected a {ctx.n}x{ctx.n} matrix")
    c = _scalar_of_matrix(m)
    if c is not None:
        return ExtClass(
            ctx,
            {
                mask: coef * c ** (ctx.n - mask.bit_count())
                for mask, coef in x.terms.items()
            },
        )
    full = ctx.full_mask
    by_size = {}
    for k in range(ctx.n + 1):
        by_size[k] = [mm for mm in range(ctx.dim) if mm.bit_count() == k]
    acc = {}
    for mask, coef in x.terms.items():
        k = mask.bit_count()
        comp = full ^ mask
        comp_bits = _mask_bits(comp)
        eps_a = merge_sign(mask, comp)
        for target in by_size[k]:
            tcomp = full ^ target
            minor = det(_submatrix(m, comp_bits, _mask_bits(tcomp)))
            if not minor:
                continue
            val = coef * minor
            if eps_a * merge_sign(target, tcomp) < 0:
                val = -val
            s = acc.get(target, ZERO) + val
            if s:
                acc[target] = s
            else:
                acc.pop(target, None)
    return ExtClass(ctx, acc, _clean=True)


def pushforward_scalar(c, x: ExtClass) -> ExtClass:
    c = as_fraction(c)
    return ExtClass(
        x.ctx,
        {m: coef * c ** (x.ctx.n - m.bit_count()) for m, coef in x.terms.items()},
    )


def _pontryagin_sign(ctx: ModelContext, a: int, b: int) -> int:
    """Sign of m_*(blade_a (x) blade_b) = sign * blade_{a & b}; requires
    a | b to cover all generators (otherwise the pushforward vanishes).

    Derivation: expand m^*(blade) = product over its bits of (v'(+)v''),
    pair against blade_a (x) blade_b under integrate over A x A, and invert
    the Poincare pairing, which on blades is a signed bijection S <-> S^c.
    """
    full = ctx.full_mask
    ac = full ^ a
    bc = full ^ b
    c = a & b
    sign = (
        merge_sign(c, full ^ c)
        * merge_sign(ac, bc)
        * merge_sign(a, ac)
        * merge_sign(b, bc)
        * ctx.orientation_sign
    )
    if (b.bit_count() * ac.bit_count()) & 1:
        sign = -sign
    return sign


def pontryagin(x: ExtClass, y: ExtClass) -> ExtClass:
    """Pontryagin product m_*(p1^* x . p2^* y)."""
    x._check(y)
    ctx = x.ctx
    if isinstance(ctx, ProductContext):
        raise ContextMismatchError("pontryagin is defined on the base model")
    full = ctx.full_mask
    acc = {}
    for a, ca in x.terms.items():
        for b, cb in y.terms.items():
            if a | b != full:
                continue
            c = ca * cb
            if _pontryagin_sign(ctx, a, b) < 0:
                c = -c
            m = a & b
            s = acc.get(m, ZERO) + c
            if s:
                acc[m] = s
            else:
                acc.pop(m, None)
    return ExtClass(ctx, acc, _clean=True)


# -- product-model operations ---------------------------------------------


def tensor_class(x: ExtClass, y: ExtClass) -> ExtClass:
    """p1^* x . p2^* y on the product model."""
    x._check(y)
    ctx = x.ctx
    n = ctx.n
    terms = {}
    for a, ca in x.terms.items():
        for b, cb in y.terms.items():
            terms[a | (b << n)] = ca * cb
    return ExtClass(ctx.product, terms, _clean=True)


def p1_pullback(x: ExtClass) -> ExtClass:
    return ExtClass(x.ctx.product, dict(x.terms), _clean=True)


def p2_pullback(x: ExtClass) -> ExtClass:
    n = x.ctx.n
    return ExtClass(
        x.ctx.product, {m << n: c for m, c in x.terms.items()}, _clean=True
    )


def m_pullback(x: ExtClass) -> ExtClass:
    """Coproduct: the algebra map sending each generator v to v' + v''."""
    ctx = x.ctx
    n = ctx.n
    acc = {}
    for mask, coef in x.terms.items():
        part = {0: coef}
        b = mask
        while b and part:
            low = b & -b
            i = low.bit_length() - 1
            part = _wedge_terms(part, {1 << i: ONE, 1 << (n + i): ONE})
            b ^= low
        for mm, cc in part.items():
            s = acc.get(mm, ZERO) + cc
            if s:
                acc[mm] = s
            else:
                acc.pop(mm, None)
    return ExtClass(ctx.product, acc, _clean=True)


def m_star(z: ExtClass) -> ExtClass:
    """Pushforward along the group law: Poincare adjoint of m_pullback."""
    pctx = z.ctx
    if not isinstance(pctx, ProductContext):
        raise ContextMismatchError("m_star expects a product-model class")
    ctx = pctx.base
    n = ctx.n
    low_mask = (1 << n) - 1
    full = ctx.full_mask
    acc = {}
    for mask, coef in z.terms.items():
        a = mask & low_mask
        b = mask >> n
        if a | b != full:
            continue
        c = coef
        if _pontryagin_sign(ctx, a, b) < 0:
            c = -c
        m = a & b
        s = acc.get(m, ZERO) + c
        if s:
            acc[m] = s
        else:
            acc.pop(m, None)
    return ExtClass(ctx, acc, _clean=True)


def restrict_slot(z: ExtClass, slot: int) -> ExtClass:
    """Restrict a product-model class along the zero section in the given
    slot (1 or 2): keep terms with no generators from that slot, reindexed
    to the base model."""
    pctx = z.ctx
    if not isinstance(pctx, ProductContext):
        raise ContextMismatchError("restrict_slot expects a product-model class")
    n = pctx.base.n
    low_mask = (1 << n) - 1
    terms = {}
    for mask, coef in z.terms.items():
        a = mask & low_mask
        b = mask >> n
        if slot == 1 and a == 0:
            terms[b] = terms.get(b, ZERO) + coef
        elif slot == 2 and b == 0:
            terms[a] = terms.get(a, ZERO) + coef
    return ExtClass(pctx.base, terms)


def product_scalar_pullback(z: ExtClass, m: int, n_scalar: int) -> ExtClass:
    """Pullback along [m] x [n] on the product model."""
    pctx = z.ctx
    if not isinstance(pctx, ProductContext):
        raise ContextMismatchError("expects a product-model class")
    nbits = pctx.base.n
    low_mask = (1 << nbits) - 1
    m = as_fraction(m)
    n_scalar = as_fraction(n_scalar)
    return ExtClass(
        pctx,
        {
            mask: coef
            * m ** (mask & low_mask).bit_count()
            * n_scalar ** (mask >> nbits).bit_count()
            for mask, coef in z.terms.items()
        },
    )


# -- polarizations and the Fourier transform -----------------------------------


class Polarization:
    """Antisymmetric rational pairing on the degree-1 generators with its
    degree-2 class d and normalization chi = integrate(d^g)/g! != 0."""

    def __init__(self, ctx: ModelContext, e_matrix, name: str = "d"):
        self.ctx = ctx
        self.name = name
        e = freeze_matrix(e_matrix)
        if len(e) != ctx.n or any(len(row) != ctx.n for row in e):
            raise DimensionMismatchError(
                f"polarization matrix must be {ctx.n}x{ctx.n}"
            )
        for i in range(ctx.n):
            for j in range(ctx.n):
                if e[i][j] != -e[j][i]:
                    raise ChowkitError(
                        f"polarization matrix {name!r} is not antisymmetric "
                        f"at ({i},{j})"
                    )
        self.e_matrix = e
        self.d = ctx.two_form(e)
        self.chi = ctx.chi(self.d)
        if self.chi == 0:
            raise DegeneratePolarizationError(
                f"polarization {name!r} is degenerate (chi = 0)"
            )
        self._biext = None
        self._exp_d = None
        self._exp_minus_d = None

    @classmethod
    def standard(cls, ctx: ModelContext, name: str = "d") -> "Polarization":
        g = ctx.g
        rows = [[0] * ctx.n for _ in range(ctx.n)]
        for i in range(g):
            rows[i][g + i] = 1
            rows[g + i][i] = -1
        return cls(ctx, rows, name)

    def __repr__(self):
        return f"Polarization({self.name!r}, g={self.ctx.g}, chi={self.chi})"

    def exp_d(self) -> ExtClass:
        if self._exp_d is None:
            self._exp_d = exp_class(self.d)
        return self._exp_d

    def exp_minus_d(self) -> ExtClass:
        if self._exp_minus_d is None:
            self._exp_minus_d = exp_class(-self.d)
        return self._exp_minus_d

    def biext(self) -> ExtClass:
        if self._biext is None:
            self._biext = biext_class(self)
        return self._biext


def exp_class(x: ExtClass) -> ExtClass:
    """Exponential of a nilpotent even class: sum x^k / k!."""
    if x.coeff(0) != 0:
        raise ChowkitError("exp_class needs a class with no degree-0 part")
    if not x.is_even():
        raise ChowkitError("exp_class needs an even-degree class")
    acc = x.ctx.unit()
    term = x.ctx.unit()
    k = 0
    while True:
        k += 1
        term = term.wedge(x) / k
        if term.is_zero():
            return acc
        acc = acc + term
        if k > x.ctx.n:
            raise ChowkitError("exp_class argument is not nilpotent")


def biext_class(pol: Polarization) -> ExtClass:
    """First Chern class of the canonical biextension:
    m^* d - p1^* d - p2^* d on the product model."""
    return m_pullback(pol.d) - p1_pullback(pol.d) - p2_pullback(pol.d)


def bracket_xi(pol: Polarization, x: ExtClass, y: ExtClass) -> ExtClass:
    """Symmetric pairing m_*(c1(xi) . p1^* x . p2^* y)."""
    x._check(y)
    if x.ctx != pol.ctx:
        raise ContextMismatchError("class does not live in the polarization context")
    return m_star(pol.biext().wedge(tensor_class(x, y)))


def fourier(pol: Polarization, x: ExtClass) -> ExtClass:
    """Fourier transform of the polarization, defined intrinsically:
    F(x) = chi^-1 . e^{-d} . [ (e^{-d} . [-1]^* x) * e^{d} ]."""
    if x.ctx != pol.ctx:
        raise ContextMismatchError("class does not live in the polarization context")
    inner = pol.exp_minus_d().wedge(pullback_scalar(-1, x))
    return pol.exp_minus_d().wedge(pontryagin(inner, pol.exp_d())) / pol.chi


def fourier_inv(pol: Polarization, x: ExtClass) -> ExtClass:
    """Inverse transform, via F^2 = (-1)^g [-1]^*."""
    y = fourier(pol, pullback_scalar(-1, x))
    return y if pol.ctx.g % 2 == 0 else -y
