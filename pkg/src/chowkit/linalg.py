"""Exact rational linear algebra: RREF, subspaces, closure engines, Lie closure.

Everything is over `fractions.Fraction`; there is no floating point and no
tolerance anywhere.  Matrices are tuples of tuples (rows), vectors are tuples.
All values are immutable after construction.
"""

from __future__ import annotations

from bisect import insort
from fractions import Fraction

from .errors import DimensionMismatchError

QQ = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings; reject floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def freeze_matrix(rows) -> tuple:
    return tuple(tuple(as_fraction(x) for x in row) for row in rows)


def zero_vector(n: int) -> tuple:
    return (ZERO,) * n


def unit_vector(n: int, i: int) -> tuple:
    return tuple(ONE if j == i else ZERO for j in range(n))


def identity_matrix(n: int) -> tuple:
    return tuple(unit_vector(n, i) for i in range(n))


def mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(c, a):
    c = as_fraction(c)
    return tuple(tuple(c * x for x in row) for row in a)


def mat_mul(a, b):
    n, k = len(a), len(b)
    if any(len(row) != k for row in a):
        raise DimensionMismatchError("matrix product shape mismatch")
    bt = tuple(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
    )


def mat_vec(a, v):
    if a and len(a[0]) != len(v):
        raise DimensionMismatchError("matrix/vector shape mismatch")
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def transpose(a):
    return tuple(zip(*a))


def mat_eq_zero(a) -> bool:
    return all(x == 0 for row in a for x in row)


def rref(rows):
    """Reduced row echelon form.

    Returns (reduced_rows, pivot_columns); zero rows are dropped and the row
    space is preserved.  Deterministic: first nonzero entry in column order
    is the pivot.
    """
    m = [list(row) for row in rows]
    if not m:
        return (), ()
    ncols = len(m[0])
    if any(len(row) != ncols for row in m):
        raise DimensionMismatchError("ragged matrix")
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = ONE / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    reduced = tuple(tuple(row) for row in m[:r])
    return reduced, tuple(pivots)


def det(a) -> Fraction:
    n = len(a)
    if any(len(row) != n for row in a):
        raise DimensionMismatchError("determinant of non-square matrix")
    m = [list(row) for row in a]
    sign = 1
    acc = ONE
    for c in range(n):
        pr = None
        for i in range(c, n):
            if m[i][c] != 0:
                pr = i
                break
        if pr is None:
            return ZERO
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            sign = -sign
        piv = m[c][c]
        acc *= piv
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / piv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return acc if sign > 0 else -acc


def mat_inverse(a):
    n = len(a)
    aug = [list(row) + list(unit_vector(n, i)) for i, row in enumerate(a)]
    red, pivots = rref(aug)
    if len(red) != n or pivots != tuple(range(n)):
        return None
    return tuple(tuple(row[n:]) for row in red)


def solve_columns(columns, target):
    """Solve sum_i x_i * columns[i] = target exactly.

    Returns a coefficient tuple or None if inconsistent.  Used for expressing
    a vector in a given (not necessarily independent) generating set; among
    solutions the one with free coefficients zero is returned.
    """
    n = len(target)
    k = len(columns)
    if any(len(c) != n for c in columns):
        raise DimensionMismatchError("column length mismatch")
    aug = [tuple(columns[j][i] for j in range(k)) + (target[i],) for i in range(n)]
    red, pivots = rref(aug)
    coeffs = [ZERO] * k
    for row, p in zip(red, pivots):
        if p == k:
            return None
        coeffs[p] = row[k]
    return tuple(coeffs)


class Subspace:
    """Row space in canonical (RREF) form; equality of subspaces is equality
    of the stored matrices."""

    __slots__ = ("ambient_dim", "rows", "pivots")

    def __init__(self, ambient_dim: int, rows=(), *, _canonical=False):
        self.ambient_dim = ambient_dim
        if _canonical:
            self.rows = rows
            self.pivots = tuple(next(i for i, x in enumerate(r) if x != 0) for r in rows)
            return
        for row in rows:
            if len(row) != ambient_dim:
                raise DimensionMismatchError(
                    f"row of length {len(row)} in ambient dimension {ambient_dim}"
                )
        reduced, pivots = rref(freeze_matrix(rows))
        self.rows = reduced
        self.pivots = pivots

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, ())

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, identity_matrix(ambient_dim))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.ambient_dim, self.rows))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"

    def reduce(self, v):
        """Remainder of v after elimination against the basis rows."""
        if len(v) != self.ambient_dim:
            raise DimensionMismatchError("vector length != ambient dimension")
        v = list(as_fraction(x) for x in v)
        for row, p in zip(self.rows, self.pivots):
            c = v[p]
            if c != 0:
                for j in range(p, self.ambient_dim):
                    v[j] -= c * row[j]
        return tuple(v)

    def contains(self, v) -> bool:
        return all(x == 0 for x in self.reduce(v))

    def contains_subspace(self, other: "Subspace") -> bool:
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatchError("ambient dimension mismatch")
        return all(self.contains(r) for r in other.rows)

    def join(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatchError("ambient dimension mismatch")
        if other.dim == 0:
            return self
        if self.dim == 0:
            return other
        return Subspace(self.ambient_dim, self.rows + other.rows)

    def with_vectors(self, vectors) -> "Subspace":
        vecs = [v for v in vectors if not self.contains(v)]
        if not vecs:
            return self
        return Subspace(self.ambient_dim, self.rows + tuple(tuple(v) for v in vecs))


def subspace_join(a: Subspace, b: Subspace) -> Subspace:
    return a.join(b)


def contains(s: Subspace, v) -> bool:
    return s.contains(v)


def _as_vector_op(op):
    if callable(op) and not isinstance(op, (tuple, list)):
        return op
    m = freeze_matrix(op)
    return lambda v: mat_vec(m, v)


def closure(s0: Subspace, ops, max_iters: int | None = None) -> Subspace:
    """Smallest subspace containing s0 and invariant under every operator.

    Operators may be square matrices or callables on coordinate vectors; they
    are applied to basis rows only, which suffices by linearity.  Terminates
    within ambient_dim iterations (each round either fixes or raises rank).
    """
    fns = [_as_vector_op(op) for op in ops]
    if not fns:
        return s0
    cap = max_iters if max_iters is not None else s0.ambient_dim + 1
    current = s0
    frontier = current.rows
    for _ in range(cap + 1):
        images = []
        for v in frontier:
            for fn in fns:
                w = fn(v)
                if len(w) != current.ambient_dim:
                    raise DimensionMismatchError("operator changed vector length")
                if not current.contains(w):
                    images.append(tuple(w))
        if not images:
            return current
        bigger = current.with_vectors(images)
        frontier = tuple(r for r in bigger.rows if not current.contains(r))
        current = bigger
    raise RuntimeError("closure did not stabilize within the iteration cap")


class SpanBuilder:
    """Incremental row reduction over sparse dict-vectors.

    Keys can be any mutually comparable values (ints, (row, col) pairs).
    Maintains fully reduced rows with unit pivots, so membership and rank
    queries are exact and deterministic.
    """

    __slots__ = ("rows",)

    def __init__(self):
        self.rows = []  # sorted list of (pivot_key, {key: coeff})

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, vec: dict) -> dict:
        v = {k: c for k, c in vec.items() if c != 0}
        for pk, row in self.rows:
            c = v.get(pk)
            if c:
                for k, x in row.items():
                    nxt = v.get(k, ZERO) - c * x
                    if nxt:
                        v[k] = nxt
                    else:
                        v.pop(k, None)
        return v

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)

    def insert(self, vec: dict) -> bool:
        """Add a vector; returns True if it enlarged the span."""
        v = self.reduce(vec)
        if not v:
            return False
        pivot = min(v)
        inv = ONE / v[pivot]
        v = {k: c * inv for k, c in v.items()}
        for _, row in self.rows:
            c = row.get(pivot)
            if c:
                for k, x in v.items():
                    nxt = row.get(k, ZERO) - c * x
                    if nxt:
                        row[k] = nxt
                    else:
                        row.pop(k, None)
        insort(self.rows, (pivot, v), key=lambda item: item[0])
        return True


def _dense_commutator(a, b):
    return mat_sub(mat_mul(a, b), mat_mul(b, a))


def _dense_vectorize(a) -> dict:
    return {
        (i, j): x for i, row in enumerate(a) for j, x in enumerate(row) if x != 0
    }


def lie_closure(gens, *, commutator=None, vectorize=None):
    """Basis of the Lie algebra generated by `gens` under commutators.

    Default element type is a dense square matrix; alternative element types
    (sparse operators) can supply their own `commutator` and `vectorize`.
    Returns a linearly independent list spanning the smallest subspace of
    operators containing the generators and closed under commutator.
    """
    gens = list(gens)
    if commutator is None:
        dims = {len(gmat) for gmat in gens}
        if len(dims) > 1:
            raise DimensionMismatchError("generators of unequal dimension")
        for gmat in gens:
            if any(len(row) != len(gmat) for row in gmat):
                raise DimensionMismatchError("non-square generator")
        commutator = _dense_commutator
        vectorize = _dense_vectorize
    span = SpanBuilder()
    basis = []
    work = list(gens)
    while work:
        cand = work.pop()
        if not span.insert(vectorize(cand)):
            continue
        for prev in basis:
            work.append(commutator(prev, cand))
        basis.append(cand)
    return basis
