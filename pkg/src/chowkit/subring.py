"""Fourier-stable subring machinery: the quasitautological ring, Lie algebras
spanned by the sl2 triples of several polarizations, and the saturation
fixed-point construction of finite-dimensional stable subrings."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ChowkitError, DimensionMismatchError
from .linalg import ONE, ZERO, Subspace, SpanBuilder, closure
from .model import (
    ExtClass,
    ModelContext,
    Polarization,
    fourier,
    pontryagin,
    pullback_scalar,
    pushforward_linear,
    pullback_linear,
    wedge,
)
from .operators import LinOp, sl2_of


def class_to_vec(x: ExtClass) -> tuple:
    return tuple(x.terms.get(m, ZERO) for m in range(x.ctx.dim))


def vec_to_class(ctx: ModelContext, v) -> ExtClass:
    return ExtClass(ctx, {m: c for m, c in enumerate(v) if c})


def subspace_of_classes(ctx: ModelContext, classes) -> Subspace:
    return Subspace(ctx.dim, [class_to_vec(x) for x in classes])


def subspace_classes(ctx: ModelContext, s: Subspace):
    return [vec_to_class(ctx, row) for row in s.rows]


def degree_subspace(ctx: ModelContext, k: int) -> Subspace:
    return subspace_of_classes(
        ctx, (ctx.blade(m) for m in range(ctx.dim) if m.bit_count() == k)
    )


def _product_closure(ctx: ModelContext, s: Subspace, product) -> Subspace:
    """Smallest subspace containing s closed under the bilinear product,
    computed by saturating with pairwise products of basis classes."""
    current = s
    for _ in range(ctx.dim + 1):
        basis = subspace_classes(ctx, current)
        extra = []
        for i, x in enumerate(basis):
            for y in basis[i:]:
                v = class_to_vec(product(x, y))
                if not current.contains(v):
                    extra.append(v)
        if not extra:
            return current
        current = current.with_vectors(extra)
    raise RuntimeError("product closure did not stabilize")


@dataclass
class SubringState:
    """Subspace together with exactly verified closure flags."""

    ctx: ModelContext
    subspace: Subspace
    pontryagin_closed: bool = False
    cup_closed: bool = False
    fourier_stable: dict = field(default_factory=dict)  # polarization name -> bool

    @property
    def dim(self) -> int:
        return self.subspace.dim


def qt_ring(ctx: ModelContext) -> SubringState:
    """Pontryagin subalgebra generated by the point classes and the
    codimension-1 cycle degrees: H^{2g} + H^{2g-2}."""
    seed = subspace_of_classes(ctx, [ctx.point()]).join(
        degree_subspace(ctx, ctx.n - 2)
    )
    sub = _product_closure(ctx, seed, pontryagin)
    return SubringState(ctx, sub, pontryagin_closed=True)


def pontryagin_subalgebra(ctx: ModelContext, w: Subspace) -> SubringState:
    """Smallest Pontryagin-closed subspace containing the span of the point
    class and w."""
    if w.ambient_dim != ctx.dim:
        raise DimensionMismatchError("subspace does not match the context")
    seed = subspace_of_classes(ctx, [ctx.point()]).join(w)
    sub = _product_closure(ctx, seed, pontryagin)
    return SubringState(ctx, sub, pontryagin_closed=True)


@dataclass
class StabilityReport:
    cup_closed: bool
    pontryagin_closed: bool
    fourier_stable: dict  # polarization name -> bool
    failures: list

    @property
    def ok(self) -> bool:
        return (
            self.cup_closed
            and self.pontryagin_closed
            and all(self.fourier_stable.values())
        )


def check_stability(state, polarizations) -> StabilityReport:
    """Exact verification that a subspace is closed under both products and
    mapped into itself by the Fourier transform of every polarization."""
    if isinstance(state, SubringState):
        ctx, sub = state.ctx, state.subspace
    else:
        raise ChowkitError("expected a SubringState")
    basis = subspace_classes(ctx, sub)
    failures = []

    def inside(x: ExtClass) -> bool:
        return sub.contains(class_to_vec(x))

    cup_ok = True
    pont_ok = True
    for i, x in enumerate(basis):
        for y in basis[i:]:
            if not inside(wedge(x, y)):
                cup_ok = False
                failures.append(("cup", str(x), str(y)))
            if not inside(pontryagin(x, y)):
                pont_ok = False
                failures.append(("pontryagin", str(x), str(y)))
    fourier_ok = {}
    for pol in polarizations:
        ok = True
        for x in basis:
            if not inside(fourier(pol, x)):
                ok = False
                failures.append(("fourier", pol.name, str(x)))
        fourier_ok[pol.name] = ok
    report = StabilityReport(cup_ok, pont_ok, fourier_ok, failures)
    if isinstance(state, SubringState):
        state.cup_closed = cup_ok
        state.pontryagin_closed = pont_ok
        state.fourier_stable.update(fourier_ok)
    return report


@dataclass
class GradedLie:
    """Lie algebra of operators graded by the commutator with the common
    grading operator h; weights are even integers in [-2g, 2g]."""

    ctx: ModelContext
    by_weight: dict  # weight -> list[LinOp]

    @property
    def basis(self):
        return [op for ops in self.by_weight.values() for op in ops]

    @property
    def dim(self) -> int:
        return sum(len(ops) for ops in self.by_weight.values())

    def part(self, predicate):
        return [
            op for w, ops in self.by_weight.items() if predicate(w) for op in ops
        ]

    @property
    def nonneg(self):
        return self.part(lambda w: w >= 0)

    @property
    def positive(self):
        return self.part(lambda w: w > 0)

    @property
    def zero_part(self):
        return self.part(lambda w: w == 0)


def _weight_components(ctx: ModelContext, op: LinOp) -> dict:
    """Split an operator into ad(h)-eigencomponents; on the blade basis the
    (row, col) entry has weight deg(row) - deg(col)."""
    parts = {}
    for j, col in op.cols.items():
        dj = j.bit_count()
        for i, c in col.items():
            w = i.bit_count() - dj
            parts.setdefault(w, {}).setdefault(j, {})[i] = c
    return {
        w: LinOp(op.dim, cols, h_weight=w, _clean=True)
        for w, cols in parts.items()
    }


def build_lie(polarizations) -> GradedLie:
    """Lie closure of the sl2 triples of the given polarizations, graded by
    the common h."""
    pols = list(polarizations)
    if not pols:
        raise ChowkitError("at least one polarization is required")
    ctx = pols[0].ctx
    gens = []
    for pol in pols:
        if pol.ctx != ctx:
            raise ChowkitError("polarizations live in different contexts")
        triple = sl2_of(pol)
        gens.extend([triple.e, triple.f])
    gens.append(sl2_of(pols[0]).h)

    from .linalg import lie_closure

    basis = lie_closure(
        gens,
        commutator=lambda a, b: a.commutator(b),
        vectorize=lambda op: op.entries_dict(),
    )
    # regrade: components of closure elements still lie in the closure
    span = SpanBuilder()
    by_weight = {}
    for op in basis:
        for w, comp in sorted(_weight_components(ctx, op).items()):
            if span.insert(comp.entries_dict()):
                by_weight.setdefault(w, []).append(comp)
    return GradedLie(ctx, dict(sorted(by_weight.items())))


def graded_lie_is_closed(lie: GradedLie) -> bool:
    """Commutator of any two basis elements stays in the span (exact)."""
    basis = lie.basis
    span = SpanBuilder()
    for op in basis:
        span.insert(op.entries_dict())
    for i, a in enumerate(basis):
        for b in basis[i + 1 :]:
            if not span.contains(a.commutator(b).entries_dict()):
                return False
    return True


def _even_subspace_check(ctx: ModelContext, v: Subspace):
    even = set(ctx.even_masks)
    for row in v.rows:
        for m, c in enumerate(row):
            if c and m not in even:
                raise ChowkitError("subspace is not inside the even subalgebra")


def saturate(v: Subspace, lie: GradedLie, max_iters: int | None = None) -> Subspace:
    """Smallest fixed point of V -> V + <0-part closure of the positive-part
    hits of V * V>, starting from the nonnegative-part operator closure of V.

    Monotone, terminates within the ambient dimension (each non-final round
    raises the rank).
    """
    ctx = lie.ctx
    _even_subspace_check(ctx, v)
    ops_nonneg = [op.apply_vec for op in lie.nonneg]
    ops_pos = [op.apply_vec for op in lie.positive]
    ops_zero = [op.apply_vec for op in lie.zero_part]
    current = closure(v, ops_nonneg) if ops_nonneg else v
    cap = max_iters if max_iters is not None else ctx.dim + 1
    for _ in range(cap):
        basis = subspace_classes(ctx, current)
        prods = []
        for i, x in enumerate(basis):
            for y in basis[i:]:
                p = pontryagin(x, y)
                if not p.is_zero():
                    prods.append(class_to_vec(p))
        square = Subspace(ctx.dim, prods)
        hits = []
        for op in ops_pos:
            for row in square.rows:
                w = op(row)
                if any(w):
                    hits.append(w)
        hit_space = Subspace(ctx.dim, hits)
        hit_space = closure(hit_space, ops_pos) if ops_pos else hit_space
        hit_space = closure(hit_space, ops_zero) if ops_zero else hit_space
        bigger = current.join(hit_space)
        bigger = closure(bigger, ops_nonneg) if ops_nonneg else bigger
        if bigger == current:
            return current
        current = bigger
    raise RuntimeError("saturation did not reach a fixed point")


@dataclass
class PonLemReport:
    """Hypothesis checks and conclusions for bracket-closed subspaces of the
    top two cycle degrees."""

    in_degrees: bool
    bracket_closed: bool
    d_stable: bool
    m_stable: bool
    conclusion_fourier: bool | None
    conclusion_cup: bool | None
    subring_dim: int

    @property
    def hypotheses_ok(self) -> bool:
        return (
            self.in_degrees and self.bracket_closed and self.d_stable and self.m_stable
        )

    @property
    def ok(self) -> bool:
        if not self.hypotheses_ok:
            return True  # nothing asserted when hypotheses fail
        return bool(self.conclusion_fourier) and bool(self.conclusion_cup)


def check_pon_lem(v: Subspace, pol: Polarization, m_samples=(-2, 2, 3)) -> PonLemReport:
    """Validate the hypotheses on V (inside H^{2g} + H^{2g-2}, closed under
    the polarization bracket, under cup with d, and under integer pullbacks),
    build the Pontryagin subalgebra R generated by V + Q d^{g-1} over the
    point class, and verify that R is Fourier-stable and cup-closed."""
    ctx = pol.ctx
    top = degree_subspace(ctx, ctx.n).join(degree_subspace(ctx, ctx.n - 2))
    in_degrees = top.contains_subspace(v)

    from .model import bracket_xi

    basis = subspace_classes(ctx, v)
    bracket_closed = all(
        v.contains(class_to_vec(bracket_xi(pol, x, y)))
        for i, x in enumerate(basis)
        for y in basis[i:]
    )
    d_stable = all(
        v.contains(class_to_vec(wedge(pol.d, x))) for x in basis
    )
    m_stable = all(
        v.contains(class_to_vec(pullback_scalar(m, x)))
        for x in basis
        for m in m_samples
    )

    dpow = ctx.unit()
    for _ in range(ctx.g - 1):
        dpow = dpow.wedge(pol.d)
    v_tilde = v.join(subspace_of_classes(ctx, [dpow]))
    ring = pontryagin_subalgebra(ctx, v_tilde)
    report = check_stability(ring, [pol])
    return PonLemReport(
        in_degrees=in_degrees,
        bracket_closed=bracket_closed,
        d_stable=d_stable,
        m_stable=m_stable,
        conclusion_fourier=report.fourier_stable[pol.name],
        conclusion_cup=report.cup_closed,
        subring_dim=ring.dim,
    )


def pushpull_stable(ctx: ModelContext, state: SubringState, matrices) -> bool:
    """Stability of a subspace under pushforward and pullback along sample
    integer matrices on the degree-1 generators."""
    sub = state.subspace
    basis = subspace_classes(ctx, sub)
    for m in matrices:
        for x in basis:
            if not sub.contains(class_to_vec(pushforward_linear(m, x))):
                return False
            if not sub.contains(class_to_vec(pullback_linear(m, x))):
                return False
    return True


def cup_subalgebra_of_degree2(ctx: ModelContext) -> Subspace:
    """Cup subalgebra generated by the unit and all degree-2 blades."""
    seed = subspace_of_classes(ctx, [ctx.unit()]).join(degree_subspace(ctx, 2))
    return _product_closure(ctx, seed, wedge)
