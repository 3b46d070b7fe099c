"""Endomorphisms fixed by the Rosati involution and the induced Jordan
structure on degree-2 classes.

An endomorphism is a 2g x 2g rational matrix M acting on the degree-1
generators, constrained by M^T E = E M for the polarization matrix E
(equivalently E M antisymmetric, so M determines the degree-2 class L(M)
with coefficient matrix E M, normalized so that L(identity) = d).
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ChowkitError, NotQuadraticError, RosatiError
from .linalg import (
    ONE,
    ZERO,
    det,
    freeze_matrix,
    identity_matrix,
    mat_add,
    mat_eq_zero,
    mat_inverse,
    mat_mul,
    mat_scale,
    mat_sub,
    solve_columns,
    transpose,
)
from .model import (
    ExtClass,
    Polarization,
    bracket_xi,
    exp_class,
    fourier,
    fourier_inv,
)

QQ = Fraction


def rosati_residual(pol: Polarization, m) -> tuple:
    """M^T E - E M; zero iff M is Rosati-symmetric."""
    m = freeze_matrix(m)
    return mat_sub(mat_mul(transpose(m), pol.e_matrix), mat_mul(pol.e_matrix, m))


class Endo:
    """Rosati-symmetric rational endomorphism relative to a polarization."""

    __slots__ = ("pol", "m", "name")

    def __init__(self, pol: Polarization, matrix, name: str = "f"):
        self.pol = pol
        self.name = name
        m = freeze_matrix(matrix)
        n = pol.ctx.n
        if len(m) != n or any(len(row) != n for row in m):
            raise ChowkitError(f"endomorphism {name!r} must be {n}x{n}")
        res = rosati_residual(pol, m)
        if not mat_eq_zero(res):
            raise RosatiError(
                f"endomorphism {name!r} violates Rosati symmetry "
                f"(M^T E != E M)",
                residual=res,
            )
        self.m = m

    def __repr__(self):
        return f"Endo({self.name!r}, g={self.pol.ctx.g})"

    def det(self) -> Fraction:
        return det(self.m)


def L_of(f: Endo) -> ExtClass:
    """Degree-2 class with coefficient matrix E M; L_of(identity) = d."""
    return _L_of_matrix(f.pol, f.m)


def _L_of_matrix(pol: Polarization, m) -> ExtClass:
    omega = mat_mul(pol.e_matrix, m)
    if not mat_eq_zero(mat_add(omega, transpose(omega))):
        raise RosatiError(
            "matrix is not Rosati-symmetric; no associated 2-form",
            residual=rosati_residual(pol, m),
        )
    return pol.ctx.two_form(omega)


def N_of(f: Endo) -> Fraction:
    """Relative Euler number chi(L(f)) / chi(d); N(f)^2 = det(M)."""
    return _N_of_matrix(f.pol, f.m)


def _N_of_matrix(pol: Polarization, m) -> Fraction:
    return pol.ctx.chi(_L_of_matrix(pol, m)) / pol.chi


def check_fourier_exp(f: Endo) -> bool:
    """F(e^{L(f)}) = N(f) e^{L(-f^{-1})} for invertible f."""
    pol = f.pol
    inv = mat_inverse(f.m)
    if inv is None:
        raise ChowkitError(f"endomorphism {f.name!r} is singular")
    lhs = fourier(pol, exp_class(L_of(f)))
    rhs = exp_class(_L_of_matrix(pol, mat_scale(-1, inv))).scale(N_of(f))
    return lhs == rhs


def jordan_product_matrix(f1: Endo, f2: Endo):
    return mat_add(mat_mul(f1.m, f2.m), mat_mul(f2.m, f1.m))


def check_jordan_product(f1: Endo, f2: Endo) -> bool:
    """{F(L(f1)), F(L(f2))} = (-1)^g chi(d) F(L(f1 f2 + f2 f1))."""
    pol = f1.pol
    if f2.pol is not pol:
        raise ChowkitError("endomorphisms use different polarizations")
    x1 = fourier(pol, L_of(f1))
    x2 = fourier(pol, L_of(f2))
    lhs = bracket_xi(pol, x1, x2)
    sign = 1 if pol.ctx.g % 2 == 0 else -1
    rhs = fourier(pol, _L_of_matrix(pol, jordan_product_matrix(f1, f2))).scale(
        pol.chi * sign
    )
    return lhs == rhs


def check_gen_series(f1: Endo, f2: Endo, t) -> bool:
    """Exponential generating identities behind the Jordan product.

    Checks, exactly at the rational t:
      (a) {F(e^{L(f1)}), F(e^{L(f2)})} =
            (-1)^g chi(d) F(L(f1 f2 + f2 f1) . e^{L(f1 + f2)});
      (b) F^{-1}(e^{t d} . [(e^{-t d} . F(e^{L(f1)})) * (e^{-t d} . F(e^{L(f2)}))])
            = (-1)^g chi(d) N(1 + t f1) N(1 + t f2) N(1 - t f) e^{L(f (1 - t f)^{-1})}
          with f = f1 (1 + t f1)^{-1} + f2 (1 + t f2)^{-1}.
    Raises when a required inverse does not exist at this t.
    """
    pol = f1.pol
    if f2.pol is not pol:
        raise ChowkitError("endomorphisms use different polarizations")
    ctx = pol.ctx
    t = Fraction(t)
    sign = 1 if ctx.g % 2 == 0 else -1
    ident = identity_matrix(ctx.n)

    fe1 = fourier(pol, exp_class(L_of(f1)))
    fe2 = fourier(pol, exp_class(L_of(f2)))

    lhs_a = bracket_xi(pol, fe1, fe2)
    rhs_a = fourier(
        pol,
        _L_of_matrix(pol, jordan_product_matrix(f1, f2)).wedge(
            exp_class(_L_of_matrix(pol, mat_add(f1.m, f2.m)))
        ),
    ).scale(pol.chi * sign)
    if lhs_a != rhs_a:
        return False

    p1 = mat_add(ident, mat_scale(t, f1.m))
    p2 = mat_add(ident, mat_scale(t, f2.m))
    p1_inv = mat_inverse(p1)
    p2_inv = mat_inverse(p2)
    if p1_inv is None or p2_inv is None:
        raise ChowkitError(f"1 + t f is singular at t = {t}")
    fmat = mat_add(mat_mul(f1.m, p1_inv), mat_mul(f2.m, p2_inv))
    q = mat_sub(ident, mat_scale(t, fmat))
    q_inv = mat_inverse(q)
    if q_inv is None:
        raise ChowkitError(f"1 - t f is singular at t = {t}")

    from .model import pontryagin

    e_td = exp_class(pol.d.scale(t)) if t else ctx.unit()
    e_mtd = exp_class(pol.d.scale(-t)) if t else ctx.unit()
    lhs_b = fourier_inv(
        pol, e_td.wedge(pontryagin(e_mtd.wedge(fe1), e_mtd.wedge(fe2)))
    )
    coeff = (
        pol.chi
        * sign
        * _N_of_matrix(pol, p1)
        * _N_of_matrix(pol, p2)
        * _N_of_matrix(pol, q)
    )
    rhs_b = exp_class(_L_of_matrix(pol, mat_mul(fmat, q_inv))).scale(coeff)
    return lhs_b == rhs_b


def quadratic_coeffs(m):
    """(alpha, beta) with M^2 = alpha M + beta I, or None."""
    m = freeze_matrix(m)
    n = len(m)
    m2 = mat_mul(m, m)
    flat = lambda a: tuple(x for row in a for x in row)
    sol = solve_columns([flat(m), flat(identity_matrix(n))], flat(m2))
    return None if sol is None else (sol[0], sol[1])


def check_jordan_identity(f: Endo, y: ExtClass) -> bool:
    """Jordan identity {{x,y},{x,x}} = {x,{y,{x,x}}} for x = F(L(f)), which
    requires f to satisfy a quadratic equation over the rationals."""
    pol = f.pol
    if quadratic_coeffs(f.m) is None:
        raise NotQuadraticError(
            f"endomorphism {f.name!r} has no quadratic minimal equation"
        )
    x = fourier(pol, L_of(f))
    xx = bracket_xi(pol, x, x)
    lhs = bracket_xi(pol, bracket_xi(pol, x, y), xx)
    rhs = bracket_xi(pol, x, bracket_xi(pol, y, xx))
    return lhs == rhs


def random_rosati_matrix(pol: Polarization, rng, bound: int = 3):
    """Random Rosati-symmetric matrix: E^{-1} Omega for random antisymmetric
    Omega with entries in [-bound, bound]."""
    n = pol.ctx.n
    e_inv = mat_inverse(pol.e_matrix)
    omega = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            c = QQ(rng.randint(-bound, bound))
            omega[i][j] = c
            omega[j][i] = -c
    return mat_mul(e_inv, tuple(tuple(row) for row in omega))
