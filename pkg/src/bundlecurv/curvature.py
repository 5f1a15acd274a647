"""Sectional curvature of the quotient metric, term by term.

Three ingredients are assembled at a base point g0 (fiber point at the
identity coset):

* group_curvature: unnormalized sectional numerator of a left-invariant
  metric on the group, in the algebraic closed form quadratic in each slot.
* fiber_curvature: unnormalized numerator for the fiber manifold, computed as
  a one-sided quotient of the subgroup with its own invariant metric.
* the vertical correction from the submersion onto the quotient: +3/4 times
  the squared vertical component of the bracket of the two horizontal fields.

The bracket of horizontal fields has a closed form; an independent
finite-difference route through an explicit chart is provided alongside it
and is never merged with the closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import tolerances as tol
from .bundle import (
    BundleTriple,
    TangentPair,
    _project_vertical_arrays,
    _vertical_arrays,
    product_inner,
)
from .errors import DimensionError, ValidationError
from .liealg import AlgebraElement, GroupElement, ad_matrix, bracket
from .metric import MetricSpec


# -- group side -----------------------------------------------------------------


def mixed_bracket_form(metric: MetricSpec, z1: AlgebraElement, z2: AlgebraElement) -> AlgebraElement:
    """B(Z1, Z2) = (1/2)([Z1, Phi Z2] + [Z2, Phi Z1]), the symmetrized mixed bracket."""
    t1 = bracket(z1, metric.apply_phi(z2))
    t2 = bracket(z2, metric.apply_phi(z1))
    return 0.5 * (t1 + t2)


def group_curvature(metric: MetricSpec, z1: AlgebraElement, z2: AlgebraElement) -> float:
    """Unnormalized sectional numerator of the left-invariant metric h = <Phi ., .>.

    Quadratic in each argument; reduces to (1/4)|[z1, z2]|^2 when Phi is the
    identity. Normalize by the h-Gram determinant of the plane to get the
    usual sectional curvature.
    """
    if z1.algebra != metric.algebra or z2.algebra != metric.algebra:
        raise DimensionError("plane elements and metric live on different algebras")
    pz1 = metric.apply_phi(z1)
    pz2 = metric.apply_phi(z2)
    br = bracket(z1, z2)
    mixed = bracket(pz1, z2) + bracket(z1, pz2)
    term1 = 0.5 * float(mixed.coords @ br.coords)
    term2 = -0.75 * metric.h_norm2(br)
    b12 = 0.5 * (bracket(z1, pz2) + bracket(z2, pz1))
    b11 = bracket(z1, pz1)
    b22 = bracket(z2, pz2)
    term3 = float(b12.coords @ metric.apply_phi_inv(b12).coords)
    term4 = -float(b11.coords @ metric.apply_phi_inv(b22).coords)
    return term1 + term2 + term3 + term4


# -- fiber side -----------------------------------------------------------------


def _extended_fiber_operator(triple: BundleTriple, metric: MetricSpec) -> np.ndarray:
    """The fiber operator continued to the whole algebra: identity off m."""
    d = triple.algebra.dim
    if not metric.has_fiber_metric:
        return np.eye(d)
    mb = triple.m_space.basis
    align = metric.fiber_space.basis @ mb.T
    fm = align.T @ metric.fiber_matrix @ align
    return np.eye(d) - mb.T @ mb + mb.T @ fm @ mb


def fiber_curvature(
    triple: BundleTriple,
    metric: MetricSpec,
    x: AlgebraElement,
    y: AlgebraElement,
) -> float:
    """Unnormalized sectional numerator of the fiber manifold at the identity coset.

    The fiber is the quotient of the subgroup by the isotropy group, carrying
    the invariant metric induced by the fiber operator. Computed as the
    subgroup's left-invariant curvature for the block operator (identity on
    the isotropy directions) plus the submersion correction, whose vertical
    bracket part is the isotropy component of [x, y].
    """
    for v in (x, y):
        if triple.m_space.membership_residual(v) > tol.SUBSPACE_TOL * max(1.0, v.norm()):
            raise ValidationError("fiber curvature needs directions inside the fiber subspace")
    if triple.m_space.dim == 0:
        return 0.0
    psi = MetricSpec(triple.algebra, _extended_fiber_operator(triple, metric))
    base = group_curvature(psi, x, y)
    k_part = triple.k_space.project(bracket(x, y))
    return base + 0.75 * float(k_part.coords @ k_part.coords)


# -- horizontal fields and their bracket -------------------------------------------


def _check_no_isotropy_part(triple: BundleTriple, u: AlgebraElement) -> None:
    kp = triple.k_space.project(u)
    if kp.norm() > tol.K_PROJECTION_TOL * max(1.0, u.norm()):
        raise ValidationError("direction has an isotropy component")


def horizontal_bracket(
    triple: BundleTriple,
    metric: MetricSpec,
    g0: GroupElement,
    x: AlgebraElement,
    y: AlgebraElement,
) -> TangentPair:
    """Closed form of the bracket of the two horizontal fields at (g0, identity coset).

    The fields extend the lifts of the fixed directions x and y over a
    neighborhood; their bracket feeds the vertical correction term. Bilinear
    and antisymmetric in (x, y).
    """
    _check_no_isotropy_part(triple, x)
    _check_no_isotropy_part(triple, y)
    alg = triple.algebra
    conj = g0.inverse().matrix
    xt = AlgebraElement(alg, alg._coords_of(conj @ x.matrix @ conj.T))
    yt = AlgebraElement(alg, alg._coords_of(conj @ y.matrix @ conj.T))
    pxt = metric.apply_phi_inv(xt)
    pyt = metric.apply_phi_inv(yt)
    fx = triple.fiber_apply_inv(metric, triple.m_space.project(x))
    fy = triple.fiber_apply_inv(metric, triple.m_space.project(y))
    swap = bracket(fy, x) - bracket(fx, y)
    swap_t = AlgebraElement(alg, alg._coords_of(conj @ swap.matrix @ conj.T))
    g_comp = (
        bracket(pxt, pyt)
        + metric.apply_phi_inv(swap_t)
        - metric.apply_phi_inv(bracket(pxt, yt))
        + metric.apply_phi_inv(bracket(pyt, xt))
    )
    f_comp = triple.m_space.project(bracket(fx, fy))
    return TangentPair(g_comp, f_comp)


def _transport_series(alg, coords: np.ndarray) -> np.ndarray:
    """Left-trivialized differential of exp at `coords`: (1 - e^{-ad}) / ad.

    Truncated at fourth order; the callers only evaluate it at chart offsets
    of magnitude around the finite-difference step, where the truncation error
    is far below roundoff.
    """
    a = ad_matrix(AlgebraElement(alg, coords))
    d = alg.dim
    out = np.eye(d) - a / 2.0
    a2 = a @ a
    out += a2 / 6.0
    out -= a2 @ a / 24.0
    out += a2 @ a2 / 120.0
    return out


def _fd_field(
    triple: BundleTriple,
    metric: MetricSpec,
    g0m: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    u: AlgebraElement,
    fib_const: np.ndarray,
):
    """Chart components of the horizontal field of u at chart point (a, b)."""
    alg = triple.algebra
    mb = triple.m_space.basis
    g = g0m @ expm(alg._matrix_of(a))
    ym = expm(alg._matrix_of(mb.T @ b)) if b.size else np.eye(alg.n)
    q = g.T @ ym
    moved = AlgebraElement(alg, alg._coords_of(q @ u.matrix @ q.T))
    grp = np.linalg.solve(_transport_series(alg, a), metric.apply_phi_inv(moved).coords)
    if b.size:
        t_full = _transport_series(alg, mb.T @ b)
        l_mat = mb @ t_full @ mb.T
        fib = np.linalg.solve(l_mat, fib_const)
    else:
        fib = fib_const
    return grp, fib


def horizontal_bracket_fd(
    triple: BundleTriple,
    metric: MetricSpec,
    g0: GroupElement,
    x: AlgebraElement,
    y: AlgebraElement,
    step: float = tol.FD_STEP_DEFAULT,
) -> TangentPair:
    """Finite-difference evaluation of the horizontal field bracket.

    Works in an explicit chart (exponential offsets from g0 on the group side,
    exponential coset offsets on the fiber side), differentiating each field
    along the other's value by central differences. Independent of the closed
    form; used to cross-check it, never to replace it.
    """
    lo, hi = tol.FD_STEP_RANGE
    if not (lo <= step <= hi):
        raise ValidationError(f"step {step} outside the supported range [{lo}, {hi}]")
    _check_no_isotropy_part(triple, x)
    _check_no_isotropy_part(triple, y)
    alg = triple.algebra
    mb = triple.m_space.basis
    md = triple.m_space.dim
    g0m = g0.matrix

    def fib_const(u: AlgebraElement) -> np.ndarray:
        um = triple.m_space.project(u)
        return -mb @ triple.fiber_apply_inv(metric, um).coords

    cx = fib_const(x)
    cy = fib_const(y)

    def field(u, c, a, b):
        return _fd_field(triple, metric, g0m, a, b, u, c)

    zero_a = np.zeros(alg.dim)
    zero_b = np.zeros(md)
    x_grp, x_fib = field(x, cx, zero_a, zero_b)
    y_grp, y_fib = field(y, cy, zero_a, zero_b)

    def directional(u, c, da, db):
        gp, fp = field(u, c, step * da, step * db)
        gm, fm_ = field(u, c, -step * da, -step * db)
        return (gp - gm) / (2.0 * step), (fp - fm_) / (2.0 * step)

    dy_g, dy_f = directional(y, cy, x_grp, x_fib)
    dx_g, dx_f = directional(x, cx, y_grp, y_fib)
    g_comp = AlgebraElement(alg, dy_g - dx_g)
    f_comp = triple.m_space.from_component_coords(dy_f - dx_f)
    return TangentPair(g_comp, f_comp)


# -- full assembly ------------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureSample:
    """One sectional curvature evaluation with its term breakdown.

    value is the unnormalized numerator; divide by the plane Gram determinant
    (normalizer) for the scale-invariant sectional curvature.
    """

    value: float
    group_term: float
    fiber_term: float
    vertical_term: float
    normalizer: float

    @property
    def normalized(self) -> float:
        if self.normalizer < tol.PLANE_GRAM_TOL:
            raise ValidationError("plane is numerically degenerate; cannot normalize")
        return self.value / self.normalizer


def sectional(
    triple: BundleTriple,
    metric: MetricSpec,
    g0: GroupElement,
    x: AlgebraElement,
    y: AlgebraElement,
    validate: bool = True,
) -> CurvatureSample:
    """Sectional curvature numerator of the quotient at base point g0.

    x and y are left-trivialized directions orthogonal to the isotropy block;
    the fiber point is the identity coset. The value scales as a^2 b^2 under
    (x, y) -> (a x, b y) and is symmetric in the two slots.
    """
    if validate:
        triple.check_metric(metric)
    _check_no_isotropy_part(triple, x)
    _check_no_isotropy_part(triple, y)
    alg = triple.algebra
    conj = g0.inverse().matrix
    xt = AlgebraElement(alg, alg._coords_of(conj @ x.matrix @ conj.T))
    yt = AlgebraElement(alg, alg._coords_of(conj @ y.matrix @ conj.T))
    z1 = metric.apply_phi_inv(xt)
    z2 = metric.apply_phi_inv(yt)
    group_term = group_curvature(metric, z1, z2)
    if triple.m_space.dim > 0:
        fx = triple.fiber_apply_inv(metric, triple.m_space.project(x))
        fy = triple.fiber_apply_inv(metric, triple.m_space.project(y))
        fiber_term = fiber_curvature(triple, metric, fx, fy)
    else:
        fx = fy = triple.algebra.zero()
        fiber_term = 0.0
    br = horizontal_bracket(triple, metric, g0, x, y)
    vg, vf = _vertical_arrays(triple, g0.inverse().matrix, None)
    proj = _project_vertical_arrays(triple, metric, vg, vf, br)
    vertical_term = 0.75 * proj.norm2
    lift_x = TangentPair(z1, -1.0 * fx)
    lift_y = TangentPair(z2, -1.0 * fy)
    nxx = product_inner(triple, metric, lift_x, lift_x)
    nyy = product_inner(triple, metric, lift_y, lift_y)
    nxy = product_inner(triple, metric, lift_x, lift_y)
    return CurvatureSample(
        value=group_term + fiber_term + vertical_term,
        group_term=group_term,
        fiber_term=fiber_term,
        vertical_term=vertical_term,
        normalizer=nxx * nyy - nxy * nxy,
    )
