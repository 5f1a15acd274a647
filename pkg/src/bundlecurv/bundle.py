"""Subalgebra chains k <= h < g and the associated bundle tangent calculus.

Total spaces here are quotients of a product: a compact matrix group G with a
left-invariant metric times a fiber H/K, glued along the diagonal left
H-action. Tangent vectors at a point are pairs (group part in g via left
trivialization, fiber part in m = h minus k). This module provides the chain
validation, the catalog of block-embedded chains, horizontal lifts, the
vertical subspace with its Gram projection, and the fatness diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from . import tolerances as tol
from .errors import (
    DimensionError,
    IllConditionedError,
    NotApplicableError,
    ValidationError,
)
from .liealg import (
    AlgebraElement,
    GroupElement,
    LieAlgebra,
    Subspace,
    ad_matrix,
    bracket,
    so,
)
from .metric import MetricSpec, interpolated_collapse_metric


def _check_closure(name: str, space: Subspace) -> None:
    alg = space.algebra
    for i in range(space.dim):
        a = space.from_component_coords(np.eye(space.dim)[i])
        for j in range(i + 1, space.dim):
            b = space.from_component_coords(np.eye(space.dim)[j])
            resid = space.membership_residual(bracket(a, b))
            if resid > tol.CLOSURE_TOL:
                raise ValidationError(
                    f"{name} is not closed under the bracket (residual {resid:.3e})"
                )


@dataclass(frozen=True)
class BundleTriple:
    """A chain of subalgebras k <= h < g defining the bundle geometry.

    k may be zero-dimensional (trivial isotropy, fiber = whole subgroup).
    m is the orthogonal complement of k inside h (fiber directions), p the
    complement of h inside g (base directions transverse to the subgroup).
    """

    algebra: LieAlgebra
    k_space: Subspace
    h_space: Subspace
    name: str | None = None
    blocks: tuple | None = None

    def __post_init__(self):
        if self.k_space.algebra != self.algebra or self.h_space.algebra != self.algebra:
            raise DimensionError("subspaces must live in the stated algebra")
        if self.h_space.dim == 0:
            raise ValidationError("the subgroup chain needs a nonzero subalgebra h")
        if self.h_space.dim >= self.algebra.dim:
            raise ValidationError("h must be a proper subalgebra of g")
        if not self.h_space.contains_subspace(self.k_space):
            raise ValidationError("k must sit inside h")
        _check_closure("h", self.h_space)
        _check_closure("k", self.k_space)
        m_space = self.k_space.complement_within(self.h_space)
        p_space = self.h_space.complement_within(Subspace.full(self.algebra))
        object.__setattr__(self, "m_space", m_space)
        object.__setattr__(self, "p_space", p_space)

    def __repr__(self):
        tag = self.name or f"dims(k,h,g)=({self.k_space.dim},{self.h_space.dim},{self.algebra.dim})"
        return f"BundleTriple({tag})"

    def check_metric(self, metric: MetricSpec) -> None:
        """Validate that a metric's fiber block matches this chain.

        The fiber operator must act on m and commute with the isotropy action
        ad_k restricted to m; without that the fiber metric does not descend
        to the quotient fiber.
        """
        if metric.algebra != self.algebra:
            raise DimensionError("metric and chain live on different algebras")
        if not metric.has_fiber_metric:
            return
        fs = metric.fiber_space
        if not (fs.contains_subspace(self.m_space) and self.m_space.contains_subspace(fs)):
            raise ValidationError("metric fiber block does not act on the chain's fiber directions")
        mb = self.m_space.basis
        for i in range(self.k_space.dim):
            a = self.k_space.from_component_coords(np.eye(self.k_space.dim)[i])
            # ad_a restricted to m, expressed in m's own basis
            r = mb @ ad_matrix(a) @ mb.T
            # fiber_matrix is expressed in metric.fiber_space's basis; realign
            align = fs.basis @ mb.T
            fm = align.T @ metric.fiber_matrix @ align
            resid = np.abs(fm @ r - r @ fm).max()
            if resid > tol.FIBER_COMMUTE_TOL:
                raise ValidationError(
                    f"fiber metric does not commute with the isotropy action (residual {resid:.3e})"
                )

    def fiber_inner(self, metric: MetricSpec, a: AlgebraElement, b: AlgebraElement) -> float:
        """Metric on fiber directions: the fiber block if present, ambient otherwise."""
        if metric.has_fiber_metric:
            return metric.fiber_inner(a, b)
        return float(a.coords @ b.coords)

    def fiber_apply_inv(self, metric: MetricSpec, a: AlgebraElement) -> AlgebraElement:
        if metric.has_fiber_metric:
            return metric.fiber_apply_inv(a)
        return a

    def collapse_metric(self, t: float) -> MetricSpec:
        """The interpolation family shrinking all subgroup directions by 1 - t."""
        return interpolated_collapse_metric(self.h_space, t)


# -- catalog ------------------------------------------------------------------


def make_block_triple(n_k: int, n_h: int, n_g: int, name: str | None = None) -> BundleTriple:
    """Upper-left block chain so(n_k) <= so(n_h) < so(n_g).

    n_k of 0 or 1 gives trivial isotropy. Basis rows are exact coordinate
    indicators, so the subspaces carry no orthonormalization noise.
    """
    if not (0 <= n_k <= n_h <= n_g):
        raise ValidationError(f"block sizes must satisfy 0 <= n_k <= n_h <= n_g, got {(n_k, n_h, n_g)}")
    if n_h < 2:
        raise ValidationError("the subgroup block needs n_h >= 2")
    if n_h >= n_g:
        raise ValidationError("the subgroup block must be proper: n_h < n_g")
    algebra = so(n_g)
    rows_k = [idx for idx, (i, j) in enumerate(zip(algebra._rows, algebra._cols)) if j < n_k]
    rows_h = [idx for idx, (i, j) in enumerate(zip(algebra._rows, algebra._cols)) if j < n_h]
    eye = np.eye(algebra.dim)
    k_space = Subspace(algebra, eye[rows_k] if rows_k else np.zeros((0, algebra.dim)))
    h_space = Subspace(algebra, eye[rows_h])
    return BundleTriple(algebra, k_space, h_space, name=name, blocks=(n_k, n_h, n_g))


def catalog_triple(name: str) -> BundleTriple:
    """Named chains: t1s2, t1s3, t1sn:<n>, geroch:<h>:<g>."""
    parts = name.split(":")
    key = parts[0]
    if key == "t1s2":
        if len(parts) != 1:
            raise ValidationError("t1s2 takes no arguments")
        return make_block_triple(1, 2, 3, name=name)
    if key == "t1s3":
        if len(parts) != 1:
            raise ValidationError("t1s3 takes no arguments")
        return make_block_triple(2, 3, 4, name=name)
    if key == "t1sn":
        if len(parts) != 2:
            raise ValidationError("t1sn needs one argument, e.g. t1sn:4")
        n = _parse_size(parts[1], minimum=2)
        return make_block_triple(n - 1, n, n + 1, name=name)
    if key == "geroch":
        if len(parts) != 3:
            raise ValidationError("geroch needs two arguments, e.g. geroch:3:5")
        n_h = _parse_size(parts[1], minimum=2)
        n_g = _parse_size(parts[2], minimum=n_h + 1)
        return make_block_triple(1, n_h, n_g, name=name)
    raise ValidationError(
        f"unknown chain {name!r}; expected t1s2, t1s3, t1sn:<n>, or geroch:<h>:<g>"
    )


def _parse_size(text: str, minimum: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ValidationError(f"expected an integer block size, got {text!r}") from None
    if value < minimum:
        raise ValidationError(f"block size {value} below minimum {minimum}")
    return value


# -- tangent pairs and lifts ----------------------------------------------------


@dataclass(frozen=True)
class TangentPair:
    """Tangent vector of the product: left-trivialized group part, fiber part in m."""

    group_part: AlgebraElement
    fiber_part: AlgebraElement

    def __add__(self, other: "TangentPair") -> "TangentPair":
        return TangentPair(self.group_part + other.group_part, self.fiber_part + other.fiber_part)

    def __sub__(self, other: "TangentPair") -> "TangentPair":
        return TangentPair(self.group_part - other.group_part, self.fiber_part - other.fiber_part)

    def __mul__(self, s: float) -> "TangentPair":
        return TangentPair(s * self.group_part, s * self.fiber_part)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.hypot(self.group_part.norm(), self.fiber_part.norm()))


def _fiber_point_matrix(triple: BundleTriple, y: GroupElement | None) -> np.ndarray | None:
    if y is None:
        return None
    if y.algebra != triple.algebra:
        raise DimensionError("fiber point must live in the same matrix group")
    # necessary condition for membership in the subgroup: Ad_y preserves h
    hb = triple.h_space.basis
    for row in hb:
        a = triple.algebra.element(row)
        moved = triple.algebra._coords_of(y.matrix @ a.matrix @ y.matrix.T)
        resid = np.linalg.norm(moved - hb.T @ (hb @ moved))
        if resid > tol.SUBSPACE_TOL * 10:
            raise ValidationError("fiber point does not normalize the subgroup directions")
    return y.matrix


def horizontal_lift(
    triple: BundleTriple,
    metric: MetricSpec,
    g: GroupElement,
    u: AlgebraElement,
    y: GroupElement | None = None,
) -> TangentPair:
    """The unique lift of a quotient tangent direction orthogonal to the verticals.

    u is a left-trivialized direction with no isotropy component (u ⊥ k).
    The base point upstairs is (g, yK); y defaults to the identity coset.
    """
    if u.algebra != triple.algebra:
        raise DimensionError("direction and chain live on different algebras")
    kp = triple.k_space.project(u)
    if kp.norm() > tol.K_PROJECTION_TOL * max(1.0, u.norm()):
        raise ValidationError("direction has an isotropy component; lift is not defined")
    ym = _fiber_point_matrix(triple, y)
    if ym is None:
        conj = g.inverse().matrix
    else:
        conj = g.inverse().matrix @ ym
    moved = triple.algebra._coords_of(conj @ u.matrix @ conj.T)
    moved = AlgebraElement(triple.algebra, moved)
    group_part = metric.apply_phi_inv(moved)
    fiber_part = -1.0 * triple.fiber_apply_inv(metric, triple.m_space.project(u))
    return TangentPair(group_part, fiber_part)


def vertical_basis_pairs(
    triple: BundleTriple,
    g: GroupElement,
    y: GroupElement | None = None,
) -> list:
    """Tangent pairs spanning the glued-action orbit directions at (g, yK)."""
    vg, vf = _vertical_arrays(triple, g.inverse().matrix, _fiber_point_matrix(triple, y))
    alg = triple.algebra
    return [
        TangentPair(AlgebraElement(alg, vg[i]), triple.m_space.from_component_coords(vf[i]))
        for i in range(vg.shape[0])
    ]


def _vertical_arrays(triple: BundleTriple, g_inv: np.ndarray, ym: np.ndarray | None):
    """Coordinates of the vertical basis: rows over the h basis.

    Returns (vg, vf): vg[i] = coords of Ad_{g^-1} A_i, vf[i] = m-components of
    the fiber part of the orbit direction of A_i at yK.
    """
    alg = triple.algebra
    hb = triple.h_space.basis  # (hdim, dim)
    mats = np.einsum("ki,inm->knm", hb, alg.basis)  # mats[k] = matrix of A_k
    conj = np.einsum("ab,kbc,dc->kad", g_inv, mats, g_inv)
    vg = conj[:, alg._rows, alg._cols]
    if ym is None:
        vf = (hb @ triple.m_space.basis.T)
    else:
        y_inv = ym.T
        conj_f = np.einsum("ab,kbc,dc->kad", y_inv, mats, y_inv)
        vf = conj_f[:, alg._rows, alg._cols] @ triple.m_space.basis.T
    return vg, vf


def product_inner(
    triple: BundleTriple,
    metric: MetricSpec,
    a: TangentPair,
    b: TangentPair,
) -> float:
    """Metric of the product upstairs: group block plus fiber block."""
    return metric.h_inner(a.group_part, b.group_part) + triple.fiber_inner(
        metric, a.fiber_part, b.fiber_part
    )


@dataclass(frozen=True)
class VerticalProjection:
    pair: TangentPair
    norm2: float


def project_vertical(
    triple: BundleTriple,
    metric: MetricSpec,
    g: GroupElement,
    v: TangentPair,
    y: GroupElement | None = None,
) -> VerticalProjection:
    """Orthogonal projection onto the orbit directions, via the vertical Gram matrix."""
    vg, vf = _vertical_arrays(triple, g.inverse().matrix, _fiber_point_matrix(triple, y))
    return _project_vertical_arrays(triple, metric, vg, vf, v)


def _project_vertical_arrays(
    triple: BundleTriple,
    metric: MetricSpec,
    vg: np.ndarray,
    vf: np.ndarray,
    v: TangentPair,
) -> VerticalProjection:
    alg = triple.algebra
    mb = triple.m_space.basis
    if metric.has_fiber_metric:
        align = metric.fiber_space.basis @ mb.T
        fm = align.T @ metric.fiber_matrix @ align
    else:
        fm = np.eye(mb.shape[0])
    gram = vg @ metric.phi @ vg.T + vf @ fm @ vf.T
    rhs = vg @ (metric.phi @ v.group_part.coords) + vf @ (fm @ (mb @ v.fiber_part.coords))
    try:
        cho = cho_factor(gram)
    except LinAlgError as exc:
        raise IllConditionedError(f"vertical Gram matrix is numerically singular: {exc}") from exc
    coeffs = cho_solve(cho, rhs)
    proj_g = AlgebraElement(alg, vg.T @ coeffs)
    proj_f = triple.m_space.from_component_coords(vf.T @ coeffs)
    return VerticalProjection(TangentPair(proj_g, proj_f), float(coeffs @ rhs))


# -- fiber metric generators -----------------------------------------------------


def random_equivariant_fiber_matrix(
    triple: BundleTriple,
    rng: np.random.Generator,
    base: float = 1.0,
    spread: float = 0.3,
) -> np.ndarray:
    """Random SPD operator on m commuting with the isotropy action.

    Built as base * I plus a random symmetric element of the commutant of
    ad_k restricted to m, scaled so positivity is automatic.
    """
    md = triple.m_space.dim
    if md == 0:
        raise NotApplicableError("the chain has no fiber directions")
    if not (0.0 <= spread < base):
        raise ValidationError("need 0 <= spread < base for guaranteed positivity")
    mb = triple.m_space.basis
    restricted = [
        mb @ ad_matrix(triple.k_space.from_component_coords(np.eye(triple.k_space.dim)[i])) @ mb.T
        for i in range(triple.k_space.dim)
    ]
    # basis of symmetric matrices on m
    sym_basis = []
    for i in range(md):
        for j in range(i, md):
            s = np.zeros((md, md))
            s[i, j] += 1.0
            s[j, i] += 1.0
            sym_basis.append(s / np.linalg.norm(s))
    if restricted:
        cols = []
        for s in sym_basis:
            cols.append(np.concatenate([(r @ s - s @ r).ravel() for r in restricted]))
        m = np.array(cols).T
        _, sv, vt = np.linalg.svd(m)
        nsurvive = int(np.count_nonzero(sv >= tol.NULLSPACE_RTOL * max(sv[0], 1e-300)))
        null = vt[nsurvive:]
    else:
        null = np.eye(len(sym_basis))
    gamma = rng.standard_normal(null.shape[0])
    combo = null.T @ gamma
    s = sum(c * b for c, b in zip(combo, sym_basis))
    frob = np.linalg.norm(s)
    if frob < 1e-300:
        return base * np.eye(md)
    return base * np.eye(md) + spread * (s / frob)


# -- fatness ----------------------------------------------------------------------


@dataclass(frozen=True)
class FatnessResult:
    deficit: float
    x: AlgebraElement
    y: AlgebraElement


def fatness_deficit(
    triple: BundleTriple,
    seed: int = 0,
    restarts: int = 20,
    max_alternations: int = 200,
) -> FatnessResult:
    """Minimum bracket norm between unit fiber and unit base directions.

    Zero deficit exhibits a commuting pair (x in m, y in p); a deficit bounded
    away from zero certifies every such bracket is nondegenerate. Alternating
    smallest-eigenvector descent with random restarts; each half-step is the
    exact optimum for the frozen variable, so the objective never increases.
    """
    if triple.m_space.dim == 0:
        raise NotApplicableError("isotropy equals the subgroup; no fiber directions to test")
    rng = np.random.default_rng(seed)
    mb = triple.m_space.basis
    pb = triple.p_space.basis
    alg = triple.algebra
    best_val = np.inf
    best_pair = None
    for _ in range(restarts):
        x = triple.m_space.random_unit(rng)
        y = triple.p_space.random_unit(rng)
        prev = np.inf
        for _ in range(max_alternations):
            ax = ad_matrix(x) @ pb.T  # columns: coords of [x, p_j]
            w, vecs = np.linalg.eigh(ax.T @ ax)
            y = triple.p_space.from_component_coords(vecs[:, 0])
            ay = ad_matrix(y) @ mb.T
            w, vecs = np.linalg.eigh(ay.T @ ay)
            x = triple.m_space.from_component_coords(vecs[:, 0])
            val = bracket(x, y).norm()
            if prev - val < 1e-15:
                break
            prev = val
        val = bracket(x, y).norm()
        if val < best_val:
            best_val = val
            best_pair = (x, y)
    return FatnessResult(float(best_val), best_pair[0], best_pair[1])
