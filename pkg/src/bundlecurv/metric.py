"""Left-invariant metrics on the group and metrics on the fiber direction.

A metric is determined by a symmetric positive definite operator Phi on the
Lie algebra: h(A, B) = <Phi A, B> in the ambient inner product. In E_ij
coordinates Phi is a plain SPD matrix. An optional fiber block carries a
second SPD operator acting on a chosen subspace in that subspace's own
orthonormal basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import tolerances as tol
from .errors import (
    DegenerateMetricError,
    DimensionError,
    IllConditionedError,
    ValidationError,
)
from .liealg import AlgebraElement, LieAlgebra, Subspace


def _check_spd(name: str, m: np.ndarray) -> tuple:
    """Validate symmetry, positivity and conditioning; return (cho, eig_min, eig_max)."""
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.T).max() > 1e-12 * scale:
        raise ValidationError(f"{name} must be symmetric")
    eigs = np.linalg.eigvalsh(m)
    if eigs[0] <= 0.0:
        raise DegenerateMetricError(f"{name} is not positive definite (min eigenvalue {eigs[0]:.3e})")
    cond = eigs[-1] / eigs[0]
    if cond > tol.COND_CAP:
        raise IllConditionedError(f"{name} condition number {cond:.3e} exceeds cap {tol.COND_CAP:.1e}")
    return cho_factor(m), float(eigs[0]), float(eigs[-1])


@dataclass(frozen=True)
class MetricSpec:
    """Group metric operator, optionally with a fiber metric block.

    phi acts on the whole algebra in E_ij coordinates. fiber_space / fiber_matrix,
    when present, define the metric the fiber direction carries: fiber_matrix is
    SPD in fiber_space's own orthonormal basis. Whether fiber_matrix commutes
    with the isotropy action is checked where the subalgebra chain is known,
    not here.
    """

    algebra: LieAlgebra
    phi: np.ndarray
    fiber_space: Subspace | None = None
    fiber_matrix: np.ndarray | None = None

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        d = self.algebra.dim
        if phi.shape != (d, d):
            raise DimensionError(f"phi must be {d}x{d}, got {phi.shape}")
        object.__setattr__(self, "phi", phi)
        cho, lo, hi = _check_spd("phi", phi)
        object.__setattr__(self, "_phi_cho", cho)
        object.__setattr__(self, "eig_range", (lo, hi))
        if (self.fiber_space is None) != (self.fiber_matrix is None):
            raise ValidationError("fiber_space and fiber_matrix must be given together")
        if self.fiber_matrix is not None:
            fm = np.asarray(self.fiber_matrix, dtype=float)
            k = self.fiber_space.dim
            if fm.shape != (k, k):
                raise DimensionError(f"fiber_matrix must be {k}x{k}, got {fm.shape}")
            object.__setattr__(self, "fiber_matrix", fm)
            fcho, _, _ = _check_spd("fiber_matrix", fm)
            object.__setattr__(self, "_fiber_cho", fcho)

    # -- group metric --------------------------------------------------------

    def apply_phi(self, a: AlgebraElement) -> AlgebraElement:
        return AlgebraElement(self.algebra, self.phi @ a.coords)

    def apply_phi_inv(self, a: AlgebraElement) -> AlgebraElement:
        return AlgebraElement(self.algebra, cho_solve(self._phi_cho, a.coords))

    def phi_inverse_matrix(self) -> np.ndarray:
        """Dense inverse of phi on coordinates, cached for hot loops."""
        cached = getattr(self, "_phi_inv_dense", None)
        if cached is None:
            cached = cho_solve(self._phi_cho, np.eye(self.algebra.dim))
            cached = 0.5 * (cached + cached.T)
            object.__setattr__(self, "_phi_inv_dense", cached)
        return cached

    def h_inner(self, a: AlgebraElement, b: AlgebraElement) -> float:
        return float((self.phi @ a.coords) @ b.coords)

    def h_norm2(self, a: AlgebraElement) -> float:
        return self.h_inner(a, a)

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.phi, np.eye(self.algebra.dim)))

    # -- fiber metric ----------------------------------------------------------

    @property
    def has_fiber_metric(self) -> bool:
        return self.fiber_matrix is not None

    def _fiber_component(self, b: AlgebraElement) -> np.ndarray:
        if self.fiber_space is None:
            raise ValidationError("metric has no fiber block")
        if self.fiber_space.membership_residual(b) > tol.SUBSPACE_TOL * max(1.0, b.norm()):
            raise ValidationError("element does not lie in the fiber subspace")
        return self.fiber_space.component_coords(b)

    def fiber_apply(self, b: AlgebraElement) -> AlgebraElement:
        comp = self._fiber_component(b)
        return self.fiber_space.from_component_coords(self.fiber_matrix @ comp)

    def fiber_apply_inv(self, b: AlgebraElement) -> AlgebraElement:
        comp = self._fiber_component(b)
        return self.fiber_space.from_component_coords(cho_solve(self._fiber_cho, comp))

    def fiber_inner(self, a: AlgebraElement, b: AlgebraElement) -> float:
        ca = self._fiber_component(a)
        cb = self._fiber_component(b)
        return float((self.fiber_matrix @ ca) @ cb)

    def with_fiber(self, fiber_space: Subspace, fiber_matrix: np.ndarray) -> "MetricSpec":
        return MetricSpec(self.algebra, self.phi, fiber_space, fiber_matrix)


# -- constructors ---------------------------------------------------------------


def identity_metric(algebra: LieAlgebra) -> MetricSpec:
    return MetricSpec(algebra, np.eye(algebra.dim))


def diagonal_metric(algebra: LieAlgebra, diagonal) -> MetricSpec:
    d = np.asarray(diagonal, dtype=float)
    if d.shape != (algebra.dim,):
        raise DimensionError(f"need {algebra.dim} diagonal entries, got shape {d.shape}")
    return MetricSpec(algebra, np.diag(d))


def random_spd_metric(
    algebra: LieAlgebra,
    rng: np.random.Generator,
    eig_range: tuple = (0.5, 2.0),
) -> MetricSpec:
    """Random SPD operator with eigenvalues log-uniform in eig_range."""
    lo, hi = eig_range
    if not (0.0 < lo <= hi):
        raise ValidationError(f"invalid eigenvalue range {eig_range}")
    d = algebra.dim
    eigs = np.exp(rng.uniform(np.log(lo), np.log(hi), size=d))
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q @ np.diag(np.sign(np.diag(r)))
    phi = q @ np.diag(eigs) @ q.T
    return MetricSpec(algebra, 0.5 * (phi + phi.T))


def interpolated_collapse_metric(h_space: Subspace, t: float) -> MetricSpec:
    """Phi_t = (1 - t) on the subalgebra block, 1 on its complement.

    Scales every direction tangent to the subgroup (including the isotropy
    block) by 1 - t while leaving the transverse block alone; t in [0, 1).
    """
    if not (0.0 <= t < 1.0):
        raise ValidationError(f"t must lie in [0, 1), got {t}")
    algebra = h_space.algebra
    proj = h_space.basis.T @ h_space.basis
    phi = np.eye(algebra.dim) - t * proj
    return MetricSpec(algebra, 0.5 * (phi + phi.T))
