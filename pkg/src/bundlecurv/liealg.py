"""Matrix Lie algebra layer: so(n) with an orthonormal elementary basis.

Conventions fixed here and relied on everywhere else:

* so(n) elements are real skew-symmetric n x n matrices.
* The basis is E_ij = e_i e_j^T - e_j e_i^T for i < j, ordered
  lexicographically, so dim = n(n-1)/2.
* The ambient inner product is <A, B> = -(1/2) trace(A B), which makes the
  E_ij exactly orthonormal; in basis coordinates it is the plain dot product.
* Brackets are matrix commutators [A, B] = AB - BA.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, GenericityError, ValidationError
from . import tolerances as tol


class LieAlgebra:
    """so(n) with the elementary skew basis.

    rank is the dimension of a maximal abelian subalgebra: floor(n/2).
    """

    def __init__(self, n: int, family: str = "so"):
        if family != "so":
            raise ValidationError(f"unsupported family {family!r}; only 'so' is implemented")
        if n < 2:
            raise ValidationError(f"so(n) needs n >= 2, got n = {n}")
        self.family = family
        self.n = n
        self.dim = n * (n - 1) // 2
        self.rank = n // 2
        rows, cols = np.triu_indices(n, k=1)
        self._rows = rows
        self._cols = cols
        self.basis_labels = [f"E{i + 1}{j + 1}" for i, j in zip(rows, cols)]
        basis = np.zeros((self.dim, n, n))
        basis[np.arange(self.dim), rows, cols] = 1.0
        basis[np.arange(self.dim), cols, rows] = -1.0
        self.basis = basis

    def __eq__(self, other):
        return isinstance(other, LieAlgebra) and (self.family, self.n) == (other.family, other.n)

    def __hash__(self):
        return hash((self.family, self.n))

    def __repr__(self):
        return f"LieAlgebra(so({self.n}))"

    # -- element construction -------------------------------------------------

    def element(self, coords) -> "AlgebraElement":
        c = np.asarray(coords, dtype=float)
        if c.shape != (self.dim,):
            raise DimensionError(f"expected {self.dim} coordinates, got shape {c.shape}")
        return AlgebraElement(self, c.copy())

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, np.zeros(self.dim))

    def basis_element(self, label: str) -> "AlgebraElement":
        """Look up a basis element by its 1-indexed label, e.g. "E12"."""
        try:
            idx = self.basis_labels.index(label)
        except ValueError:
            raise ValidationError(f"no basis element {label!r} in so({self.n})") from None
        c = np.zeros(self.dim)
        c[idx] = 1.0
        return AlgebraElement(self, c)

    def from_matrix(self, m) -> "AlgebraElement":
        """Coordinates of a skew matrix; rejects matrices that are not skew."""
        m = np.asarray(m, dtype=float)
        if m.shape != (self.n, self.n):
            raise DimensionError(f"expected a {self.n}x{self.n} matrix, got {m.shape}")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m + m.T).max() > tol.SKEW_TOL * scale * 10:
            raise ValidationError("matrix is not skew-symmetric within tolerance")
        sym = 0.5 * (m - m.T)
        return AlgebraElement(self, sym[self._rows, self._cols].copy())

    # trusted fast paths: no validation, used by bracket/adjoint internals
    def _coords_of(self, m: np.ndarray) -> np.ndarray:
        return m[self._rows, self._cols]

    def _matrix_of(self, coords: np.ndarray) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        m[self._rows, self._cols] = coords
        m[self._cols, self._rows] = -coords
        return m

    def structure_tensor(self) -> np.ndarray:
        """C[i, j, k] = component of [e_i, e_j] along e_k, cached for hot loops."""
        cached = getattr(self, "_structure", None)
        if cached is None:
            prod = np.einsum("iab,jbc->ijac", self.basis, self.basis)
            comm = prod - np.transpose(prod, (1, 0, 2, 3))
            cached = comm[:, :, self._rows, self._cols].copy()
            self._structure = cached
        return cached

    def identity_group(self) -> "GroupElement":
        return GroupElement(self, np.eye(self.n))

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> "AlgebraElement":
        return AlgebraElement(self, scale * rng.standard_normal(self.dim))

    def random_unit(self, rng: np.random.Generator) -> "AlgebraElement":
        c = rng.standard_normal(self.dim)
        return AlgebraElement(self, c / np.linalg.norm(c))


@lru_cache(maxsize=None)
def so(n: int) -> LieAlgebra:
    return LieAlgebra(n)


@dataclass(frozen=True, slots=True)
class AlgebraElement:
    """A Lie algebra element stored as coordinates in the E_ij basis."""

    algebra: LieAlgebra
    coords: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return self.algebra._matrix_of(self.coords)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def unit(self) -> "AlgebraElement":
        n = self.norm()
        if n == 0.0:
            raise ValidationError("cannot normalize the zero element")
        return AlgebraElement(self.algebra, self.coords / n)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _same_algebra(self, other)
        return AlgebraElement(self.algebra, self.coords + other.coords)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        _same_algebra(self, other)
        return AlgebraElement(self.algebra, self.coords - other.coords)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, -self.coords)

    def __mul__(self, s: float) -> "AlgebraElement":
        return AlgebraElement(self.algebra, float(s) * self.coords)

    __rmul__ = __mul__

    def __repr__(self):
        terms = [
            f"{c:+.3g}*{lab}"
            for c, lab in zip(self.coords, self.algebra.basis_labels)
            if abs(c) > 1e-12
        ]
        body = " ".join(terms) if terms else "0"
        return f"<so({self.algebra.n}) {body}>"


@dataclass(frozen=True, slots=True)
class GroupElement:
    """An element of SO(n), validated orthogonal with determinant +1."""

    algebra: LieAlgebra
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        n = self.algebra.n
        if m.shape != (n, n):
            raise DimensionError(f"expected a {n}x{n} matrix, got {m.shape}")
        if np.abs(m.T @ m - np.eye(n)).max() > tol.ORTHO_TOL:
            raise ValidationError("matrix is not orthogonal within tolerance")
        if np.linalg.det(m) < 0:
            raise ValidationError("matrix has determinant -1; not in SO(n)")
        object.__setattr__(self, "matrix", m)

    def inverse(self) -> "GroupElement":
        # orthogonal, so the inverse is the transpose
        return GroupElement(self.algebra, self.matrix.T.copy())

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if self.algebra != other.algebra:
            raise DimensionError("group elements from different groups")
        return GroupElement(self.algebra, self.matrix @ other.matrix)


def _same_algebra(a: AlgebraElement, b: AlgebraElement) -> None:
    if a.algebra != b.algebra:
        raise DimensionError("elements belong to different algebras")


# -- basic operations ---------------------------------------------------------


def inner(a: AlgebraElement, b: AlgebraElement) -> float:
    """<A, B> = -(1/2) trace(AB); the dot product in E_ij coordinates."""
    _same_algebra(a, b)
    return float(a.coords @ b.coords)


def bracket(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Matrix commutator [A, B] = AB - BA."""
    _same_algebra(a, b)
    am, bm = a.matrix, b.matrix
    return AlgebraElement(a.algebra, a.algebra._coords_of(am @ bm - bm @ am))


def adjoint(g: GroupElement, a: AlgebraElement) -> AlgebraElement:
    """Ad_g(A) = g A g^T, an isometry of the ambient inner product."""
    if g.algebra != a.algebra:
        raise DimensionError("group and algebra elements do not match")
    m = g.matrix @ a.matrix @ g.matrix.T
    m = 0.5 * (m - m.T)  # scrub roundoff asymmetry
    return AlgebraElement(a.algebra, a.algebra._coords_of(m))


def group_exp(a: AlgebraElement) -> GroupElement:
    """Matrix exponential, skew in so orthogonal out."""
    return GroupElement(a.algebra, expm(a.matrix))


# -- subspaces ----------------------------------------------------------------


@dataclass(frozen=True)
class Subspace:
    """A linear subspace given by orthonormal basis rows in coordinates.

    The zero subspace is allowed (shape (0, dim)); projections through it
    return zero, which keeps trivial-K bundles on the generic code path.
    """

    algebra: LieAlgebra
    basis: np.ndarray  # (k, dim), orthonormal rows

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[1] != self.algebra.dim:
            raise DimensionError(f"subspace basis must be (k, {self.algebra.dim}), got {b.shape}")
        if b.shape[0] > 0:
            gram = b @ b.T
            if np.abs(gram - np.eye(b.shape[0])).max() > tol.GRAM_TOL:
                raise ValidationError("subspace basis rows are not orthonormal")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def from_spanning(cls, algebra: LieAlgebra, vectors) -> "Subspace":
        """Orthonormalize a spanning list (rows of coordinates); rank-revealing."""
        v = np.asarray(vectors, dtype=float).reshape(-1, algebra.dim)
        if v.shape[0] == 0:
            return cls(algebra, np.zeros((0, algebra.dim)))
        u, s, vt = np.linalg.svd(v, full_matrices=False)
        keep = s > max(v.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
        return cls(algebra, vt[keep])

    @classmethod
    def span_of(cls, elements) -> "Subspace":
        elements = list(elements)
        if not elements:
            raise ValidationError("span_of needs at least one element")
        algebra = elements[0].algebra
        return cls.from_spanning(algebra, [e.coords for e in elements])

    @classmethod
    def zero(cls, algebra: LieAlgebra) -> "Subspace":
        return cls(algebra, np.zeros((0, algebra.dim)))

    @classmethod
    def full(cls, algebra: LieAlgebra) -> "Subspace":
        return cls(algebra, np.eye(algebra.dim))

    def project_coords(self, coords: np.ndarray) -> np.ndarray:
        if self.dim == 0:
            return np.zeros_like(coords)
        return self.basis.T @ (self.basis @ coords)

    def project(self, a: AlgebraElement) -> AlgebraElement:
        if a.algebra != self.algebra:
            raise DimensionError("element and subspace from different algebras")
        return AlgebraElement(self.algebra, self.project_coords(a.coords))

    def component_coords(self, a: AlgebraElement) -> np.ndarray:
        """Coordinates of the projection of `a` in this subspace's own basis."""
        return self.basis @ a.coords

    def from_component_coords(self, comp: np.ndarray) -> AlgebraElement:
        return AlgebraElement(self.algebra, self.basis.T @ np.asarray(comp, dtype=float))

    def membership_residual(self, a: AlgebraElement) -> float:
        return float(np.linalg.norm(a.coords - self.project_coords(a.coords)))

    def contains(self, a: AlgebraElement, tolerance: float = tol.SUBSPACE_TOL) -> bool:
        return self.membership_residual(a) <= tolerance * max(1.0, a.norm())

    def contains_subspace(self, other: "Subspace", tolerance: float = tol.SUBSPACE_TOL) -> bool:
        if other.dim == 0:
            return True
        resid = other.basis - other.basis @ self.basis.T @ self.basis
        return float(np.abs(resid).max()) <= tolerance

    def complement_within(self, ambient: "Subspace") -> "Subspace":
        """Orthogonal complement of self inside `ambient` (self must sit inside it)."""
        if not ambient.contains_subspace(self):
            raise ValidationError("complement_within: subspace does not sit inside the ambient one")
        if ambient.dim == self.dim:
            return Subspace.zero(self.algebra)
        resid = ambient.basis - ambient.basis @ self.basis.T @ self.basis
        u, s, vt = np.linalg.svd(resid, full_matrices=False)
        keep = s > 1e-8
        out = Subspace(self.algebra, vt[keep])
        if out.dim != ambient.dim - self.dim:
            raise ValidationError("complement dimension mismatch; ill-conditioned bases")
        return out

    def random_unit(self, rng: np.random.Generator) -> AlgebraElement:
        if self.dim == 0:
            raise ValidationError("cannot draw from the zero subspace")
        c = rng.standard_normal(self.dim)
        c /= np.linalg.norm(c)
        return self.from_component_coords(c)


# -- centralizers and tori ----------------------------------------------------


def ad_matrix(a: AlgebraElement) -> np.ndarray:
    """The operator ad_A = [A, .] as a dim x dim matrix on coordinates."""
    alg = a.algebra
    am = a.matrix
    # [A, b_j] for every basis element, batched
    lhs = np.einsum("ab,jbc->jac", am, alg.basis)
    rhs = np.einsum("jab,bc->jac", alg.basis, am)
    per_basis = (lhs - rhs)[:, alg._rows, alg._cols]  # row j = coords of [A, b_j]
    return per_basis.T


def centralizer(a: AlgebraElement) -> Subspace:
    """Null space of ad_A: all elements commuting with A."""
    m = ad_matrix(a)
    _, s, vt = np.linalg.svd(m)
    if s[0] == 0.0:
        return Subspace.full(a.algebra)
    # singular values are sorted descending, so the null space is the trailing
    # rows of vt past the numerically surviving ones
    nsurvive = int(np.count_nonzero(s >= tol.NULLSPACE_RTOL * s[0]))
    return Subspace(a.algebra, vt[nsurvive:])


def is_generic(a: AlgebraElement) -> bool:
    """Generic means the centralizer is as small as possible: dim == rank."""
    return centralizer(a).dim == a.algebra.rank


def maximal_torus_through(x: AlgebraElement, y: AlgebraElement) -> Subspace:
    """Greedy maximal abelian subspace containing a commuting pair.

    Repeatedly intersects centralizers of the current basis and adjoins an
    orthogonal commuting direction until the intersection collapses onto the
    span itself. For compact so(n) the result has dimension rank(g).
    """
    _same_algebra(x, y)
    algebra = x.algebra
    br = bracket(x, y).norm()
    if br > tol.COMMUTE_TOL * max(1.0, x.norm() * y.norm()):
        raise ValidationError(f"inputs do not commute: |[x, y]| = {br:.3e}")
    span = Subspace.from_spanning(algebra, [x.coords, y.coords])
    if span.dim == 0:
        raise ValidationError("need at least one nonzero element to seed a torus")
    for _ in range(algebra.rank + 1):
        members = [span.from_component_coords(row) for row in np.eye(span.dim)]
        cent = joint_centralizer(members)
        if cent.dim <= span.dim:
            break
        # pick a deterministic new direction: top right-singular vector of the
        # centralizer basis with the current span projected out
        resid = cent.basis - cent.basis @ span.basis.T @ span.basis
        _, s, vt = np.linalg.svd(resid, full_matrices=False)
        if s.size == 0 or s[0] < 1e-10:
            break
        # the new direction commutes with the whole span by construction
        span = Subspace.from_spanning(algebra, np.vstack([span.basis, vt[0][None, :]]))
    if span.dim != algebra.rank:
        raise ValidationError(
            f"greedy torus construction stalled at dimension {span.dim}, expected rank {algebra.rank}"
        )
    return span


def joint_centralizer(elements) -> Subspace:
    """Everything commuting with every one of the given elements."""
    elements = list(elements)
    if not elements:
        raise ValidationError("joint_centralizer needs at least one element")
    algebra = elements[0].algebra
    stacked = np.vstack([ad_matrix(e) for e in elements])
    _, s, vt = np.linalg.svd(stacked)
    if s[0] == 0.0:
        return Subspace.full(algebra)
    nsurvive = int(np.count_nonzero(s >= tol.NULLSPACE_RTOL * s[0]))
    return Subspace(algebra, vt[nsurvive:])


def generic_perturb(
    torus: Subspace,
    v: AlgebraElement,
    eps: float,
    rng: np.random.Generator,
    within: Subspace | None = None,
) -> AlgebraElement:
    """A generic element of the torus within eps of v.

    Perturbation directions are drawn from `within` (default: the whole torus).
    eps = 0 returns v itself when v is already generic. Resamples up to the
    budget, then gives up with a GenericityError.
    """
    if not torus.contains(v):
        raise ValidationError("generic_perturb: v does not lie in the torus")
    if eps < 0:
        raise ValidationError("eps must be nonnegative")
    directions = torus if within is None else within
    if eps == 0.0:
        if is_generic(v):
            return v
        raise GenericityError("eps = 0 but the element is not generic")
    if directions.dim == 0:
        raise GenericityError("no perturbation directions available")
    for _ in range(tol.GENERIC_RESAMPLES):
        w = directions.random_unit(rng)
        candidate = v + eps * w
        if is_generic(candidate):
            return candidate
    raise GenericityError(
        f"no generic element found within eps = {eps} after {tol.GENERIC_RESAMPLES} resamples"
    )
