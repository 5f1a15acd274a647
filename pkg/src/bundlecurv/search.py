"""Orbit optimization, flat-plane certificates, scans and sweeps.

The obstruction machinery: find a commuting pair of fiber and base
directions, push the fiber direction to the maximizer of its orbit quadratic
form, and certify a plane there whose sectional numerator is bounded above by
a quantity of the perturbation's size, so positivity fails. Alongside it,
randomized curvature scans and the one-parameter family sweep used to study
how far the nonnegative regime extends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .bundle import (
    BundleTriple,
    fatness_deficit,
    horizontal_lift,
    product_inner,
)
from .curvature import CurvatureSample, sectional
from .errors import (
    ConvergenceError,
    GenericityError,
    NoWitnessError,
    ValidationError,
)
from .liealg import (
    AlgebraElement,
    GroupElement,
    Subspace,
    adjoint,
    bracket,
    generic_perturb,
    group_exp,
    is_generic,
    maximal_torus_through,
)
from .metric import MetricSpec


# -- orbit quadratic form --------------------------------------------------------


@dataclass(frozen=True)
class OrbitMaxResult:
    """Outcome of maximizing f(g) = <Ad_{g^-1} x0, Phi^{-1} Ad_{g^-1} x0>."""

    g0: GroupElement
    value: float
    grad_residual: float
    iterations: int
    start_index: int


def orbit_form_value(metric: MetricSpec, x: AlgebraElement) -> float:
    return float(x.coords @ metric.apply_phi_inv(x).coords)


def stationarity_residual(metric: MetricSpec, x_moved: AlgebraElement) -> float:
    """Norm of the ascent direction [Phi^{-1} X, X]; zero exactly at critical points."""
    return bracket(metric.apply_phi_inv(x_moved), x_moved).norm()


def pair_commutation_residual(
    metric: MetricSpec, x_moved: AlgebraElement, y_moved: AlgebraElement
) -> float:
    """|[Y, Phi^{-1} X]|: vanishes at a maximum when X is generic and [X, Y] = 0."""
    return bracket(y_moved, metric.apply_phi_inv(x_moved)).norm()


def second_order_residual(
    metric: MetricSpec,
    x_moved: AlgebraElement,
    rng: np.random.Generator,
    n_probes: int = 50,
) -> float:
    """Largest sampled second derivative of the orbit form; <= 0 at a maximum.

    Along a probe Z the second derivative is twice
    <[Z,X], Phi^{-1}[Z,X]> - <[Z,X], [Z, Phi^{-1}X]>.
    """
    alg = x_moved.algebra
    px = metric.apply_phi_inv(x_moved)
    worst = -np.inf
    for _ in range(n_probes):
        z = alg.random_unit(rng)
        zx = bracket(z, x_moved)
        val = float(zx.coords @ metric.apply_phi_inv(zx).coords) - float(
            zx.coords @ bracket(z, px).coords
        )
        worst = max(worst, val)
    return worst


def _skew_exp_taylor(a: np.ndarray, eye: np.ndarray) -> np.ndarray:
    """Sixth-order exponential, valid to roundoff for |a| below about 0.01."""
    a2 = a @ a
    a3 = a @ a2
    a4 = a2 @ a2
    return (
        eye
        + a
        + a2 / 2.0
        + a3 / 6.0
        + a4 / 24.0
        + (a2 @ a3) / 120.0
        + (a3 @ a3) / 720.0
    )


def _ascend_once(
    metric: MetricSpec,
    x0: AlgebraElement,
    g_start: np.ndarray,
    grad_tol: float,
    max_iters: int,
):
    """Armijo gradient ascent on the group; returns (g, x_coords, grad_norm, iters, ok).

    Runs on raw coordinate arrays. Each line search assembles one short Taylor
    seed and squares it up to the full trial step, so every backtracked step
    reuses a rung of the same exponential ladder.
    """
    alg = x0.algebra
    struct = alg.structure_tensor()
    minv = metric.phi_inverse_matrix()
    rows, cols = alg._rows, alg._cols
    eye = np.eye(alg.n)
    g = g_start.copy()
    conj = g.T
    xc = (conj @ x0.matrix @ conj.T)[rows, cols]
    fx = float(xc @ minv @ xc)
    dn_window = np.inf
    for it in range(max_iters):
        w = minv @ xc
        d = xc @ np.tensordot(w, struct, axes=(0, 0))
        dn = float(np.linalg.norm(d))
        if dn <= grad_tol:
            return g, xc, dn, it, True
        if it % 200 == 0:
            # saddle stall guard: a start whose gradient norm cannot shed
            # half a percent per 200 steps will not reach tolerance within
            # the iteration budget, so give up on it early
            if dn > 0.995 * dn_window:
                return g, xc, dn, it, False
            dn_window = dn
        dm = np.zeros_like(eye)
        dm[rows, cols] = d
        dm[cols, rows] = -d
        depth = int(np.clip(np.ceil(np.log2(max(0.1 * dn, 1e-12) / 0.01)), 4, 60))
        r = _skew_exp_taylor((0.1 * 0.5**depth) * dm, eye)
        ladder = [r]
        for _ in range(depth):
            r = r @ r
            ladder.append(r)
        ladder.reverse()  # ladder[j] = exp(0.1 * 2^-j * dm)
        xm = np.zeros_like(eye)
        xm[rows, cols] = xc
        xm[cols, rows] = -xc
        eta = 0.1
        accepted = False
        j = 0
        while eta > 1e-18:
            r = ladder[j] if j < len(ladder) else _skew_exp_taylor(eta * dm, eye)
            # g <- g r moves X by Ad_{r^{-1}}
            xt = (r.T @ xm @ r)[rows, cols]
            f_try = float(xt @ minv @ xt)
            if f_try >= fx + 1e-4 * eta * 2.0 * dn * dn:
                g = g @ r
                xc, fx = xt, f_try
                accepted = True
                break
            eta *= 0.5
            j += 1
        if not accepted:
            return g, xc, dn, it, False
    w = minv @ xc
    d = xc @ np.tensordot(w, struct, axes=(0, 0))
    dn = float(np.linalg.norm(d))
    return g, xc, dn, max_iters, dn <= grad_tol


def maximize_orbit_form(
    metric: MetricSpec,
    x0: AlgebraElement,
    seed: int = 0,
    n_starts: int = 8,
    grad_tol: float = tol.GRAD_TOL,
    max_iters: int = tol.MAX_ITERS,
) -> OrbitMaxResult:
    """Push x0 around its orbit to maximize the inverse-operator quadratic form.

    Multi-start gradient ascent with backtracking. The first start is the
    identity (so an already-critical configuration is returned untouched),
    the rest are random rotations. The best converged start wins; if no start
    reaches the gradient tolerance a ConvergenceError reports the best
    residual seen.
    """
    if x0.algebra != metric.algebra:
        raise ValidationError("direction and metric live on different algebras")
    if x0.norm() == 0.0:
        raise ValidationError("cannot maximize the orbit form of the zero element")
    alg = x0.algebra
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    best = None
    best_resid = np.inf
    for idx in range(n_starts):
        if idx == 0:
            g_start = np.eye(alg.n)
        else:
            theta = rng.uniform(0.0, np.pi)
            g_start = group_exp(theta * alg.random_unit(rng)).matrix
        g, xc, resid, iters, ok = _ascend_once(metric, x0, g_start, grad_tol, max_iters)
        if ok:
            value = orbit_form_value(metric, AlgebraElement(alg, xc))
            # strict-margin comparison: roundoff ties keep the earliest start,
            # so an already-critical identity start is returned untouched
            if best is None or value > best.value + 1e-12 * abs(best.value):
                q = _reorthonormalize(g)
                best = OrbitMaxResult(
                    g0=GroupElement(alg, q),
                    value=value,
                    grad_residual=resid,
                    iterations=iters,
                    start_index=idx,
                )
        best_resid = min(best_resid, resid)
    if best is None:
        raise ConvergenceError(
            f"orbit maximization failed from all {n_starts} starts", residual=best_resid
        )
    return best


def _reorthonormalize(g: np.ndarray) -> np.ndarray:
    n = g.shape[0]
    if np.abs(g.T @ g - np.eye(n)).max() < tol.ORTHO_TOL / 10:
        return g
    q, r = np.linalg.qr(g)
    return q @ np.diag(np.sign(np.diag(r)))


# -- commuting witnesses ------------------------------------------------------------


def find_commuting_pair(triple: BundleTriple, seed: int = 0):
    """A unit fiber direction and unit base direction with vanishing bracket.

    Runs the fatness search; a deficit below the zero threshold yields the
    witness, otherwise there is provably nothing to return at this tolerance
    and a NoWitnessError carries the measured deficit.
    """
    res = fatness_deficit(triple, seed=seed)
    if res.deficit >= tol.FATNESS_ZERO:
        raise NoWitnessError(
            f"no commuting fiber/base pair: minimum bracket norm {res.deficit:.3e}",
            deficit=res.deficit,
        )
    return res.x, res.y


def _torus_directions_clear_of_isotropy(triple: BundleTriple, torus: Subspace) -> Subspace:
    """Directions in the torus with no isotropy component.

    Also rejects chains whose torus meets the isotropy block head on, since
    perturbed planes must stay transverse to it.
    """
    if triple.k_space.dim == 0:
        return torus
    overlap = triple.k_space.basis @ torus.basis.T
    svals = np.linalg.svd(overlap, compute_uv=False) if overlap.size else np.array([])
    if svals.size and svals.max() > 1.0 - 1e-10:
        raise ValidationError(
            "the commuting pair's torus intersects the isotropy block; "
            "this chain is outside the supported configuration"
        )
    if svals.size == 0 or svals.max() < 1e-12:
        return torus
    _, _, vt = np.linalg.svd(overlap)
    rank = int(np.count_nonzero(svals >= 1e-12))
    return Subspace(triple.algebra, vt[rank:] @ torus.basis)


# -- zero-curvature certificates ------------------------------------------------------


@dataclass(frozen=True)
class ZeroPlaneCertificate:
    """A commuting plane at the orbit maximizer whose curvature cannot be positive.

    value is the sectional numerator of the plane (x, y) at base point g0; at
    a converged maximizer it is bounded above by a multiple of eps, so it is
    either near zero or negative, and positivity fails either way. scale is
    the squared product of the plane's leg norms, the natural unit for judging
    smallness of value.
    """

    eps: float
    x: AlgebraElement
    y: AlgebraElement
    g0: GroupElement
    value: float
    scale: float
    grad_residual: float
    commute_residual: float
    second_order_residual: float
    iterations: int
    start_index: int
    sample: CurvatureSample


def certify_zero_plane(
    triple: BundleTriple,
    metric: MetricSpec,
    eps: float,
    seed: int = 0,
    n_starts: int = 8,
) -> ZeroPlaneCertificate:
    """Build one zero-curvature certificate at perturbation size eps.

    Both legs of the commuting witness are perturbed inside their shared
    maximal torus (staying clear of the isotropy block) until generic, then
    the fiber leg is driven to the maximizer of the orbit form. At that point
    the first-order residual, the pair commutation residual, and the sampled
    second-order residual are recorded together with the plane's sectional
    numerator. The same seed reuses the same perturbation directions at every
    eps, so values along an eps schedule form a smooth family.
    """
    triple.check_metric(metric)
    x0, y0 = find_commuting_pair(triple, seed)
    torus = maximal_torus_through(x0, y0)
    within = _torus_directions_clear_of_isotropy(triple, torus)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if eps == 0.0:
        if not (is_generic(x0) and is_generic(y0)):
            raise GenericityError(
                "exact mode needs the witness itself to be generic; perturb with eps > 0"
            )
        x_eps, y_eps = x0, y0
    else:
        x_eps = generic_perturb(torus, x0, eps, rng, within=within)
        y_eps = generic_perturb(torus, y0, eps, rng, within=within)
    res = maximize_orbit_form(metric, x_eps, seed=seed, n_starts=n_starts)
    conj = res.g0.inverse()
    x_moved = adjoint(conj, x_eps)
    y_moved = adjoint(conj, y_eps)
    probe_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    sample = sectional(triple, metric, res.g0, x_eps, y_eps, validate=False)
    return ZeroPlaneCertificate(
        eps=eps,
        x=x_eps,
        y=y_eps,
        g0=res.g0,
        value=sample.value,
        scale=(x_eps.norm() * y_eps.norm()) ** 2,
        grad_residual=stationarity_residual(metric, x_moved),
        commute_residual=pair_commutation_residual(metric, x_moved, y_moved),
        second_order_residual=second_order_residual(metric, x_moved, probe_rng),
        iterations=res.iterations,
        start_index=res.start_index,
        sample=sample,
    )


def zero_curvature_schedule(
    triple: BundleTriple,
    metric: MetricSpec,
    eps_list,
    seed: int = 0,
    n_starts: int = 8,
) -> list:
    """Certificates along a decreasing eps schedule, sharing the witness and seed."""
    eps_values = [float(e) for e in eps_list]
    if not eps_values:
        raise ValidationError("eps schedule must not be empty")
    if any(e < 0 for e in eps_values):
        raise ValidationError("eps values must be nonnegative")
    return [
        certify_zero_plane(triple, metric, e, seed=seed, n_starts=n_starts)
        for e in eps_values
    ]


# -- randomized scans ------------------------------------------------------------------


@dataclass(frozen=True)
class ScanResult:
    floor: float
    values: np.ndarray
    worst_g0: GroupElement
    worst_x: AlgebraElement
    worst_y: AlgebraElement
    n_samples: int
    planes_per_point: int
    seed: int


def _mp_space(triple: BundleTriple) -> Subspace:
    basis = np.vstack([triple.m_space.basis, triple.p_space.basis])
    return Subspace(triple.algebra, basis)


def _orthonormal_plane(triple, metric, g0, mp, rng):
    """A pair of directions whose lifts at g0 are orthonormal in the quotient metric."""
    for _ in range(50):
        u1 = mp.random_unit(rng)
        u2 = mp.random_unit(rng)
        l1 = horizontal_lift(triple, metric, g0, u1)
        n1 = product_inner(triple, metric, l1, l1)
        u1 = (n1 ** -0.5) * u1
        l1 = (n1 ** -0.5) * l1
        l2 = horizontal_lift(triple, metric, g0, u2)
        c = product_inner(triple, metric, l2, l1)
        u2 = u2 - c * u1
        l2 = l2 - c * l1
        n2 = product_inner(triple, metric, l2, l2)
        if n2 > 1e-12:
            return u1, (n2 ** -0.5) * u2
    raise ValidationError("could not draw a nondegenerate plane; tangent space too small")


def _witness_plane_sample(triple: BundleTriple, metric: MetricSpec, seed: int):
    """The certificate plane of a non-fat triple, exact when the witness is generic."""
    try:
        cert = certify_zero_plane(triple, metric, 0.0, seed=seed)
    except GenericityError:
        cert = certify_zero_plane(triple, metric, 1e-6, seed=seed)
    return cert


def curvature_scan(
    triple: BundleTriple,
    metric: MetricSpec,
    n_samples: int,
    seed: int = 0,
    planes_per_point: int = 1,
    include_witness_plane: bool = False,
) -> ScanResult:
    """Sectional values over random base points and random orthonormal planes.

    Base points are exponentials of random directions at uniform angles;
    planes are drawn in the isotropy-free slice and orthonormalized in the
    lifted metric, so every recorded value is a bona fide sectional curvature.
    include_witness_plane appends the certificate plane of a non-fat triple to
    the sample set, guaranteeing the floor sees a non-positively-curved plane.
    """
    if n_samples < 1 or planes_per_point < 1:
        raise ValidationError("scan needs at least one sample and one plane per point")
    triple.check_metric(metric)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    mp = _mp_space(triple)
    values = np.empty(n_samples * planes_per_point)
    worst = (np.inf, None, None, None)
    idx = 0
    for _ in range(n_samples):
        theta = rng.uniform(0.0, np.pi)
        g0 = group_exp(theta * triple.algebra.random_unit(rng))
        for _ in range(planes_per_point):
            x, y = _orthonormal_plane(triple, metric, g0, mp, rng)
            val = sectional(triple, metric, g0, x, y, validate=False).value
            values[idx] = val
            idx += 1
            if val < worst[0]:
                worst = (val, g0, x, y)
    if include_witness_plane:
        cert = _witness_plane_sample(triple, metric, seed)
        values = np.append(values, cert.value)
        if cert.value < worst[0]:
            worst = (cert.value, cert.g0, cert.x, cert.y)
    return ScanResult(
        floor=float(values.min()),
        values=values,
        worst_g0=worst[1],
        worst_x=worst[2],
        worst_y=worst[3],
        n_samples=n_samples,
        planes_per_point=planes_per_point,
        seed=seed,
    )


def probe_planes(triple: BundleTriple, count: int, seed: int = 0) -> list:
    """A fixed list of ambient-orthonormal direction pairs in the isotropy-free slice."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    mp = _mp_space(triple)
    planes = []
    while len(planes) < count:
        u1 = mp.random_unit(rng)
        u2 = mp.random_unit(rng)
        u2 = u2 - float(u1.coords @ u2.coords) * u1
        n2 = u2.norm()
        if n2 < 1e-6:
            continue
        planes.append((u1, (1.0 / n2) * u2))
    return planes


def base_point_minima(
    triple: BundleTriple,
    metric: MetricSpec,
    base_points,
    planes,
) -> np.ndarray:
    """Per-base-point minimum of the sectional numerator over a fixed plane list."""
    triple.check_metric(metric)
    out = np.empty(len(base_points))
    for i, g0 in enumerate(base_points):
        out[i] = min(
            sectional(triple, metric, g0, x, y, validate=False).value for (x, y) in planes
        )
    return out


# -- interpolation sweep -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    t: float
    floor: float
    positive_fraction: float


def variation_sweep(
    triple: BundleTriple,
    t_grid,
    n_samples: int,
    seed: int = 0,
    planes_per_point: int = 16,
    include_witness_plane: bool = False,
) -> list:
    """Floor and positive fraction of the collapse family along a grid of t values.

    For each t the subgroup directions are shrunk by 1 - t; at every random
    base point the minimum over sampled planes is recorded, and the positive
    fraction counts base points whose minimum stays above a small cutoff.
    include_witness_plane folds the certificate plane of a non-fat triple into
    each row's floor, pinning the floor at or below roundoff at every t.
    """
    t_values = [float(t) for t in t_grid]
    if not t_values:
        raise ValidationError("t grid must not be empty")
    if n_samples < 1:
        raise ValidationError("sweep needs at least one sample per grid value")
    for t in t_values:
        if not (0.0 <= t < 1.0):
            raise ValidationError(f"t must lie in [0, 1), got {t}")
    rows = []
    children = np.random.SeedSequence(seed).spawn(len(t_values))
    mp = _mp_space(triple)
    for t, child in zip(t_values, children):
        metric = triple.collapse_metric(t)
        rng = np.random.default_rng(child)
        floor = np.inf
        positives = 0
        for _ in range(n_samples):
            theta = rng.uniform(0.0, np.pi)
            g0 = group_exp(theta * triple.algebra.random_unit(rng))
            point_min = np.inf
            for _ in range(planes_per_point):
                x, y = _orthonormal_plane(triple, metric, g0, mp, rng)
                point_min = min(
                    point_min, sectional(triple, metric, g0, x, y, validate=False).value
                )
            floor = min(floor, point_min)
            if point_min > 1e-8:
                positives += 1
        if include_witness_plane:
            cert = _witness_plane_sample(triple, metric, seed)
            floor = min(floor, cert.value)
        rows.append(SweepRow(t=t, floor=float(floor), positive_fraction=positives / n_samples))
    return rows
