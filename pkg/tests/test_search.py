import numpy as np
import pytest

from bundlecurv import (
    ConvergenceError,
    GenericityError,
    NoWitnessError,
    ValidationError,
    bracket,
    group_exp,
    so,
)
from bundlecurv.bundle import catalog_triple
from bundlecurv.liealg import Subspace, adjoint, is_generic
from bundlecurv.metric import identity_metric, random_spd_metric
from bundlecurv.search import (
    ScanResult,
    _torus_directions_clear_of_isotropy,
    base_point_minima,
    certify_zero_plane,
    curvature_scan,
    find_commuting_pair,
    maximize_orbit_form,
    orbit_form_value,
    pair_commutation_residual,
    probe_planes,
    second_order_residual,
    stationarity_residual,
    variation_sweep,
    zero_curvature_schedule,
)


@pytest.fixture(scope="module")
def t1s3():
    return catalog_triple("t1s3")


# -- orbit maximization -------------------------------------------------------


def test_orbit_maximum_on_so3_is_rayleigh_quotient(rng):
    # the adjoint orbit of a unit element of so(3) is the whole unit sphere,
    # so the supremum of <Ad x, Phi^-1 Ad x> is the top eigenvalue of Phi^-1
    g = so(3)
    for _ in range(8):
        metric = random_spd_metric(g, rng)
        x = g.random_unit(rng)
        res = maximize_orbit_form(metric, x, seed=4)
        expected = np.linalg.eigvalsh(metric.phi_inverse_matrix()).max()
        assert abs(res.value - expected) < 1e-9
        assert res.grad_residual <= 1e-9


def test_identity_metric_start_is_already_critical(t1s3):
    metric = identity_metric(t1s3.algebra)
    x, _ = find_commuting_pair(t1s3)
    res = maximize_orbit_form(metric, x, seed=0)
    assert res.start_index == 0
    assert res.iterations == 0
    assert np.array_equal(res.g0.matrix, np.eye(4))
    assert res.value == pytest.approx(1.0)


def test_maximizer_satisfies_first_and_second_order_conditions(t1s3, rng):
    for seed in range(4):
        metric = random_spd_metric(t1s3.algebra, rng)
        x, y = find_commuting_pair(t1s3, seed=seed)
        res = maximize_orbit_form(metric, x, seed=seed)
        conj = res.g0.inverse()
        x_moved = adjoint(conj, x)
        y_moved = adjoint(conj, y)
        assert stationarity_residual(metric, x_moved) <= 1e-8
        assert pair_commutation_residual(metric, x_moved, y_moved) <= 1e-8
        assert second_order_residual(metric, x_moved, rng) <= 1e-8


def test_maximize_rejects_zero_and_mismatched_input(t1s3, rng):
    metric = identity_metric(t1s3.algebra)
    zero = 0.0 * t1s3.algebra.random_unit(rng)
    with pytest.raises(ValidationError):
        maximize_orbit_form(metric, zero)
    with pytest.raises(ValidationError):
        maximize_orbit_form(identity_metric(so(5)), t1s3.algebra.random_unit(rng))


def test_orbit_form_value_is_rayleigh_quotient_of_coordinates(t1s3, rng):
    metric = random_spd_metric(t1s3.algebra, rng)
    x = t1s3.algebra.random_element(rng)
    expected = float(x.coords @ metric.phi_inverse_matrix() @ x.coords)
    assert orbit_form_value(metric, x) == pytest.approx(expected, rel=1e-12)


# -- commuting witnesses ------------------------------------------------------


def test_commuting_pair_lives_in_fiber_and_base_blocks(t1s3):
    x, y = find_commuting_pair(t1s3)
    assert abs(x.norm() - 1.0) < 1e-12
    assert abs(y.norm() - 1.0) < 1e-12
    assert t1s3.m_space.membership_residual(x) < 1e-8
    assert t1s3.p_space.membership_residual(y) < 1e-8
    assert bracket(x, y).norm() < 1e-10


def test_fat_triple_has_no_commuting_pair():
    t = catalog_triple("t1s2")
    with pytest.raises(NoWitnessError) as exc:
        find_commuting_pair(t)
    assert exc.value.deficit == pytest.approx(1.0, abs=1e-6)


def test_torus_meeting_isotropy_is_rejected(t1s3):
    basis = np.zeros((2, t1s3.algebra.dim))
    basis[0, t1s3.algebra.basis_labels.index("E12")] = 1.0
    basis[1, t1s3.algebra.basis_labels.index("E34")] = 1.0
    torus = Subspace(t1s3.algebra, basis)
    with pytest.raises(ValidationError):
        _torus_directions_clear_of_isotropy(t1s3, torus)


# -- zero-curvature certificates ---------------------------------------------


def test_exact_certificate_at_identity_metric_is_flat(t1s3):
    metric = identity_metric(t1s3.algebra)
    cert = certify_zero_plane(t1s3, metric, 0.0, seed=0)
    assert cert.eps == 0.0
    assert abs(cert.value) < 1e-30
    assert cert.grad_residual == 0.0
    assert cert.iterations == 0


def test_certificate_plane_commutes_and_stays_generic(t1s3, rng):
    metric = random_spd_metric(t1s3.algebra, rng)
    cert = certify_zero_plane(t1s3, metric, 0.05, seed=2)
    assert bracket(cert.x, cert.y).norm() < 1e-10
    assert is_generic(cert.x)
    assert is_generic(cert.y)
    assert cert.scale == pytest.approx((cert.x.norm() * cert.y.norm()) ** 2)
    assert cert.grad_residual <= 1e-8
    assert cert.commute_residual <= 1e-8
    assert cert.second_order_residual <= 1e-8
    assert cert.sample.value == cert.value


def test_certificate_value_is_bounded_by_perturbation_size(t1s3, rng):
    # the bound is one-sided: the plane's numerator never exceeds a modest
    # multiple of eps, though it may sit well below zero
    metric = random_spd_metric(t1s3.algebra, rng)
    for eps in (0.1, 0.025):
        cert = certify_zero_plane(t1s3, metric, eps, seed=5)
        assert cert.value <= 10.0 * eps * cert.scale


def test_schedule_reuses_witness_and_perturbation_direction(t1s3):
    metric = identity_metric(t1s3.algebra)
    certs = zero_curvature_schedule(t1s3, metric, [0.1, 0.05], seed=3)
    assert [c.eps for c in certs] == [0.1, 0.05]
    x0, _ = find_commuting_pair(t1s3, seed=3)
    d1 = certs[0].x - x0
    d2 = certs[1].x - x0
    # same seed draws the same torus direction, so the two offsets are parallel
    cos = float(d1.coords @ d2.coords) / (d1.norm() * d2.norm())
    assert cos > 1.0 - 1e-6


def test_identity_metric_schedule_is_flat_at_every_eps(t1s3):
    metric = identity_metric(t1s3.algebra)
    certs = zero_curvature_schedule(t1s3, metric, [0.1, 0.05, 0.025, 0.0125], seed=0)
    for cert in certs:
        assert abs(cert.value) < 1e-12 * cert.scale


def test_schedule_rejects_empty_and_negative_eps(t1s3):
    metric = identity_metric(t1s3.algebra)
    with pytest.raises(ValidationError):
        zero_curvature_schedule(t1s3, metric, [])
    with pytest.raises(ValidationError):
        zero_curvature_schedule(t1s3, metric, [0.1, -0.01])


def test_certificates_are_deterministic_under_fixed_seed(t1s3, rng):
    metric = random_spd_metric(t1s3.algebra, rng)
    a = certify_zero_plane(t1s3, metric, 0.05, seed=11)
    b = certify_zero_plane(t1s3, metric, 0.05, seed=11)
    assert a.value == b.value
    assert np.array_equal(a.x.coords, b.x.coords)
    assert np.array_equal(a.g0.matrix, b.g0.matrix)


# -- randomized scans ---------------------------------------------------------


def test_scan_is_deterministic_and_nonnegative_at_identity(t1s3):
    metric = identity_metric(t1s3.algebra)
    a = curvature_scan(t1s3, metric, n_samples=40, seed=7)
    b = curvature_scan(t1s3, metric, n_samples=40, seed=7)
    assert isinstance(a, ScanResult)
    assert np.array_equal(a.values, b.values)
    assert a.floor >= -1e-10
    assert a.floor == a.values.min()
    assert len(a.values) == 40


def test_scan_rejects_empty_sampling(t1s3):
    metric = identity_metric(t1s3.algebra)
    with pytest.raises(ValidationError):
        curvature_scan(t1s3, metric, n_samples=0)
    with pytest.raises(ValidationError):
        curvature_scan(t1s3, metric, n_samples=5, planes_per_point=0)


def test_scan_with_witness_plane_sees_nonpositive_floor(t1s3, rng):
    # any metric on a non-fat chain: the injected certificate plane caps the
    # floor at roundoff scale no matter how lucky the random draws are
    metric = random_spd_metric(t1s3.algebra, rng)
    res = curvature_scan(t1s3, metric, n_samples=10, seed=1, include_witness_plane=True)
    assert len(res.values) == 11
    assert res.floor <= 1e-10


def test_probe_planes_are_orthonormal_pairs(t1s3):
    planes = probe_planes(t1s3, count=12, seed=4)
    assert len(planes) == 12
    for x, y in planes:
        assert abs(x.norm() - 1.0) < 1e-12
        assert abs(y.norm() - 1.0) < 1e-12
        assert abs(float(x.coords @ y.coords)) < 1e-12


def test_base_point_minima_constant_at_identity_metric(t1s3, rng):
    metric = identity_metric(t1s3.algebra)
    planes = probe_planes(t1s3, count=25, seed=0)
    points = [group_exp(rng.uniform(0, np.pi) * t1s3.algebra.random_unit(rng)) for _ in range(4)]
    mins = base_point_minima(t1s3, metric, points, planes)
    assert mins.shape == (4,)
    assert mins.max() - mins.min() < 1e-8


# -- interpolation sweep ------------------------------------------------------


def test_sweep_returns_one_row_per_t(t1s3):
    rows = variation_sweep(t1s3, [0.0, 0.5], n_samples=6, seed=2, planes_per_point=4)
    assert [r.t for r in rows] == [0.0, 0.5]
    for r in rows:
        assert r.floor >= -1e-10
        assert 0.0 <= r.positive_fraction <= 1.0


def test_sweep_with_witness_plane_pins_floor_at_every_t(t1s3):
    rows = variation_sweep(
        t1s3, [0.25, 0.75], n_samples=4, seed=2, planes_per_point=2, include_witness_plane=True
    )
    for r in rows:
        assert r.floor <= 1e-10


def test_sweep_rejects_bad_grids(t1s3):
    with pytest.raises(ValidationError):
        variation_sweep(t1s3, [], n_samples=4)
    with pytest.raises(ValidationError):
        variation_sweep(t1s3, [0.0, 1.0], n_samples=4)
    with pytest.raises(ValidationError):
        variation_sweep(t1s3, [0.5], n_samples=0)


def test_sweep_is_deterministic(t1s3):
    a = variation_sweep(t1s3, [0.25], n_samples=5, seed=9, planes_per_point=3)
    b = variation_sweep(t1s3, [0.25], n_samples=5, seed=9, planes_per_point=3)
    assert a[0].floor == b[0].floor
    assert a[0].positive_fraction == b[0].positive_fraction
