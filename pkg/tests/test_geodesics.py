import math

import numpy as np
import pytest
from scipy.integrate import quad

from sphere_strings.geodesics import (
    IntegrationFailure, MetricSpec, ShootingFailure, average_index, conjugate_points,
    density_sum, endpoint_kernel, integrate_geodesic, jacobi_fd_check, jacobi_index,
    level_guess, shoot_antipodal, shoot_antipodal_batch, tangent_basis,
)

PI = math.pi


def e(i, N):
    return np.eye(N)[i]


def round_antipodal(n, k):
    p, v = e(0, n + 1), (2 * k + 1) * PI * e(1, n + 1)
    return MetricSpec.round(n), integrate_geodesic(MetricSpec.round(n), p, v)


def test_half_turn_and_full_circle():
    m = MetricSpec.round(2)
    g = integrate_geodesic(m, e(0, 3), PI * e(1, 3), steps=2000)
    assert g.residual < 1e-8
    assert np.allclose(g.xs[-1], -e(0, 3), atol=1e-10)
    g = integrate_geodesic(m, e(0, 3), 2 * PI * e(1, 3))
    assert np.allclose(g.xs[-1], e(0, 3), atol=1e-9)
    assert math.isclose(g.energy, (2 * PI) ** 2, rel_tol=1e-10)


def test_round_matches_great_circle():
    m = MetricSpec.round(3)
    p = np.array([0.5, 0.5, 0.5, 0.5])
    w = np.array([1.0, -1.0, 0.0, 0.0]) / math.sqrt(2)
    g = integrate_geodesic(m, p, 2.3 * w, steps=1500)
    for i in (0, 400, 1000, 1500):
        t = g.times[i]
        want = math.cos(2.3 * t) * p + math.sin(2.3 * t) * w
        assert np.allclose(g.xs[i], want, atol=1e-10)


def test_ellipsoid_equator_energy():
    m = MetricSpec.ellipsoid((1, 1, 1.05))
    g = integrate_geodesic(m, e(0, 3), PI * e(1, 3))
    assert abs(g.energy / PI ** 2 - 1) < 0.01
    # a start that leaves the equator still stays within the band
    v = PI * np.array([0, 0.8, 0.6]) / math.sqrt(0.64 + 0.36 * 1.05 ** 2)
    g = integrate_geodesic(m, e(0, 3), v)
    assert abs(g.energy / PI ** 2 - 1) < 0.01


def test_energy_equals_length_squared():
    for m, p, v in [(MetricSpec.round(2), e(0, 3), 2.7 * e(2, 3)),
                    (MetricSpec.ellipsoid((1, 1.2, 0.9)), e(0, 3), np.array([0, 1.0, 2.0])),
                    (MetricSpec.parse("conformal:1;0.3*x0^2", 2), e(1, 3), np.array([1.0, 0, 1.5]))]:
        g = integrate_geodesic(m, p, v)
        assert abs(g.length ** 2 / g.energy - 1) < 1e-10


def test_shooting_round_levels():
    m = MetricSpec.round(2)
    w = np.array([0, 0.6, 0.8])
    g = shoot_antipodal(m, e(0, 3), 3 * w)
    assert abs(g.length - PI) < 1e-6
    assert abs(g.energy - PI ** 2) < 1e-5
    g = shoot_antipodal(m, e(0, 3), 9 * w)
    assert abs(g.length - 3 * PI) < 1e-6
    assert g.residual < 1e-8


def test_shoot_ellipsoid_against_quadrature():
    m = MetricSpec.ellipsoid((1, 1, 1.1))
    g = shoot_antipodal(m, e(0, 3), 3 * e(2, 3))
    # the principal ellipse x0 = cos s, x2 = 1.1 sin s, s in [0, pi]
    want, _ = quad(lambda s: math.sqrt(math.sin(s) ** 2 + 1.21 * math.cos(s) ** 2), 0, PI,
                   epsabs=1e-13, epsrel=1e-13)
    assert abs(g.length - want) < 1e-9
    assert PI <= g.length <= 1.1 * PI


def test_conformal_symmetric_geodesic():
    # x0 -> -x0 is an isometry, so the equator x0 = 0 is a round great circle
    m = MetricSpec.parse("conformal:1;0.3*x0^2", 2)
    g = shoot_antipodal(m, e(1, 3), 3.5 * e(2, 3))
    assert abs(g.length - PI) < 1e-6
    assert np.allclose(g.xs[:, 0], 0, atol=1e-12)


def test_batch_matches_single():
    m = MetricSpec.round(2)
    starts = [(e(0, 3), 3 * e(1, 3)), (e(0, 3), 9 * e(2, 3))]
    out = shoot_antipodal_batch(m, starts)
    assert [round(r.length / PI, 6) for r in out] == [1, 3]
    single = shoot_antipodal(m, *starts[0], steps=out[0].steps)
    assert np.allclose(single.v, out[0].v, atol=1e-12)
    assert shoot_antipodal_batch(m, []) == []


def test_shooting_failure_carries_best_residual():
    m = MetricSpec.round(2)
    with pytest.raises(ShootingFailure) as err:
        shoot_antipodal(m, e(0, 3), 5.5 * e(1, 3), max_iter=1)
    assert err.value.residual > 0


def test_integration_failure_reports_step():
    m = MetricSpec.round(2)
    with pytest.raises(IntegrationFailure) as err:
        integrate_geodesic(m, e(0, 3), PI * e(1, 3), steps=1)
    assert err.value.step == 1
    with pytest.raises(ValueError):
        integrate_geodesic(m, e(0, 3), e(0, 3))
    with pytest.raises(ValueError):
        integrate_geodesic(m, np.array([1.0, 1.0, 0]), e(2, 3))


def test_metric_parsing():
    assert MetricSpec.parse("ellipsoid:1,1,1.1").n == 2
    assert MetricSpec.parse("round", 4).text() == "round"
    m = MetricSpec.parse("conformal:1;0.3*x0^2", 2)
    assert m.text() == "conformal:1;0.3*x0^2"
    with pytest.raises(ValueError):
        MetricSpec.parse("conformal:1;0.3*x0", 2)
    with pytest.raises(ValueError):
        MetricSpec.parse("conformal:1;-2*x0^2", 2)
    with pytest.raises(ValueError):
        MetricSpec.parse("ellipsoid:1,1,1", 3)
    with pytest.raises(ValueError):
        MetricSpec.parse("hyperbolic", 2)


def test_tangent_basis_orthonormal():
    p = np.array([0.6, 0.0, 0.8])
    B = tangent_basis(p)
    assert np.allclose(B.T @ B, np.eye(2))
    assert np.allclose(p @ B, 0)


@pytest.mark.parametrize("n,k", [(2, 0), (2, 1), (2, 2), (4, 1), (4, 2), (6, 1)])
def test_round_index(n, k):
    m, g = round_antipodal(n, k)
    rep = jacobi_index(m, g)
    assert rep.index == 2 * k * (n - 1)
    assert rep.kernel_dim == 2 * n - 1
    assert not rep.flags
    # conjugate times of a great circle at speed (2k+1)pi are j / (2k+1)
    times = sorted(c.t for c in rep.conjugate_points)
    assert len(times) == 2 * k
    for j, t in enumerate(times, 1):
        assert abs(t - j / (2 * k + 1)) < 1e-9
        assert all(c.multiplicity == n - 1 for c in rep.conjugate_points)


def test_index_zero_has_no_interior_points():
    m, g = round_antipodal(2, 0)
    rep = jacobi_index(m, g)
    assert rep.conjugate_points == []


def test_index_rejects_non_solution():
    m = MetricSpec.round(2)
    g = integrate_geodesic(m, e(0, 3), 3 * e(1, 3))
    with pytest.raises(ValueError):
        jacobi_index(m, g)


def test_endpoint_kernel_generic_is_trivial():
    m = MetricSpec.round(2)
    sv = endpoint_kernel(m, e(0, 3), 2.5 * e(1, 3), 1.0, 2000)
    assert sv.min() > 1e-3


def test_ellipsoid_principal_index():
    m = MetricSpec.ellipsoid((1, 1, 1.1))
    g = shoot_antipodal(m, e(0, 3), 3 * e(2, 3))
    rep = jacobi_index(m, g)
    assert rep.index == 1
    assert not rep.flags
    cps = conjugate_points(m, g.p, g.v, g.T, g.steps)
    assert len(cps) == 1 and 0 < cps[0].t < 1


def test_jacobi_vs_finite_difference():
    for m, p, v in [(MetricSpec.round(2), e(0, 3), 2.0 * e(1, 3)),
                    (MetricSpec.ellipsoid((1, 1.1, 0.95)), e(0, 3), np.array([0, 1.5, 1.0])),
                    (MetricSpec.parse("conformal:1;0.2*x1^2;0.1*x0^2*x2^2", 2), e(0, 3),
                     np.array([0, 1.0, 2.0]))]:
        assert jacobi_fd_check(m, p, v) < 1e-4


@pytest.mark.parametrize("n", [2, 4])
def test_average_index_and_density(n):
    m, g = round_antipodal(n, 0)
    a = average_index(m, g, 12)
    assert a.alpha == n - 1
    assert a.indices[:3] == [0, n - 1, 2 * (n - 1)]
    assert not a.flags
    rep = density_sum(m, [a], 0.1)
    assert rep.passed and rep.total == rep.bound
    # an empty band sums to zero and fails
    rep = density_sum(m, [a], 1e-6, alpha_bar=a.mean_frequency + 1)
    assert not rep.passed and rep.total == 0 and rep.members == []


def test_density_flags_and_guards():
    m, g = round_antipodal(2, 0)
    a = average_index(m, g, 4)
    a.alpha = 0
    rep = density_sum(m, [a], 10.0, alpha_bar=0.0)
    assert rep.flags and not rep.passed
    with pytest.raises(ValueError):
        density_sum(MetricSpec.round(3), [], 0.1)
    with pytest.raises(ValueError):
        average_index(m, g, 1)


def test_ellipsoid_average_index():
    m = MetricSpec.ellipsoid((1, 1, 1.1))
    g = shoot_antipodal(m, e(0, 3), 3 * e(2, 3))
    a = average_index(m, g, 12)
    assert abs(float(a.alpha) - 1) <= 0.15


def test_level_guess_speed():
    m = MetricSpec.round(2)
    p, v = level_guess(m, 1)
    assert math.isclose(np.linalg.norm(v), 3 * PI * 0.95)
    assert abs(p @ v) < 1e-15
