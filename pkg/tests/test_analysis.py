import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coevo.analysis import (
    CENTER, DIVERGING, SADDLE, STABLE_NODE, STABLE_SPIRAL, TO_ONE_ZERO, TO_ORIGIN,
    UNSTABLE_NODE, UNSTABLE_SPIRAL, boundary_behavior, classify, detect_limit_cycle,
    eigenvalues_interior, equilibria, interior_equilibrium, interior_radicand,
    _chart_potential, jacobian_planar, orbit_potential, potential_rate)
from coevo.errors import AssumptionError, ParameterError
from coevo.meanfield import integrate_planar_interior, planar_rhs

from conftest import regime_params


def test_reference_equilibria(ref_params):
    origin, one_zero, inner = equilibria(ref_params)
    assert (origin.location.x, origin.location.eps) == (0.0, 0.0)
    assert (one_zero.location.x, one_zero.location.eps) == (1.0, 0.0)
    assert inner.location.x == pytest.approx(0.99, abs=1e-15)
    assert abs(inner.location.eps - 28 / 15) <= 1e-12
    assert sorted(v.real for v in origin.eigenvalues) == pytest.approx([-3.1, 9.9])
    assert sorted(v.real for v in one_zero.eigenvalues) == pytest.approx([-0.1, 1.1])
    assert [r.classification for r in (origin, one_zero, inner)] == [SADDLE, SADDLE, UNSTABLE_SPIRAL]


def test_reference_interior_eigenvalues(ref_params):
    lp, lm = eigenvalues_interior(ref_params)
    assert lp.real == pytest.approx(0.0099, abs=1e-15)
    assert lp.imag == pytest.approx(0.33284, abs=5e-6)
    assert lm == lp.conjugate()


def test_reference_jacobians(ref_params):
    J = jacobian_planar(interior_equilibrium(ref_params), ref_params)
    np.testing.assert_allclose(J, [[0.0198, 0.00594], [-56 / 3, 0.0]], rtol=1e-12, atol=1e-14)
    J0 = jacobian_planar((0.0, 0.0), ref_params)
    np.testing.assert_allclose(J0, np.diag([-3.1, 9.9]), atol=1e-15)


def test_regime_required(ref_params):
    bad = ref_params.with_(kappa=1.5)
    with pytest.raises(AssumptionError):
        equilibria(bad)
    with pytest.raises(AssumptionError):
        eigenvalues_interior(bad)
    with pytest.raises(AssumptionError):
        detect_limit_cycle(bad, (0.5, 0.5))


@given(params=regime_params(), x=st.floats(0.01, 0.99), eps=st.floats(0.01, 10.0))
def test_jacobian_matches_finite_differences(params, x, eps):
    J = jacobian_planar((x, eps), params)
    h = 1e-6
    cols = []
    for k, step in enumerate(([h, 0.0], [0.0, h])):
        plus = np.array(planar_rhs((x + step[0], eps + step[1]), params))
        minus = np.array(planar_rhs((x - step[0], eps - step[1]), params))
        cols.append((plus - minus) / (2 * h))
    fd = np.column_stack(cols)
    assert np.allclose(J, fd, rtol=1e-6, atol=1e-6 * max(1.0, np.abs(J).max()))


@settings(max_examples=150)
@given(params=regime_params())
def test_closed_form_eigenvalues_match_eigensolver(params):
    star = interior_equilibrium(params)
    assert star.eps > 0 and 0 < star.x < 1
    closed = sorted(eigenvalues_interior(params), key=lambda z: z.imag)
    numeric = sorted(np.linalg.eigvals(jacobian_planar(star, params)), key=lambda z: z.imag)
    assert np.allclose(closed, numeric, rtol=1e-10, atol=1e-10)
    q = params.tau / params.gamma
    assert closed[0].real == q * (1 - q)
    assert interior_radicand(params) < 0


@settings(max_examples=120)
@given(params=regime_params())
def test_classification_pattern_across_regime(params):
    assert [r.classification for r in equilibria(params)] == [SADDLE, SADDLE, UNSTABLE_SPIRAL]


@pytest.mark.parametrize("eigs, expected", [
    ((1.0, -2.0), SADDLE), ((-1.0, -2.0), STABLE_NODE), ((1.0, 2.0), UNSTABLE_NODE),
    ((0.5 + 1j, 0.5 - 1j), UNSTABLE_SPIRAL), ((-0.5 + 1j, -0.5 - 1j), STABLE_SPIRAL),
    ((1j, -1j), CENTER), ((0.0, -1.0), CENTER),
])
def test_classify(eigs, expected):
    assert classify(eigs) == expected


@given(params=regime_params(max_gamma=10.0), x=st.floats(0.05, 0.95), eps=st.floats(0.05, 3.0))
@settings(max_examples=30)
def test_potential_never_decreases_along_orbits(params, x, eps):
    # evaluated in the chart, since x rounds to 1.0 on close passes by the edge
    traj = integrate_planar_interior(params, (x, eps), 20.0)
    values = np.array([_chart_potential(uv, params) for uv in traj.chart(np.linspace(0, 20, 201))])
    scale = np.abs(values).max()
    assert np.all(np.diff(values) >= -1e-7 * scale)


@given(params=regime_params(), x=st.floats(0.05, 0.95), eps=st.floats(0.05, 5.0))
def test_potential_rate_is_its_time_derivative(params, x, eps):
    h = 1e-6
    dx, de = planar_rhs((x, eps), params)
    plus = orbit_potential((x + h * dx, eps + h * de), params)
    minus = orbit_potential((x - h * dx, eps - h * de), params)
    rate = potential_rate((x, eps), params)
    assert (plus - minus) / (2 * h) == pytest.approx(rate, rel=1e-5, abs=1e-6)


def test_cycle_detection_rejects_bad_inits(ref_params):
    with pytest.raises(ParameterError):
        detect_limit_cycle(ref_params, interior_equilibrium(ref_params))
    with pytest.raises(ParameterError):
        detect_limit_cycle(ref_params, (1.0, 0.5))
    with pytest.raises(ParameterError):
        detect_limit_cycle(ref_params, (0.5, 0.5), section_x=1.0)


def test_reference_orbit_returns_grow(ref_params):
    report = detect_limit_cycle(ref_params, (0.5, 0.5), horizon=1500.0)
    times = [c[0] for c in report.crossings]
    assert len(times) >= 3 and np.all(np.diff(times) > 0)
    # each return to the section comes back with a larger impact, and later
    assert all(ratio > 1.5 for ratio in report.return_ratios)
    assert np.all(np.diff(np.diff(times)) > 0)
    assert report.potential[1] > report.potential[0]
    assert not report.converged and report.notes
    assert report.period > 0
    lo, hi = report.amplitude["eps"]
    assert 0 < lo < hi


def hopf_chart_field(params, omega=1.0):
    # attracting circle of radius 1 around the interior equilibrium, in chart coordinates
    star = interior_equilibrium(params)
    u0, v0 = math.log(star.x / (1 - star.x)), math.log(star.eps)

    def fun(_t, y):
        a, b = y[0] - u0, y[1] - v0
        r2 = a * a + b * b
        return np.array([a * (1 - r2) - omega * b, b * (1 - r2) + omega * a])

    return fun


def test_detector_finds_a_known_cycle(ref_params):
    star = interior_equilibrium(ref_params)
    init = (star.x * 0.9999, star.eps * 1.5)
    report = detect_limit_cycle(ref_params, init, horizon=200.0, field=hopf_chart_field(ref_params, 2.0))
    assert report.converged
    assert report.period == pytest.approx(math.pi, rel=1e-8)
    # converged means the last returns agree to the tolerance
    eps = [c[1] for c in report.crossings[-4:]]
    assert all(abs(b - a) / a < 1e-4 for a, b in zip(eps, eps[1:]))
    # with counterclockwise rotation the upward crossings of a = 0 sit at b = -1
    assert report.crossings[-1][1] == pytest.approx(star.eps * math.exp(-1.0), rel=1e-6)


def test_detector_period_independent_of_init_for_known_cycle(ref_params):
    star = interior_equilibrium(ref_params)
    field = hopf_chart_field(ref_params)
    periods = [detect_limit_cycle(ref_params, (star.x * f, star.eps * g), horizon=300.0, field=field).period
               for f, g in ((0.9999, 1.2), (0.99995, 0.5), (0.9, 2.0))]
    assert max(periods) - min(periods) <= 1e-3 * min(periods)


def test_boundary_cases(ref_params):
    first = boundary_behavior((1.0, 5.0), ref_params)
    assert first.tag == TO_ONE_ZERO
    grid = np.linspace(0, 100, 20)
    assert np.max(np.abs(first.trajectory(grid)[:, 1] - 5.0 * np.exp(-ref_params.tau * grid))) <= 1e-9 * 5.0
    assert boundary_behavior((0.7, 0.0), ref_params).tag == TO_ORIGIN
    assert boundary_behavior((0.0, 0.01), ref_params).tag == DIVERGING
    with pytest.raises(ParameterError):
        boundary_behavior((0.5, 0.5), ref_params)


@given(params=regime_params(max_gamma=10.0), x=st.floats(0.0, 0.999), e=st.floats(0.001, 5.0))
@settings(max_examples=25)
def test_boundary_outcomes_across_regime(params, x, e):
    assert boundary_behavior((1.0, e), params, horizon=400 / params.tau).tag == TO_ONE_ZERO
    assert boundary_behavior((x, 0.0), params, horizon=5000.0).tag == TO_ORIGIN
    assert boundary_behavior((0.0, e), params).tag == DIVERGING
