import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coevo.errors import AssumptionError, ParameterError
from coevo.model import (
    REFERENCE_PARAMS, Graph, ModelParams, as_behavior, growth_rate, incentive_vectors,
    mf_incentives, node_incentives, node_rates, rate_coefficients, rate_vectors,
    require_assumptions, validate_assumptions)


@pytest.mark.parametrize("field, value", [
    ("gamma", 0.0), ("tau", -1.0), ("mu", 0.0), ("kappa", 0.0),
    ("alpha", -0.1), ("sigma", -0.1), ("sigma", 3.5), ("gamma", float("nan")),
])
def test_params_reject_invalid(field, value):
    with pytest.raises(ParameterError):
        REFERENCE_PARAMS.with_(**{field: value})


def test_params_error_is_a_value_error():
    with pytest.raises(ValueError):
        ModelParams(gamma=-1)


def test_assumptions_reference_values():
    report = validate_assumptions(REFERENCE_PARAMS)
    assert report.tau_below_gamma and report.cost_dominates and report.holds


def test_assumptions_boundary_cases():
    edge = validate_assumptions(REFERENCE_PARAMS.with_(kappa=1.9))
    assert edge.tau_below_gamma and not edge.cost_dominates
    assert not validate_assumptions(REFERENCE_PARAMS.with_(tau=10.0)).tau_below_gamma
    with pytest.raises(AssumptionError, match="tau < gamma"):
        require_assumptions(REFERENCE_PARAMS.with_(tau=10.0))


def test_graph_rejects_bad_neighbor_lists():
    with pytest.raises(ParameterError, match="degree 0"):
        Graph.from_edges(2, [(0, 1)])
    with pytest.raises(ParameterError):
        Graph.from_edges(2, [(0, 1), (1, 2)])
    with pytest.raises(ParameterError, match="more than once"):
        Graph.from_edges(2, [(0, 1), (0, 1), (1, 0)])


def test_complete_graph_includes_self():
    g = Graph.complete(4)
    assert all(i in g.neighbors[i] for i in range(4))
    assert np.all(g.degrees == 4)
    np.testing.assert_allclose(g.dense_weights(), np.full((4, 4), 0.25))


def test_behavior_vector_rejects_non_binary():
    with pytest.raises(ParameterError):
        as_behavior([0, 1, 2])
    with pytest.raises(ParameterError):
        as_behavior([0.5, 1])
    assert as_behavior([1, 0, 1]).dtype == np.int8


def test_incentives_two_node_example():
    g = Graph.complete(2)
    for i in range(2):
        iota1, iota0 = node_incentives(i, [1, 0], 1.0, g, REFERENCE_PARAMS)
        assert iota1 == pytest.approx(1.4, abs=1e-15)
        assert iota0 == pytest.approx(2.9, abs=1e-15)


def test_incentives_saturated_states():
    g = Graph.complete(3)
    p = REFERENCE_PARAMS
    assert node_incentives(0, [0, 0, 0], 0.0, g, p) == pytest.approx((p.alpha, 1 + p.kappa - p.sigma))
    assert node_incentives(1, [1, 1, 1], 2.5, g, p) == pytest.approx(
        (1 + p.mu * 2.5 + p.alpha, p.kappa - p.sigma))


def test_rates_two_node_example():
    g = Graph.complete(2)
    rho01, _ = node_rates(1, [1, 0], 1.0, g, REFERENCE_PARAMS)
    _, rho10 = node_rates(0, [1, 0], 1.0, g, REFERENCE_PARAMS)
    assert rho01 == pytest.approx(0.7, abs=1e-15)
    assert rho10 == pytest.approx(1.45, abs=1e-15)


def test_rates_vanish_in_uniform_states():
    g = Graph.random(6, 0.5, seed=3)
    rho01, _ = rate_vectors(np.zeros(6), 4.0, g, REFERENCE_PARAMS)
    _, rho10 = rate_vectors(np.ones(6), 4.0, g, REFERENCE_PARAMS)
    assert np.all(rho01 == 0) and np.all(rho10 == 0)


def test_node_index_checked():
    with pytest.raises(ParameterError):
        node_rates(5, [0, 1], 0.0, Graph.complete(2), REFERENCE_PARAMS)


@given(n=st.integers(1, 7), p=st.floats(0.0, 1.0), seed=st.integers(0, 10_000),
       eps=st.floats(0.0, 50.0), bits=st.integers(0, 2**7 - 1))
def test_vectorised_rates_match_per_node_sums(n, p, seed, eps, bits):
    g = Graph.random(n, p, seed)
    X = np.array([(bits >> k) & 1 for k in range(n)])
    rho01, rho10 = rate_vectors(X, eps, g, REFERENCE_PARAMS)
    for i in range(n):
        r01, r10 = node_rates(i, X, eps, g, REFERENCE_PARAMS)
        assert rho01[i] == pytest.approx(r01, rel=1e-12, abs=1e-14)
        assert rho10[i] == pytest.approx(r10, rel=1e-12, abs=1e-14)
    assert np.all(rho01 >= 0) and np.all(rho10 >= 0)


@given(n=st.integers(1, 6), seed=st.integers(0, 1000), eps=st.floats(0.0, 20.0),
       bits=st.integers(0, 63))
def test_rate_split_is_affine_in_impact(n, seed, eps, bits):
    g = Graph.random(n, 0.5, seed)
    X = np.array([(bits >> k) & 1 for k in range(n)], dtype=float)
    a01, b01, rho10 = rate_coefficients(X, g, REFERENCE_PARAMS)
    rho01, rho10b = rate_vectors(X, eps, g, REFERENCE_PARAMS)
    np.testing.assert_allclose(rho01, a01 + eps * b01, rtol=1e-14, atol=1e-14)
    np.testing.assert_array_equal(rho10, rho10b)


@given(n=st.integers(1, 9), bits=st.integers(0, 511), eps=st.floats(0.0, 10.0))
def test_complete_graph_incentives_reduce_to_mean_field(n, bits, eps):
    g = Graph.complete(n)
    X = np.array([(bits >> k) & 1 for k in range(n)], dtype=float)
    iota1, iota0 = incentive_vectors(X, eps, g, REFERENCE_PARAMS)
    m1, m0 = mf_incentives(X.mean(), eps, REFERENCE_PARAMS)
    np.testing.assert_allclose(iota1, m1, rtol=1e-14)
    np.testing.assert_allclose(iota0, m0, rtol=1e-14)
    assert node_incentives(n - 1, X, eps, g, REFERENCE_PARAMS) == pytest.approx((m1, m0), rel=1e-14)


def test_mf_incentive_examples():
    p = REFERENCE_PARAMS
    assert mf_incentives(0.0, 0.0, p) == pytest.approx((0.3, 3.4))
    assert mf_incentives(0.5, 2.0, p) == pytest.approx((2.0, 2.9))
    assert mf_incentives(1.0, 0.0, p) == pytest.approx((1.3, 2.4))


def test_growth_rate_examples():
    p = REFERENCE_PARAMS
    assert growth_rate(1.0, p) == pytest.approx(9.9)
    assert growth_rate(p.tau / p.gamma, p) == pytest.approx(0.0, abs=1e-15)
    assert growth_rate(0.0, p) == pytest.approx(-0.1)
    with pytest.raises(ParameterError):
        growth_rate(1.2, p)


@given(a=st.floats(0, 1), b=st.floats(0, 1))
def test_growth_rate_is_affine(a, b):
    p = REFERENCE_PARAMS
    assert growth_rate(b, p) - growth_rate(a, p) == pytest.approx(p.gamma * (b - a), abs=1e-12)
