import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kuracluster.model import (ErrorState, NetworkSpec, SimState, from_error, rhs_error, rhs_full,
                               to_error, wrap_2pi, wrap_pi)
from kuracluster.rules import shifted_cos

from conftest import random_clustered_network
from oracles import loop_rhs


def _random_state(spec, rng):
    return SimState(rng.uniform(-4, 4, spec.n), rng.uniform(-1, 1, spec.graph.n_edges))


def test_wrap_ranges():
    x = np.array([-math.pi, math.pi, 3 * math.pi, -1e-300, 2 * math.pi])
    w = wrap_pi(x)
    assert np.all(w > -math.pi) and np.all(w <= math.pi)
    assert w[0] == math.pi and w[1] == math.pi
    w2 = wrap_2pi(x)
    assert np.all(w2 >= 0) and np.all(w2 < 2 * math.pi)


def test_spec_validation(ex2):
    s = ex2.spec
    for bad in (dict(gamma=0.0), dict(mu_inter=-1.0), dict(mu_intra=0.0), dict(omega=np.ones(3)),
                dict(omega=np.full(7, np.nan))):
        with pytest.raises(ValueError):
            s.replace(**bad)
    assert s.replace(mu_inter=0.0).mu_inter == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_rhs_full_matches_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    spec, p = random_clustered_network(rng)
    spec = spec.replace(rule=shifted_cos(float(rng.uniform(-1, 1))))
    state = _random_state(spec, rng)
    d = rhs_full(spec, state)
    n = spec.n
    kmat = np.zeros((n, n))
    for q, (i, j) in enumerate(spec.graph.edges):
        kmat[i, j] = state.k[q]
    lab = p.labels
    dtheta, dk = loop_rhs(spec.graph.adjacency, spec.omega, spec.gamma,
                          lambda i, j: spec.mu_intra if lab[i] == lab[j] else spec.mu_inter,
                          lambda x: math.cos(x + spec.rule.params["alpha"]), state.theta, kmat)
    assert np.allclose(d.theta, dtheta, atol=1e-12)
    assert np.allclose(d.k, [dk[i, j] for i, j in spec.graph.edges], atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_error_coordinates_round_trip_and_derivative(seed):
    rng = np.random.default_rng(seed)
    spec, p = random_clustered_network(rng)
    state = _random_state(spec, rng)
    es = to_error(state, spec.graph, p)
    back = from_error(es, spec.graph, p)
    assert np.allclose(wrap_pi(back.theta - state.theta), 0, atol=1e-12)
    assert np.array_equal(back.k, state.k)

    # chain rule: derivative in error coordinates is the projection of the full one
    full = rhs_full(spec, back)
    d = rhs_error(spec, es, p)
    reps = np.array(p.representatives)
    err = np.array(p.non_representatives, dtype=int)
    owner = reps[p.labels[err]]
    assert np.allclose(d.phi, full.theta[reps], atol=1e-12)
    assert np.allclose(d.e, full.theta[err] - full.theta[owner], atol=1e-12)
    assert np.allclose(from_error(ErrorState(d.phi, d.e, d.k_inter, d.k_intra),
                                  spec.graph, p).k, full.k, atol=1e-12)


def test_manifold_is_invariant_for_rhs_error(ex2):
    spec, p = ex2.spec, ex2.partition
    es = to_error(ex2.initial, spec.graph, p)
    es.e[:] = 0.0
    es.k_intra[:] = spec.mu_intra * spec.rule.at_zero / spec.gamma
    es.k_inter[:] = 0.3     # equal inter couplings feed every node of a cluster alike
    d = rhs_error(spec, es, p)
    assert np.abs(d.e).max() < 1e-15
    assert np.abs(d.k_intra).max() < 1e-18


def test_state_shape_mismatch(ex1):
    with pytest.raises(ValueError):
        rhs_full(ex1.spec, SimState(np.zeros(4), np.zeros(20)))


def test_rhs_error_needs_partition(ex1):
    spec = NetworkSpec(ex1.graph, ex1.spec.omega, 1.0, 0.01, 0.01, ex1.spec.rule)
    es = to_error(ex1.initial, ex1.graph, ex1.partition)
    with pytest.raises(ValueError, match="partition"):
        rhs_error(spec, es)
