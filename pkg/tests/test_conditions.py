import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kuracluster.conditions import (a3_values, check_A1, check_A2, check_A3, check_A4, check_all,
                                    report_to_dict, report_to_text)
from kuracluster.graph import build_digraph, cluster_cardinalities, complete_digraph, make_partition
from kuracluster.model import NetworkSpec
from kuracluster.rules import custom_fourier, hebbian_cos, neg_cos, shifted_cos

from conftest import random_clustered_network
from oracles import a3_mp, indegree_from

W1 = [0.5, 0.5, 0.5, math.sqrt(2) / 3, math.sqrt(2) / 3]


def _spec(graph, omega, p=None, mu=0.01, mu_tilde=0.01, gamma=1.0, rule=None):
    return NetworkSpec(graph, omega, gamma, mu, mu_tilde, rule or hebbian_cos(), p)


def test_a1_pass_and_named_violation():
    g = complete_digraph(5)
    ok = check_A1(_spec(g, W1), make_partition([[0, 1, 2], [3, 4]]))
    assert ok.passed and ok.violations == []
    bad = check_A1(_spec(g, W1), make_partition([[0, 1, 3], [2, 4]]))
    assert not bad.passed
    assert (0, 1, 3) in bad.violations          # cluster 1, nodes 2 & 4 (1-based)


def test_a1_singletons_pass():
    p = make_partition([[i] for i in range(5)])
    assert check_A1(_spec(complete_digraph(5), W1), p).passed


def test_a1_exact_versus_relaxed():
    g = complete_digraph(2)
    p = make_partition([[0, 1]])
    s = _spec(g, [0.5, 0.5 * (1 + 1e-14)])
    assert not check_A1(s, p).passed
    assert check_A1(s, p, "relaxed").passed
    assert not check_A1(_spec(g, [0.5, 0.5 * (1 + 1e-10)]), p, "relaxed").passed


def test_a2_example2_and_complete_graphs(ex2):
    r = check_A2(ex2.graph, ex2.partition)
    assert r.passed and r.indegree_sets == {(0, 1): {1}, (1, 0): {1}}
    g = complete_digraph(5)
    for clusters in ([[0, 1, 2], [3, 4]], [[0], [1, 2], [3, 4]], [[4, 0], [1, 2, 3]]):
        assert check_A2(g, make_partition(clusters)).passed


def test_a2_path_graph_fails_by_direct_count():
    adj = [[0, 1, 0], [0, 0, 1], [0, 0, 0]]
    clusters = [[0, 1], [2]]
    r = check_A2(build_digraph(adj), make_partition(clusters))
    counts = {indegree_from(adj, i, clusters[1]) for i in clusters[0]}
    assert counts == {0, 1}
    assert not r.passed and r.violations == [(0, 1)]


def test_a2_invariant_under_relabeling_inside_clusters(ex2):
    perm = np.array([1, 2, 0, 4, 5, 6, 3])     # permutes nodes within each cluster
    adj = ex2.graph.adjacency[np.ix_(perm, perm)]
    inv = np.argsort(perm)
    clusters = [[int(inv[i]) for i in c] for c in ex2.partition.clusters]
    assert check_A2(build_digraph(adj), make_partition(clusters)).passed


def test_a3_examples_against_high_precision(ex1, ex2):
    for cfg in (ex1, ex2):
        r = check_A3(cfg.spec, cluster_cardinalities(cfg.graph, cfg.partition))
        want = a3_mp(r.w_min, r.w_max, cfg.spec.mu_inter, cfg.spec.gamma, r.delta, r.c_max,
                     r.c_out, r.c_sr_total)
        assert r.frequency_margin == pytest.approx(want[0], rel=1e-14)
        assert r.smallness == pytest.approx(want[1], rel=1e-13)
    r2 = check_A3(ex2.spec, cluster_cardinalities(ex2.graph, ex2.partition))
    assert r2.frequency_margin == pytest.approx(0.495, abs=1e-15)
    assert r2.smallness == pytest.approx(0.96147905853, abs=1e-10)


def test_a3_mu_to_zero():
    margin, small = a3_values(0.5, 0.7, 0.0, 1.0, 1.0, 3, 12, 5)
    assert margin == 0.5 and small == 0.0


def test_a3_nonpositive_margin_skips_second_value():
    margin, small = a3_values(0.1, 0.2, 1.0, 1.0, 1.0, 3, 12, 5)
    assert margin < 0 and small is None


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_a3_monotone_in_mu_and_bisection_finds_threshold(seed):
    rng = np.random.default_rng(seed)
    spec, p = random_clustered_network(rng)
    stc = cluster_cardinalities(spec.graph, p)
    if stc.c_out == 0:
        return
    mus = np.sort(rng.uniform(0, 0.05, 20))
    vals = [check_A3(spec.replace(mu_inter=float(m)), stc) for m in mus]
    margins = [v.frequency_margin for v in vals]
    assert all(b <= a for a, b in zip(margins, margins[1:]))
    smalls = [v.smallness for v in vals if v.smallness is not None]
    assert all(b >= a for a, b in zip(smalls, smalls[1:]))
    lo, hi = 0.0, 1.0
    assert not check_A3(spec.replace(mu_inter=hi), stc).passed
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if check_A3(spec.replace(mu_inter=mid), stc).passed else (lo, mid)
    assert lo > 0 and check_A3(spec.replace(mu_inter=lo), stc).passed


def test_a4_example2_and_sign_flip(ex2):
    r = check_A4(ex2.graph, ex2.partition, hebbian_cos())
    assert r.passed and all(c.passed for c in r.clusters)
    assert r.clusters[0].spectrum.max_real_part == pytest.approx(-1.5, abs=1e-12)
    flipped = check_A4(ex2.graph, ex2.partition, neg_cos())
    assert not flipped.passed and not any(c.passed for c in flipped.clusters)


def test_a4_example1_scalar_spectra(ex1):
    r = check_A4(ex1.graph, ex1.partition, hebbian_cos())
    assert [z.real for z in r.clusters[0].spectrum.eigenvalues] == pytest.approx([-3, -3])
    assert [z.real for z in r.clusters[1].spectrum.eigenvalues] == pytest.approx([-2])


def test_a4_degenerate_rule(ex2):
    r = check_A4(ex2.graph, ex2.partition, custom_fourier([0.0, 0.0], [1.0]))   # Γ = sin
    assert r.degenerate and not r.passed and r.gamma_at_zero == 0.0


def test_a4_clusterwise_independence():
    # cluster 1 is a directed 3-cycle missing a link (unstable), cluster 2 complete
    adj = np.zeros((5, 5), dtype=int)
    adj[1, 0] = 1                       # node 2 hears node 1 only
    adj[3, 4] = adj[4, 3] = 1
    g = build_digraph(adj)
    p = make_partition([[0, 1, 2], [3, 4]])
    r = check_A4(g, p, hebbian_cos())
    assert not r.clusters[0].passed and r.clusters[1].passed and not r.passed
    alone = check_A4(build_digraph(adj[3:, 3:]), make_partition([[0, 1]]), hebbian_cos())
    assert alone.clusters[0].passed == r.clusters[1].passed
    assert alone.clusters[0].signed_max_real_part == r.clusters[1].signed_max_real_part


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2 ** 32 - 1), st.floats(-3, 3))
def test_complete_graphs_follow_sign_of_rule_at_zero(n, seed, alpha):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, n + 1))
    labels = np.concatenate([np.arange(m), rng.integers(0, m, n - m)])
    clusters = [np.nonzero(labels == s)[0].tolist() for s in range(m)]
    rule = shifted_cos(alpha)
    r = check_A4(complete_digraph(n), make_partition(clusters), rule)
    if all(len(c) == 1 for c in clusters):
        assert r.passed == (not r.degenerate)
    else:
        assert r.passed == (rule.at_zero > 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_sign_flip_reverses_every_nontrivial_cluster(seed):
    rng = np.random.default_rng(seed)
    spec, p = random_clustered_network(rng)
    a = check_A4(spec.graph, p, hebbian_cos())
    b = check_A4(spec.graph, p, neg_cos())
    for ca, cb in zip(a.clusters, b.clusters):
        if ca.size > 1:
            assert ca.signed_max_real_part == -cb.signed_max_real_part
            if ca.signed_max_real_part != 0:
                assert ca.passed != cb.passed


def test_report_exit_codes_and_rendering(ex2):
    rep = check_all(ex2.spec)
    assert rep.exit_code == 0
    assert check_all(ex2.spec.replace(rule=neg_cos())).exit_code == 2
    assert check_all(ex2.spec.replace(mu_inter=0.01)).exit_code == 1
    d = report_to_dict(rep)
    assert d["A2"]["indegrees"][0] == {"s": 1, "r": 2, "values": [1]}
    text = report_to_text(rep)
    assert "A4 clusterwise spectra: PASS" in text and "-1.5+0.866025i" in text
