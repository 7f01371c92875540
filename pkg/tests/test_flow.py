import math

import networkx as nx
import numpy as np
import pytest

from netcurv.curvature import CurvatureKind, forman_graph_all
from netcurv.flow import FlowConfig, FlowError, flow_step, run_flow
from netcurv.graph import WeightedGraph


def cycle(n):
    return WeightedGraph(range(n), [(i, (i + 1) % n) for i in range(n)])


def test_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(kind="box1")
    with pytest.raises(ValueError):
        FlowConfig(mean="median")
    with pytest.raises(ValueError):
        FlowConfig(prune_keep_fraction=0.0)
    assert FlowConfig().normalizes
    assert not FlowConfig(kind="haantjes").normalizes


def test_fixed_point_examples():
    g, _, rep = flow_step(cycle(6), None, FlowConfig())
    assert np.array_equal(g.edge_weights, np.ones(6))
    one = WeightedGraph("ab", [("a", "b")])
    g, _, rep = flow_step(one, None, FlowConfig())
    assert rep.curvature.tolist() == [2.0] and g.edge_weights.tolist() == [1.0]
    path = WeightedGraph("abc", [("a", "b"), ("b", "c")])
    g, _, rep = flow_step(path, None, FlowConfig())
    assert rep.curvature.tolist() == [1.0, 1.0] and g.edge_weights.tolist() == [1.0, 1.0]


def test_step_matches_hand_update():
    # star with one weighted spoke; arithmetic mean, no normalization, no pruning
    g = WeightedGraph(range(4), [(0, 1, 2.0), (0, 2), (0, 3)])
    cfg = FlowConfig(normalize_curvature=False, prune_keep_fraction=1.0, step=0.1)
    ric = forman_graph_all(g)
    expected = g.edge_weights - 0.1 * (ric - ric.mean()) * g.edge_weights
    new, _, rep = flow_step(g, None, cfg)
    assert np.allclose(new.edge_weights, expected, atol=1e-14)
    assert rep.mean_curvature == pytest.approx(ric.mean(), abs=1e-14)


def test_pruning_keeps_ties_and_the_requested_share():
    G = nx.barbell_graph(5, 2)
    g = WeightedGraph.from_networkx(G)
    new, _, rep = flow_step(g, None, FlowConfig(prune_keep_fraction=0.5))
    assert new.n_edges >= math.ceil(0.5 * g.n_edges)
    assert all(w >= rep.threshold for w in new.edge_weights)
    assert len(rep.pruned) == g.n_edges - new.n_edges


def test_clamping_reported():
    g = WeightedGraph(range(4), [(0, 1, 5.0), (1, 2), (2, 3), (0, 3)])
    new, _, rep = flow_step(g, None, FlowConfig(normalize_curvature=False, step=10.0, prune_keep_fraction=1.0))
    assert rep.clamped > 0
    assert new.edge_weights.min() >= FlowConfig().min_weight


def test_faces_follow_surviving_edges():
    g = WeightedGraph.from_networkx(nx.wheel_graph(6))
    cfg = FlowConfig(kind="full-forman", prune_keep_fraction=0.6, step=0.01)
    new, c, _ = flow_step(g, None, cfg)
    assert c.base is new
    for fe in c.face_edges:
        assert all(0 <= e < new.n_edges for e in fe)


def test_run_flow_zero_iterations():
    tr = run_flow(cycle(5), None, FlowConfig(iterations=0))
    assert len(tr) == 1 and tr.states[0].iteration == 0


def test_run_flow_cycle_constant():
    tr = run_flow(cycle(6), None, FlowConfig(iterations=5, stop_variance=-1.0))
    assert len(tr) == 6
    for s in tr.states:
        assert np.array_equal(s.weights, np.ones(6))
    assert run_flow(cycle(6), None, FlowConfig(iterations=5)).converged


def test_run_flow_variance_baseline():
    # recorded on the default graph-Forman flow with the weighted mean: the
    # variance of the raw curvature grows at every step on this graph
    g = WeightedGraph.from_networkx(nx.gnp_random_graph(30, 0.15, seed=0))
    tr = run_flow(g, None, FlowConfig(mean="weighted", iterations=5))
    v = tr.variances
    assert len(v) == 6
    assert sum(b <= a for a, b in zip(v, v[1:])) == 0


def test_divergence_raises():
    g = WeightedGraph.from_networkx(nx.gnp_random_graph(30, 0.15, seed=0))
    cfg = FlowConfig(kind="full-forman", mean="weighted", iterations=6, prune_keep_fraction=1.0)
    with pytest.raises(FlowError):
        run_flow(g, None, cfg)


def test_empty_graph_rejected():
    with pytest.raises(FlowError):
        run_flow(WeightedGraph("ab", []), None, FlowConfig())
