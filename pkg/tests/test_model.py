from __future__ import annotations

import numpy as np
import pytest

from qkdroute.model import (
    NetworkGraph,
    RouterConfig,
    ValidationError,
    check_target_matrix,
    uniform_target,
    validate,
)


def test_graph_basics(ring6):
    graph, _ = ring6
    assert graph.node_count == 6
    assert graph.has_edge(0, 1) and graph.has_edge(1, 0)
    assert not graph.has_edge(0, 2)
    assert graph.rate(3, 0) == 1000
    assert graph.rate(0, 5) == 0
    assert graph.neighbors(1) == (0, 2, 4)
    assert graph.degree(2) == 3
    assert graph.is_connected()
    assert graph.remote_pairs() == (
        (0, 2), (0, 4), (0, 5), (1, 3), (1, 5), (2, 4), (3, 4), (3, 5)
    )


def test_rate_matrix_symmetry(dense5):
    graph, _ = dense5
    mat = graph.rate_matrix()
    assert mat.dtype == np.int64
    assert np.array_equal(mat, mat.T)
    assert mat[0, 1] == 500 and mat[2, 4] == 300
    assert mat[0, 4] == 0 and mat.diagonal().sum() == 0


def test_graph_rejects_self_loop():
    with pytest.raises(ValidationError, match="self-loop"):
        NetworkGraph(3, {(0, 0): 100, (0, 1): 100, (1, 2): 100})


def test_graph_rejects_bad_rates():
    with pytest.raises(ValidationError, match="positive"):
        NetworkGraph(2, {(0, 1): 0})
    with pytest.raises(ValidationError, match="positive"):
        NetworkGraph(2, {(0, 1): -5})


def test_graph_rejects_duplicate_edge():
    with pytest.raises(ValidationError, match="duplicate"):
        NetworkGraph(2, {(0, 1): 100, (1, 0): 100})


def test_graph_rejects_unknown_node():
    with pytest.raises(ValidationError, match="unknown node"):
        NetworkGraph(2, {(0, 5): 100})


def test_disconnected_graph_detected():
    graph = NetworkGraph(4, {(0, 1): 100, (2, 3): 100})
    assert not graph.is_connected()
    assert not validate(graph, 1).connected


def test_uniform_target():
    target = uniform_target(3, 250)
    assert target[0, 1] == 250 and target[1, 0] == 250
    assert target.diagonal().sum() == 0
    check_target_matrix(target, 3)


def test_target_matrix_checks():
    bad = uniform_target(3, 100)
    bad[0, 1] = 50
    with pytest.raises(ValidationError, match="symmetric"):
        check_target_matrix(bad, 3)
    diag = uniform_target(3, 100)
    diag[1, 1] = 7
    with pytest.raises(ValidationError, match="diagonal"):
        check_target_matrix(diag, 3)
    neg = uniform_target(3, 100)
    neg[0, 2] = neg[2, 0] = -5
    with pytest.raises(ValidationError, match="non-negative"):
        check_target_matrix(neg, 3)


def test_validate_degree_requirements(ring6, k23):
    graph, _ = ring6
    report = validate(graph, 2)
    assert report.ok
    assert report.min_degree == 2
    assert report.degree_violations == ()

    path_graph = NetworkGraph(3, {(0, 1): 100, (1, 2): 100})
    report = validate(path_graph, 2)
    assert report.degree_violations == (0, 2)
    assert not report.ok

    k23_graph, _ = k23
    assert validate(k23_graph, 2).ok
    assert validate(k23_graph, 3).degree_violations == (1, 2, 3)


def test_validate_rejects_bad_m(ring6):
    graph, _ = ring6
    with pytest.raises(ValueError):
        validate(graph, 0)


def test_router_config_invariants():
    config = RouterConfig()
    assert config.m == 2 and config.strict_guard and config.delta_r is None
    with pytest.raises(ValidationError):
        RouterConfig(m=0)
    with pytest.raises(ValidationError):
        RouterConfig(delta_r=0)
    with pytest.raises(ValidationError):
        RouterConfig(r_max=-1)
    with pytest.raises(ValidationError):
        RouterConfig(hop_limit=0)
    with pytest.raises(ValidationError):
        RouterConfig(seed=2**64)
    RouterConfig(r_max=0, delta_r=1, hop_limit=1, seed=2**64 - 1)
