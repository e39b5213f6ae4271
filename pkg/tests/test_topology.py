import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymdiff.topology import (
    ConnectivityError,
    NetworkTopology,
    build_probability_graph,
    build_radius_graph,
    read_edge_list,
    uniform_combination,
    write_edge_list,
)


def _reference_probability_graph(n, p, seed):
    """Independent re-simulation: scalar loop over pairs, retried until connected."""
    rng = np.random.default_rng(seed)
    while True:
        adj = [[i == j for j in range(n)] for i in range(n)]
        draws = iter(rng.random(n * (n - 1) // 2))
        for i in range(n):
            for j in range(i + 1, n):
                if next(draws) < p:
                    adj[i][j] = adj[j][i] = True
        # depth-first connectivity
        seen, stack = {0}, [0]
        while stack:
            u = stack.pop()
            for v in range(n):
                if adj[u][v] and v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) == n:
            return np.array(adj)


class TestProbabilityGraph:
    def test_full_probability_gives_complete_graph(self):
        topo = build_probability_graph(5, 1.0, seed=11)
        assert topo.adjacency.all()
        assert all(len(topo.neighbors(n)) == 5 for n in range(5))

    def test_zero_probability_cannot_connect(self):
        with pytest.raises(ConnectivityError):
            build_probability_graph(2, 0.0, seed=0, max_retries=50)

    def test_matches_independent_resimulation(self):
        topo = build_probability_graph(20, 0.2, seed=7)
        ref = _reference_probability_graph(20, 0.2, 7)
        assert np.array_equal(topo.adjacency, ref)
        assert len(topo.edges()) == (ref.sum() - 20) // 2
        assert topo.is_connected()

    @pytest.mark.parametrize("p", [-0.1, 1.5])
    def test_invalid_probability(self, p):
        with pytest.raises(ValueError):
            build_probability_graph(5, p, seed=0)

    def test_node_count_floor(self):
        with pytest.raises(ValueError):
            build_probability_graph(1, 0.5, seed=0)


class TestRadiusGraph:
    def test_large_radius_is_complete(self):
        assert build_radius_graph(4, 2.0, seed=5).adjacency.all()

    def test_edges_follow_distance(self):
        topo = build_radius_graph(20, 0.3, seed=3)
        xy = topo.coordinates
        assert np.all((xy >= 0) & (xy <= 1))
        for l in range(20):
            for n in range(l + 1, 20):
                dist = np.hypot(*(xy[l] - xy[n]))
                assert topo.adjacency[l, n] == (dist <= 0.3)

    def test_tiny_radius_fails(self):
        with pytest.raises(ConnectivityError):
            build_radius_graph(2, 1e-9, seed=0, max_retries=100)

    def test_invalid_radius(self):
        with pytest.raises(ValueError):
            build_radius_graph(5, 0.0, seed=0)


class TestInvariants:
    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(2, 25), p=st.floats(0.3, 1.0), seed=st.integers(0, 2**32 - 1))
    def test_symmetric_self_looped_connected(self, n, p, seed):
        topo = build_probability_graph(n, p, seed)
        adj = topo.adjacency
        assert np.array_equal(adj, adj.T)
        assert adj.diagonal().all()
        assert topo.is_connected()

    def test_determinism(self):
        assert build_probability_graph(15, 0.3, 99) == build_probability_graph(15, 0.3, 99)
        assert build_radius_graph(15, 0.4, 99) == build_radius_graph(15, 0.4, 99)

    def test_rejects_asymmetric(self):
        adj = np.eye(3, dtype=bool)
        adj[0, 1] = True
        with pytest.raises(ValueError):
            NetworkTopology(adj)

    def test_rejects_missing_self_loop(self):
        with pytest.raises(ValueError):
            NetworkTopology(np.ones((3, 3), dtype=bool) & ~np.eye(3, dtype=bool))


class TestUniformCombination:
    def test_degree_four_node(self):
        adj = np.eye(5, dtype=bool)
        for l in (1, 2, 3):
            adj[0, l] = adj[l, 0] = True
        c = uniform_combination(NetworkTopology(adj))
        assert np.allclose(c[[0, 1, 2, 3], 0], 0.25)
        assert c[4, 0] == 0.0

    def test_complete_three(self):
        c = uniform_combination(NetworkTopology(np.ones((3, 3), dtype=bool)))
        assert np.allclose(c, 1 / 3)

    def test_isolated_node(self):
        adj = np.eye(3, dtype=bool)
        adj[0, 1] = adj[1, 0] = True
        c = uniform_combination(NetworkTopology(adj))
        assert c[2, 2] == 1.0
        assert c[:, 2].sum() == 1.0

    @pytest.mark.parametrize("seed", range(20))
    def test_column_stochastic_and_supported(self, seed):
        topo = build_radius_graph(12, 0.45, seed)
        c = uniform_combination(topo)
        assert np.all(c >= 0)
        assert np.all(c[~topo.adjacency] == 0)
        assert np.allclose(c.sum(axis=0), 1.0, atol=1e-12, rtol=0)


def test_edge_list_round_trip():
    topo = build_radius_graph(8, 0.5, seed=2)
    buf = io.StringIO()
    write_edge_list(topo, buf)
    text = buf.getvalue()
    assert text.startswith("N 8\n")
    assert all(line.startswith("coord") for line in text.splitlines()[-8:])
    assert read_edge_list(io.StringIO(text)) == topo


def test_edge_list_without_coordinates():
    topo = build_probability_graph(6, 0.6, seed=4)
    buf = io.StringIO()
    write_edge_list(topo, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "N 6"
    assert len(lines) == 1 + len(topo.edges())
    assert read_edge_list(io.StringIO(buf.getvalue())) == topo
