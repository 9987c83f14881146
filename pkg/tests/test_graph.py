import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from portopt.errors import ConfigError, DataError, IndependenceViolation
from portopt.graph import (
    MarketGraph,
    build_market_graph,
    mis_qubo,
    repair_independent_set,
    validate_independent_set,
)
from portopt.market import MarketModel
from portopt.qubo import qubo_energy

from conftest import all_binary, max_independent_set_size


def graph(n, edges):
    return MarketGraph(n, {e: 1.0 for e in edges})


def corr_model(corr):
    corr = np.asarray(corr, dtype=float)
    n = len(corr)
    return MarketModel(tuple(str(i) for i in range(n)), np.zeros(n), corr * 0.01, corr)


def ground_states(qp):
    energies = {tuple(int(v) for v in x): qubo_energy(qp, x) for x in all_binary(qp.n)}
    low = min(energies.values())
    return low, {x for x, e in energies.items() if abs(e - low) < 1e-12}


TRIANGLE = [(0, 1), (0, 2), (1, 2)]
PATH = [(0, 1), (1, 2)]


class TestBuildMarketGraph:
    def test_identity_corr_edgeless(self):
        g = build_market_graph(corr_model(np.eye(5)), 0.01)
        assert g.edges == [] and g.density() == 0.0

    def test_alpha_zero_complete(self):
        g = build_market_graph(corr_model(np.eye(4)), 0.0)
        assert len(g.edges) == 6
        assert g.density() == 1.0

    def test_three_asset_thresholding(self):
        corr = [[1.0, 0.3, -0.4], [0.3, 1.0, 0.1], [-0.4, 0.1, 1.0]]
        g = build_market_graph(corr_model(corr), 0.25)
        assert g.edges == [(0, 1), (0, 2)]
        assert g.weight[(0, 2)] == pytest.approx(0.4)

    @pytest.mark.parametrize("alpha", [-0.1, 1.5])
    def test_alpha_out_of_range(self, alpha):
        with pytest.raises(ConfigError):
            build_market_graph(corr_model(np.eye(2)), alpha)

    def test_monotone_in_alpha(self, market16):
        previous = None
        for alpha in np.linspace(0, 1, 21):
            edges = set(build_market_graph(market16, alpha).edges)
            if previous is not None:
                assert edges <= previous
            previous = edges


class TestMarketGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(DataError):
            graph(3, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(DataError):
            graph(3, [(0, 3)])

    def test_edges_normalised(self):
        g = graph(3, [(2, 0)])
        assert g.edges == [(0, 2)]
        assert g.has_edge(2, 0) and g.neighbors(0) == [2]

    def test_edgelist_round_trip(self, market16):
        g = build_market_graph(market16, 0.25)
        back = MarketGraph.from_edgelist(g.to_edgelist())
        assert back.weight == g.weight and back.n == g.n and back.alpha == g.alpha

    def test_edgelist_needs_header(self):
        with pytest.raises(DataError):
            MarketGraph.from_edgelist("0 1 0.5\n")


class TestMisQubo:
    def test_edgeless(self):
        low, states = ground_states(mis_qubo(graph(4, [])))
        assert low == -4 and states == {(1, 1, 1, 1)}

    def test_triangle(self):
        low, states = ground_states(mis_qubo(graph(3, TRIANGLE)))
        assert low == -1
        assert states == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}

    def test_path(self):
        low, states = ground_states(mis_qubo(graph(3, PATH)))
        assert low == -2 and states == {(1, 0, 1)}

    def test_pair_penalty_totals_two(self):
        qp = mis_qubo(graph(2, [(0, 1)]))
        assert qubo_energy(qp, [1, 1]) == -1 - 1 + 2


class TestValidate:
    def test_empty_selection(self):
        s = validate_independent_set(graph(3, PATH), [0, 0, 0])
        assert s.members == () and not s.maximal
        assert validate_independent_set(graph(0, []), []).maximal

    def test_triangle_violation(self):
        with pytest.raises(IndependenceViolation) as info:
            validate_independent_set(graph(3, TRIANGLE), [1, 1, 0])
        assert info.value.pair == (0, 1)

    def test_path_endpoints(self):
        s = validate_independent_set(graph(3, PATH), [1, 0, 1])
        assert s.members == (0, 2) and s.maximal

    def test_non_maximal(self):
        s = validate_independent_set(graph(3, [(0, 1)]), [1, 0, 0])
        assert not s.maximal


class TestRepair:
    def test_conflict_dropped_and_augmented(self):
        g = graph(4, [(0, 1), (1, 2), (2, 3)])
        s = repair_independent_set(g, [1, 1, 1, 1])
        assert s.maximal
        assert set(s.members) in ({0, 2}, {1, 3}, {0, 3})

    def test_empty_becomes_maximal(self, market16):
        g = build_market_graph(market16, 0.25)
        s = repair_independent_set(g, np.zeros(16, dtype=int))
        assert s.maximal and len(s) >= 1


edge_lists = st.integers(1, 10).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.sampled_from(list(itertools.combinations(range(n), 2))), unique=True)
        if n > 1
        else st.just([]),
    )
)


@settings(max_examples=60, deadline=None)
@given(edge_lists)
def test_mis_ground_state_is_maximum_independent_set(case):
    n, edges = case
    g = graph(n, edges)
    low, states = ground_states(mis_qubo(g))
    size = max_independent_set_size(n, edges)
    assert low == pytest.approx(-size)
    for x in states:
        assert sum(x) == size
        validate_independent_set(g, x)


@settings(max_examples=40, deadline=None)
@given(edge_lists, st.integers(0, 2**32 - 1))
def test_maximal_set_dominates_graph(case, seed):
    n, edges = case
    g = graph(n, edges)
    x = np.random.default_rng(seed).integers(0, 2, n)
    s = repair_independent_set(g, x)
    members = set(s.members)
    for v in range(n):
        if v not in members:
            assert any(u in members for u in g.neighbors(v))


def test_mis_ground_state_fourteen_vertices():
    rng = np.random.default_rng(14)
    pairs = list(itertools.combinations(range(14), 2))
    edges = [pairs[k] for k in rng.choice(len(pairs), 25, replace=False)]
    g = graph(14, edges)
    xs = all_binary(14).astype(float)
    qp = mis_qubo(g)
    energies = np.einsum("ki,ij,kj->k", xs, qp.q, xs)
    best = xs[np.argmin(energies)]
    assert energies.min() == -max_independent_set_size(14, edges)
    validate_independent_set(g, best.astype(int))
