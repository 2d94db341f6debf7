import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qesa.exceptions import MISBudgetExceeded
from qesa.graph import (Graph, approximation_ratio, as_config, average_degree,
                        brute_force_mis_size, build_unit_disk_edges, exact_mis,
                        generate_kings_graph, hamming_distance, is_independent, load_graph,
                        maximum_independent_sets, min_hamming_to_set, save_graph, to_bitstring,
                        violating_edges)


def path3():
    return Graph.from_edges(3, [(0, 1), (1, 2)])


def complete(n):
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
    return Graph.from_edges(n, edges)


def pairwise_mis(graph):
    # independent oracle: itertools over subsets, largest first
    for size in range(graph.n, 0, -1):
        for subset in itertools.combinations(range(graph.n), size):
            s = set(subset)
            if not any(i in s and j in s for i, j in graph.edges):
                return size
    return 0


class TestKingsGraph:
    def test_full_3x3(self):
        g = generate_kings_graph(3, 3, 1.0, 6.0, seed=1)
        assert g.n == 9
        assert g.n_edges == 20
        assert g.kind == "kings"

    def test_lateral_and_diagonal_split(self):
        g = generate_kings_graph(3, 3, 1.0, 6.0)
        lengths = [math.dist(g.positions[i], g.positions[j]) for i, j in g.edges]
        assert sum(np.isclose(lengths, 6.0)) == 12
        assert sum(np.isclose(lengths, 6.0 * math.sqrt(2))) == 8

    def test_single_site(self):
        g = generate_kings_graph(1, 1, 1.0, 6.0)
        assert (g.n, g.n_edges) == (1, 0)

    def test_2x2_is_k4(self):
        g = generate_kings_graph(2, 2, 1.0, 5.3)
        assert g.n_edges == 6

    def test_no_distance_two_edges(self):
        g = generate_kings_graph(1, 3, 1.0, 6.0)
        assert g.edges == ((0, 1), (1, 2))

    def test_fill_count_and_seed(self):
        a = generate_kings_graph(5, 5, 0.6, 6.0, seed=3)
        b = generate_kings_graph(5, 5, 0.6, 6.0, seed=3)
        assert a.n == math.ceil(0.6 * 25)
        assert np.array_equal(a.positions, b.positions) and a.edges == b.edges

    def test_empty_graph_error(self):
        with pytest.raises(ValueError, match="empty graph"):
            generate_kings_graph(3, 3, 0.0)

    def test_bad_dimensions(self):
        with pytest.raises(ValueError):
            generate_kings_graph(0, 3)
        with pytest.raises(ValueError):
            generate_kings_graph(2, 2, 1.0, -1.0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 6), st.floats(0.2, 1.0), st.integers(0, 10**6))
    def test_edges_match_threshold(self, rows, cols, fill, seed):
        g = generate_kings_graph(rows, cols, fill, 6.0, seed=seed)
        for i, j in itertools.combinations(range(g.n), 2):
            d = math.dist(g.positions[i], g.positions[j])
            assert ((i, j) in g.edges) == (d <= g.blockade_radius)


class TestUnitDisk:
    def test_blockaded_pair(self):
        assert build_unit_disk_edges([[0, 0], [5.3, 0]], 7.5).n_edges == 1

    def test_far_pair(self):
        assert build_unit_disk_edges([[0, 0], [20, 0]], 7.5).n_edges == 0

    def test_collinear_path(self):
        g = build_unit_disk_edges([[0, 0], [6, 0], [12, 0]], 7.5)
        assert g.edges == ((0, 1), (1, 2))

    def test_duplicate_positions(self):
        with pytest.raises(ValueError, match="duplicate"):
            build_unit_disk_edges([[0, 0], [0, 0]], 1.0)

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            build_unit_disk_edges([[0, 0]], 0.0)


class TestGraphValidation:
    def test_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            Graph.from_edges(2, [(1, 1)])

    def test_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            Graph.from_edges(2, [(0, 2)])

    def test_edges_canonical(self):
        g = Graph.from_edges(3, [(2, 1), (1, 0), (0, 1)])
        assert g.edges == ((0, 1), (1, 2))

    def test_round_trip(self, tmp_path):
        g = generate_kings_graph(4, 4, 0.7, 6.0, seed=5)
        save_graph(g, tmp_path / "g.json", provenance={"x": 1})
        h = load_graph(tmp_path / "g.json")
        assert h.edges == g.edges and np.array_equal(h.positions, g.positions)
        assert h.seed == 5 and h.kind == "kings"

    def test_tampered_edges_rejected(self, tmp_path):
        g = generate_kings_graph(3, 3)
        data = g.to_dict()
        data["edges"] = data["edges"][:-1]
        with pytest.raises(ValueError, match="predicate"):
            Graph.from_dict(data)

    def test_json_keys(self, tmp_path):
        save_graph(generate_kings_graph(2, 2), tmp_path / "g.json")
        data = json.loads((tmp_path / "g.json").read_text())
        assert set(data) == {"kind", "n", "positions", "edges", "blockade_radius", "seed"}


class TestMetrics:
    def test_violations(self):
        assert violating_edges(complete(4), [0, 0, 0, 0]) == 0
        assert violating_edges(complete(4), [1, 1, 1, 1]) == 6
        assert violating_edges(cycle(5), [1, 0, 1, 0, 1]) == 1

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            violating_edges(cycle(5), [1, 0])

    def test_alpha_examples(self):
        c5 = cycle(5)
        assert approximation_ratio(c5, [1, 0, 1, 0, 1], 2) == 1.0
        assert approximation_ratio(c5, [0] * 5, 2) == 0.0
        assert approximation_ratio(complete(4), [1, 1, 1, 1], 1) == -2.0

    def test_alpha_zero_mis(self):
        with pytest.raises(ValueError):
            approximation_ratio(cycle(5), [0] * 5, 0)

    def test_hamming_examples(self):
        assert hamming_distance("10110", "10011") == 2
        assert hamming_distance([1, 0, 1], [0, 1, 0]) == 3
        with pytest.raises(ValueError):
            hamming_distance("10", "101")

    @given(st.lists(st.integers(0, 1), min_size=6, max_size=6),
           st.lists(st.integers(0, 1), min_size=6, max_size=6),
           st.lists(st.integers(0, 1), min_size=6, max_size=6))
    def test_hamming_is_metric(self, a, b, c):
        assert hamming_distance(a, b) == hamming_distance(b, a)
        assert (hamming_distance(a, b) == 0) == (a == b)
        assert hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c)

    def test_average_degree(self):
        assert average_degree(complete(4)) == 3.0
        assert average_degree(generate_kings_graph(1, 1)) == 0.0
        assert average_degree(generate_kings_graph(3, 3)) == pytest.approx(40 / 9)

    def test_bitstring_round_trip(self):
        x = as_config("0110")
        assert x.dtype == np.int8 and to_bitstring(x) == "0110"
        with pytest.raises(ValueError):
            as_config("012")

    def test_min_hamming(self):
        assert min_hamming_to_set("1100", ["0011", "1101"]) == 1


class TestExactMis:
    def test_path(self):
        cert = exact_mis(path3())
        assert cert.size == 2 and to_bitstring(cert.witness) == "101"

    def test_complete(self):
        assert exact_mis(complete(4)).size == 1

    def test_kings_3x3_corners(self):
        cert = exact_mis(generate_kings_graph(3, 3))
        assert cert.size == 4
        assert brute_force_mis_size(generate_kings_graph(3, 3)) == 4

    def test_empty_graph(self):
        assert exact_mis(Graph.from_edges(4, [])).size == 4

    @pytest.mark.parametrize("seed", range(20))
    def test_against_subset_oracle(self, seed):
        g = random_graph(11, 0.3, seed)
        cert = exact_mis(g)
        assert cert.size == pairwise_mis(g) == brute_force_mis_size(g)
        assert is_independent(g, cert.witness)
        assert approximation_ratio(g, cert.witness, cert.size) == 1.0

    @pytest.mark.parametrize("seed", range(5))
    def test_kings_against_brute_force(self, seed):
        g = generate_kings_graph(5, 5, 0.8, 6.0, seed=seed)
        assert exact_mis(g).size == brute_force_mis_size(g)

    def test_budget(self):
        g = random_graph(60, 0.1, 0)
        with pytest.raises(MISBudgetExceeded, match="budget exceeded"):
            exact_mis(g, node_budget=5)

    def test_size_limit(self):
        with pytest.raises(ValueError):
            exact_mis(generate_kings_graph(13, 13), max_vertices=150)

    def test_larger_kings(self):
        # 10x10 full King's lattice: one site per 2x2 block
        assert exact_mis(generate_kings_graph(10, 10)).size == 25

    def test_enumeration(self):
        sets = maximum_independent_sets(cycle(5))
        assert len(sets) == 5
        assert all(s.sum() == 2 and is_independent(cycle(5), s) for s in sets)
        assert len(maximum_independent_sets(generate_kings_graph(3, 3))) == 1
