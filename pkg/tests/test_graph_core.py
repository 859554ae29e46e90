"""
Generators and exact oracles, checked on hand-worked instances and against networkx
"""

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from models import Graph
from services.errors import ConfigError, GeneratorError, InvalidGraphError, MissingDataError
from services.graph_core import (
    color_connectivity_instance,
    connected_components,
    count_induced_subgraphs,
    diameter,
    generate,
    generate_cycles,
    generate_erdos_renyi,
    generate_factored,
    generate_grid,
    generate_path,
    generate_regular,
    is_connected,
    is_connected_bfs,
    khop_ball,
    labels_for,
    oracle,
    pattern_graph,
    red_components,
)
from services.tokenizers import node_locality_of_edges
from strategies import graphs


def to_networkx(g: Graph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges)
    return G


class TestGraphModel:
    def test_rejects_self_loop(self):
        with pytest.raises(InvalidGraphError):
            Graph(n=3, edges=((1, 1),))

    def test_rejects_duplicate_edge_in_either_direction(self):
        with pytest.raises(InvalidGraphError):
            Graph(n=3, edges=((0, 1), (1, 0)))

    def test_rejects_out_of_range_endpoint(self):
        with pytest.raises(InvalidGraphError):
            Graph(n=2, edges=((0, 2),))

    def test_rejects_empty_graph(self):
        with pytest.raises(InvalidGraphError):
            Graph(n=0)

    def test_rejects_wrong_color_count(self):
        with pytest.raises(InvalidGraphError):
            Graph(n=3, colors=(0, 1))

    def test_json_roundtrip_keeps_edge_order(self):
        g = Graph(n=4, edges=((2, 3), (0, 1), (1, 2)), colors=(0, 1, 1, 0))
        back = Graph.model_validate_json(g.model_dump_json())
        assert back == g
        assert back.edges == ((2, 3), (0, 1), (1, 2))
        assert back.fingerprint() == g.fingerprint()

    def test_fingerprint_depends_on_edge_order(self):
        a = Graph(n=3, edges=((0, 1), (1, 2)))
        b = Graph(n=3, edges=((1, 2), (0, 1)))
        assert a.fingerprint() != b.fingerprint()


class TestGenerators:
    def test_erdos_renyi_p1_is_complete(self, k3):
        assert generate_erdos_renyi(3, 1.0, seed=0).edges == k3.edges

    def test_erdos_renyi_p0_is_empty(self):
        g = generate_erdos_renyi(5, 0.0, seed=0)
        assert g.n == 5
        assert g.num_edges == 0

    def test_erdos_renyi_is_seed_deterministic(self):
        assert generate_erdos_renyi(10, 0.5, seed=7) == generate_erdos_renyi(10, 0.5, seed=7)

    @pytest.mark.parametrize("p", [-0.1, 1.5])
    def test_erdos_renyi_rejects_bad_probability(self, p):
        with pytest.raises(GeneratorError):
            generate_erdos_renyi(4, p, seed=0)

    def test_regular_4_2_is_c4(self):
        g = generate_regular(4, 2, seed=1)
        assert g.num_edges == 4
        assert list(g.degrees()) == [2, 2, 2, 2]
        assert is_connected(g)

    def test_regular_3_2_is_k3(self, k3):
        assert set(generate_regular(3, 2, seed=3).edges) == set(k3.edges)

    def test_regular_parity_error(self):
        with pytest.raises(GeneratorError):
            generate_regular(5, 3, seed=0)

    @given(n=st.integers(min_value=5, max_value=24), d=st.integers(min_value=2, max_value=4),
           seed=st.integers(min_value=0, max_value=10_000))
    def test_regular_degrees(self, n, d, seed):
        if n * d % 2:
            n += 1
        g = generate_regular(n, d, seed)
        assert all(x == d for x in g.degrees())

    def test_single_cycle_is_connected(self):
        g = generate_cycles(6, split=False, seed=0)
        assert g.num_edges == 6
        assert is_connected(g)

    def test_split_cycles_are_two_triangles(self):
        g = generate_cycles(6, split=True, seed=0)
        assert not is_connected(g)
        assert connected_components(g) == [(0, 1, 2), (3, 4, 5)]
        assert oracle(g, "triangle_count").value == 2

    def test_split_needs_even_n(self):
        with pytest.raises(GeneratorError):
            generate_cycles(7, split=True, seed=0)

    def test_path_coordinates(self):
        g = generate_path(4, coordinates=True)
        assert g.edges == ((0, 1), (1, 2), (2, 3))
        assert g.features == ((0.0,), (1.0,), (2.0,), (3.0,))

    def test_grid_ids_are_row_major(self):
        g = generate_grid(2, 3, coordinates=True)
        assert g.n == 6
        assert g.num_edges == 7
        assert g.features[4] == (1.0, 1.0)
        assert (1, 4) in g.edges

    def test_generate_dispatch_suggests_close_name(self):
        with pytest.raises(ConfigError, match="regular"):
            generate("regulr", seed=0)


class TestColorConnectivity:
    def test_path_of_four_gets_two_red_nodes(self, p4):
        g = color_connectivity_instance(p4, seed=0)
        assert sum(g.colors) == 2

    @given(rows=st.integers(min_value=2, max_value=6), cols=st.integers(min_value=2, max_value=6),
           seed=st.integers(min_value=0, max_value=10_000))
    def test_grid_has_half_red_in_at_most_two_components(self, rows, cols, seed):
        g = color_connectivity_instance(generate_grid(rows, cols), seed)
        assert sum(g.colors) == g.n // 2
        assert red_components(g) in (1, 2)

    def test_disconnected_graph_rejected(self):
        with pytest.raises(InvalidGraphError):
            color_connectivity_instance(generate_cycles(8, split=True, seed=0), seed=0)

    def test_red_components_needs_colors(self, p4):
        with pytest.raises(MissingDataError):
            red_components(p4)


class TestFactored:
    def test_kernel_edge_gives_connected_graph(self, k2):
        g, order = generate_factored(k2, n_prime=8, k=4, seed=0)
        assert is_connected(g)
        assert sorted(order) == list(range(g.num_edges))
        assert g.num_edges == 2 * 8

    def test_missing_kernel_edge_gives_disconnected_graph(self):
        g, _ = generate_factored(Graph(n=2), n_prime=8, k=4, seed=0)
        assert not is_connected(g)

    @given(kernel=graphs(min_nodes=1, max_nodes=5), k=st.integers(min_value=1, max_value=4),
           extra=st.integers(min_value=0, max_value=12), seed=st.integers(min_value=0, max_value=1000))
    def test_blocks_are_k_local_and_follow_kernel(self, kernel, k, extra, seed):
        n_prime = 3 + extra
        g, order = generate_factored(kernel, n_prime, k, seed)
        blocks = [[g.edges[i] for i in order[b:b + n_prime]] for b in range(0, len(order), n_prime)]
        assert len(blocks) == kernel.n * (kernel.n - 1)
        assert all(node_locality_of_edges(block) <= k for block in blocks)
        assert is_connected(g) == is_connected(kernel)

    def test_rejects_tiny_blocks(self, k2):
        with pytest.raises(GeneratorError):
            generate_factored(k2, n_prime=2, k=1, seed=0)


class TestOracles:
    def test_k3_labels(self, k3):
        assert oracle(k3, "triangle_count").value == 1
        assert oracle(k3, "cycle_check").value is True
        assert oracle(k3, "node_degree").value == (2, 2, 2)

    def test_path_labels(self, p4):
        assert oracle(p4, "cycle_check").value is False
        assert oracle(p4, "shortest_path").value[0] == (0, 1, 2, 3)
        assert diameter(p4) == 3

    def test_unreachable_distance_is_minus_one(self):
        assert oracle(Graph(n=2), "shortest_path").value == ((0, -1), (-1, 0))

    def test_color_counts(self):
        g = Graph(n=4, colors=(0, 2, 2, 1))
        assert oracle(g, "color_counts").value == (1, 1, 2)
        assert oracle(g, "color_counts", num_colors=4).value == (1, 1, 2, 0)

    def test_color_counts_need_colors(self, k3):
        with pytest.raises(MissingDataError):
            oracle(k3, "color_counts")

    def test_labels_skip_color_tasks_without_colors(self, p4):
        labels = labels_for(p4)
        assert list(labels) == ["node_degree", "cycle_check", "triangle_count", "connected", "shortest_path"]
        assert labels["connected"] is True

    @given(g=graphs(max_nodes=14))
    def test_connectivity_matches_networkx(self, g):
        expected = nx.is_connected(to_networkx(g))
        assert is_connected(g) == expected
        assert is_connected_bfs(g) == expected

    @given(g=graphs(max_nodes=14))
    def test_triangles_match_networkx(self, g):
        assert oracle(g, "triangle_count").value == sum(nx.triangles(to_networkx(g)).values()) // 3

    @given(g=graphs(max_nodes=10))
    def test_shortest_paths_match_networkx(self, g):
        dist = oracle(g, "shortest_path").value
        lengths = dict(nx.all_pairs_shortest_path_length(to_networkx(g)))
        for u in range(g.n):
            for v in range(g.n):
                assert dist[u][v] == lengths[u].get(v, -1)


class TestPatterns:
    @pytest.mark.parametrize("name, expected", [("triangle", 1), ("path3", 0)])
    def test_counts_on_k3_are_induced(self, k3, name, expected):
        assert count_induced_subgraphs(k3, pattern_graph(name)) == expected

    def test_path3_on_p4(self, p4):
        assert count_induced_subgraphs(p4, pattern_graph("path3")) == 2

    def test_star3_on_star4(self, star4):
        assert count_induced_subgraphs(star4, pattern_graph("star3")) == 4

    def test_khop_ball_includes_centre(self, p4):
        assert khop_ball(p4, 0, 2) == (0, 1, 2)

    @given(g=graphs(max_nodes=12), data=st.data())
    def test_khop_balls_nest(self, g, data):
        v = data.draw(st.integers(min_value=0, max_value=g.n - 1))
        k = data.draw(st.integers(min_value=1, max_value=g.n))
        inner, outer = khop_ball(g, v, k - 1), khop_ball(g, v, k)
        assert set(inner) <= set(outer)
        assert list(outer) == sorted(outer)
