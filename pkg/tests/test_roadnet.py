"""Road network tests: grid construction, file format, routing."""

import logging
import math

import numpy as np
import pytest

from vancast.roadnet import (
    Edge,
    RoadGraph,
    Route,
    generate_manhattan_grid,
    load_road_graph,
    main_road_route,
    random_route,
    save_road_graph,
    shortest_path,
)


def floyd_warshall(g):
    """Dense all-pairs shortest distances, independent of the package."""
    n = g.n_nodes
    dist = [[math.inf] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0.0
    for e in g.edges:
        dist[e.a][e.b] = min(dist[e.a][e.b], e.length)
        dist[e.b][e.a] = min(dist[e.b][e.a], e.length)
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            if dik == math.inf:
                continue
            di = dist[i]
            for j in range(n):
                alt = dik + dk[j]
                if alt < di[j]:
                    di[j] = alt
    return dist


def check_route_wellformed(g, route, src, dst):
    assert route.src == src
    assert route.dst == dst
    assert len(route.nodes) == len(route.edge_ids) + 1
    assert route.cum_length[0] == 0.0
    for i, eid in enumerate(route.edge_ids):
        e = g.edges[eid]
        assert {route.nodes[i], route.nodes[i + 1]} == {e.a, e.b}
        assert route.cum_length[i + 1] == pytest.approx(
            route.cum_length[i] + e.length
        )


# --- grid generation --------------------------------------------------------


def test_grid_counts_reference_layout():
    g = generate_manhattan_grid(10, 10, 200.0, [2, 5, 8])
    assert g.n_nodes == 100
    assert g.n_edges == 180
    assert sum(1 for e in g.edges if e.main) == 27  # 9 rows x 3 columns


@pytest.mark.parametrize("rows", [1, 2, 3, 7, 12])
@pytest.mark.parametrize("cols", [1, 2, 5, 12])
def test_grid_counts_closed_form(rows, cols):
    if rows == 1 and cols == 1:
        with pytest.raises(ValueError):
            generate_manhattan_grid(rows, cols, 100.0)
        return
    g = generate_manhattan_grid(rows, cols, 100.0)
    assert g.n_nodes == rows * cols
    assert g.n_edges == rows * (cols - 1) + (rows - 1) * cols


def test_grid_coordinates_and_ids():
    g = generate_manhattan_grid(3, 4, 50.0)
    # row-major ids: node (row 2, col 3) is 2*4+3
    assert g.node_pos(11) == (150.0, 100.0)
    assert g.node_pos(0) == (0.0, 0.0)


def test_grid_main_flags_only_on_vertical_edges():
    g = generate_manhattan_grid(4, 4, 100.0, main_cols=[1])
    for e in g.edges:
        if e.main:
            # vertical edges connect ids differing by a full row
            assert abs(e.a - e.b) == 4
            assert e.a % 4 == 1
    assert sum(1 for e in g.edges if e.main) == 3


def test_grid_argument_validation():
    with pytest.raises(ValueError):
        generate_manhattan_grid(0, 5, 100.0)
    with pytest.raises(ValueError):
        generate_manhattan_grid(5, 5, 0.0)
    with pytest.raises(ValueError):
        generate_manhattan_grid(5, 5, 100.0, main_cols=[5])


def test_graph_validation():
    with pytest.raises(ValueError):
        RoadGraph([0.0], [0.0], [])  # no edges
    with pytest.raises(ValueError):
        RoadGraph([0.0, 1.0], [0.0, 0.0], [Edge(0, 0, 0, 5.0)])  # self-loop
    with pytest.raises(ValueError):
        RoadGraph([0.0, 1.0], [0.0, 0.0], [Edge(0, 0, 7, 5.0)])  # bad node
    with pytest.raises(ValueError):
        RoadGraph([0.0, 1.0], [0.0, 0.0], [Edge(0, 0, 1, -2.0)])


# --- file format -------------------------------------------------------------


def test_save_load_roundtrip(tmp_path):
    g = generate_manhattan_grid(5, 7, 123.5, [0, 6])
    path = tmp_path / "grid.txt"
    save_road_graph(g, str(path))
    h = load_road_graph(str(path))
    assert h.n_nodes == g.n_nodes
    assert h.n_edges == g.n_edges
    assert h.node_x == g.node_x
    assert h.node_y == g.node_y
    assert h.edges == g.edges


def test_load_accepts_comments_and_blank_lines(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text(
        "# tiny triangle\n"
        "nodes 3 edges 3\n"
        "\n"
        "node 0 0 0\n"
        "node 1 100 0\n"
        "node 2 0 100\n"
        "# edges below\n"
        "edge 0 0 1 100 0\n"
        "edge 1 1 2 141.4 1\n"
        "edge 2 2 0 100 0\n"
    )
    g = load_road_graph(str(path))
    assert g.n_nodes == 3
    assert g.edges[1].main is True


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("bogus header\n", "header"),
        ("nodes 2 edges 1\nnode 0 0 0\nnode 5 1 1\nedge 0 0 1 10 0\n", "sequential"),
        ("nodes 2 edges 1\nnode 0 0 0\nnode 1 1 1\nedge 0 0 1 -3 0\n", "positive"),
        ("nodes 2 edges 1\nnode 0 0 0\nnode 1 1 1\nedge 0 0 1 10 7\n", "main flag"),
        ("nodes 2 edges 1\nnode 0 0 0\nnode 1 1 1\nedge 0 0 9 10 0\n", "outside"),
        ("nodes 2 edges 2\nnode 0 0 0\nnode 1 1 1\nedge 0 0 1 10 0\n", "record lines"),
        ("", "empty"),
    ],
)
def test_load_rejects_malformed_files(tmp_path, text, fragment):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(ValueError) as err:
        load_road_graph(str(path))
    assert fragment in str(err.value)


def test_load_error_names_line_number(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("nodes 2 edges 1\nnode 0 0 0\nnode one 1 1\nedge 0 0 1 10 0\n")
    with pytest.raises(ValueError) as err:
        load_road_graph(str(path))
    assert ":3:" in str(err.value)


# --- shortest paths ----------------------------------------------------------


def test_shortest_path_matches_floyd_warshall():
    rng = np.random.default_rng(42)
    g = generate_manhattan_grid(5, 6, 100.0)
    # perturb the lengths so paths are not all degenerate ties
    edges = [
        Edge(e.edge_id, e.a, e.b, float(rng.uniform(50, 250)), e.main)
        for e in g.edges
    ]
    g = RoadGraph(g.node_x, g.node_y, edges)
    ref = floyd_warshall(g)
    for _ in range(200):
        src = int(rng.integers(g.n_nodes))
        dst = int(rng.integers(g.n_nodes))
        route = shortest_path(g, src, dst)
        check_route_wellformed(g, route, src, dst)
        assert route.total_length == pytest.approx(ref[src][dst])


def test_shortest_path_manhattan_closed_form():
    g = generate_manhattan_grid(8, 8, 150.0)
    for (r1, c1), (r2, c2) in [((0, 0), (7, 7)), ((2, 5), (6, 1)), ((3, 3), (3, 3))]:
        src, dst = r1 * 8 + c1, r2 * 8 + c2
        route = shortest_path(g, src, dst)
        assert route.total_length == pytest.approx(
            150.0 * (abs(r1 - r2) + abs(c1 - c2))
        )


def test_shortest_path_is_deterministic():
    g = generate_manhattan_grid(6, 6, 100.0)
    r1 = shortest_path(g, 0, 35)
    r2 = shortest_path(g, 0, 35)
    assert r1.nodes == r2.nodes
    assert r1.edge_ids == r2.edge_ids


def test_trivial_and_invalid_endpoints():
    g = generate_manhattan_grid(3, 3, 100.0)
    r = shortest_path(g, 4, 4)
    assert r.nodes == (4,)
    assert r.total_length == 0.0
    with pytest.raises(ValueError):
        shortest_path(g, 0, 99)
    with pytest.raises(ValueError):
        shortest_path(g, -1, 0)


def test_no_path_between_components(tmp_path):
    # two disconnected segments
    g = RoadGraph(
        [0.0, 1.0, 5.0, 6.0],
        [0.0] * 4,
        [Edge(0, 0, 1, 1.0), Edge(1, 2, 3, 1.0)],
    )
    with pytest.raises(ValueError):
        shortest_path(g, 0, 3)


# --- randomized routes --------------------------------------------------------


def test_random_route_unit_factor_equals_shortest():
    g = generate_manhattan_grid(5, 5, 100.0)
    rng = np.random.default_rng(3)
    for _ in range(25):
        src = int(rng.integers(25))
        dst = int(rng.integers(25))
        r = random_route(g, src, dst, rng, max_factor=1.0)
        s = shortest_path(g, src, dst)
        assert r.nodes == s.nodes
        assert r.edge_ids == s.edge_ids


def test_random_route_spread_on_uniform_grid():
    """Corner to corner on a 4x4 unit grid: every inflated-weight optimum
    is still a 6-block monotone staircase, but different staircases
    should appear across draws."""
    g = generate_manhattan_grid(4, 4, 100.0)
    rng = np.random.default_rng(11)
    seen = set()
    for _ in range(300):
        r = random_route(g, 0, 15, rng)
        check_route_wellformed(g, r, 0, 15)
        assert r.total_length == pytest.approx(600.0)
        seen.add(r.nodes)
    assert len(seen) >= 2
    assert len(seen) <= 20  # C(6, 3) monotone staircases exist


def test_random_route_reports_true_lengths():
    rng = np.random.default_rng(8)
    g = generate_manhattan_grid(6, 6, 100.0)
    for _ in range(50):
        src = int(rng.integers(36))
        dst = int(rng.integers(36))
        r = random_route(g, src, dst, rng)
        s = shortest_path(g, src, dst)
        assert r.total_length >= s.total_length - 1e-9
        # cumulative profile must use true edge lengths, not inflated ones
        for i, eid in enumerate(r.edge_ids):
            step = r.cum_length[i + 1] - r.cum_length[i]
            assert step == pytest.approx(g.edges[eid].length)


def test_random_route_same_seed_same_route():
    g = generate_manhattan_grid(5, 5, 100.0)
    a = random_route(g, 0, 24, np.random.default_rng(77))
    b = random_route(g, 0, 24, np.random.default_rng(77))
    assert a.nodes == b.nodes


def test_random_route_rejects_bad_factor():
    g = generate_manhattan_grid(3, 3, 100.0)
    with pytest.raises(ValueError):
        random_route(g, 0, 8, np.random.default_rng(0), max_factor=0.5)


# --- main-road routing ---------------------------------------------------------


def test_main_road_route_uses_main_edges_in_middle():
    g = generate_manhattan_grid(10, 10, 200.0, [2, 5, 8])
    route = main_road_route(g, 0, 99)
    check_route_wellformed(g, route, 0, 99)
    # between first and last main-edge use, the route must stay on main roads
    flags = [g.edges[eid].main for eid in route.edge_ids]
    assert any(flags)
    first = flags.index(True)
    last = len(flags) - 1 - flags[::-1].index(True)
    assert all(flags[first : last + 1])


def test_main_road_route_visits_a_main_node_even_on_detour():
    g = generate_manhattan_grid(6, 6, 100.0, main_cols=[3])
    main_nodes = {e.a for e in g.edges if e.main} | {e.b for e in g.edges if e.main}
    # src and dst both sit left of the arterial, so this is a pure detour
    route = main_road_route(g, 0, 30)
    assert main_nodes & set(route.nodes)
    assert route.total_length >= shortest_path(g, 0, 30).total_length


def test_main_road_route_without_main_edges_falls_back(caplog):
    g = generate_manhattan_grid(4, 4, 100.0, main_cols=[])
    with caplog.at_level(logging.WARNING, logger="vancast.roadnet"):
        route = main_road_route(g, 1, 14)
    assert route.nodes == shortest_path(g, 1, 14).nodes
    assert any("falling back" in rec.message for rec in caplog.records)


def test_main_road_route_endpoints_on_main():
    g = generate_manhattan_grid(6, 6, 100.0, main_cols=[2])
    # both endpoints already on the arterial: route should just ride it
    route = main_road_route(g, 2, 32)
    assert all(g.edges[eid].main for eid in route.edge_ids)
    assert route.total_length == pytest.approx(500.0)


# --- misc graph queries --------------------------------------------------------


def test_nodes_within_excludes_self_and_sorts():
    g = generate_manhattan_grid(5, 5, 100.0)
    near = g.nodes_within(12, 100.0)
    assert near == [7, 11, 13, 17]
    assert g.nodes_within(12, 50.0) == []
    everywhere = g.nodes_within(12, 10_000.0)
    assert len(everywhere) == 24


def test_dijkstra_cache_does_not_leak_into_custom_weights():
    g = generate_manhattan_grid(4, 4, 100.0)
    base = g.dijkstra(0)
    heavy = g.dijkstra(0, [1000.0] * g.n_edges)
    assert base[15] == pytest.approx(600.0)
    assert heavy[15] == pytest.approx(6000.0)
    assert g.dijkstra(0)[15] == pytest.approx(600.0)


def test_route_shape_validation():
    with pytest.raises(ValueError):
        Route((0, 1), (), (0.0, 1.0))
    with pytest.raises(ValueError):
        Route((0, 1), (0,), (0.0,))
