"""Road graphs, grid generation, and route selection.

A road network is an undirected weighted graph: nodes are
intersections with planar coordinates, edges are road segments with a
positive length in meters.  Edges carry a ``main`` flag marking
high-capacity roads; routing policies can prefer those.

All route selection is deterministic for a given graph and random
state.  Ties inside Dijkstra are broken toward the smaller node id, so
two runs of the same experiment walk identical paths.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Edge:
    """Undirected road segment between intersections a and b."""

    edge_id: int
    a: int
    b: int
    length: float
    main: bool = False

    def other(self, node: int) -> int:
        if node == self.a:
            return self.b
        if node == self.b:
            return self.a
        raise ValueError(f"node {node} is not an endpoint of edge {self.edge_id}")


class RoadGraph:
    """Immutable-by-convention road network with cached routing tables."""

    def __init__(self, xs: list[float], ys: list[float], edges: list[Edge]):
        if len(xs) != len(ys):
            raise ValueError("coordinate lists differ in length")
        if len(xs) == 0:
            raise ValueError("graph needs at least one node")
        if len(edges) == 0:
            raise ValueError("graph needs at least one edge")
        self.node_x = list(xs)
        self.node_y = list(ys)
        self.edges = list(edges)
        n = len(xs)
        self.adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for e in self.edges:
            if not (0 <= e.a < n and 0 <= e.b < n):
                raise ValueError(f"edge {e.edge_id} references missing node")
            if e.a == e.b:
                raise ValueError(f"edge {e.edge_id} is a self-loop")
            if e.length <= 0:
                raise ValueError(f"edge {e.edge_id} has non-positive length")
            self.adjacency[e.a].append((e.b, e.edge_id))
            self.adjacency[e.b].append((e.a, e.edge_id))
        for nbrs in self.adjacency:
            nbrs.sort()
        self._dist_cache: dict[int, np.ndarray] = {}

    @property
    def n_nodes(self) -> int:
        return len(self.node_x)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def node_pos(self, node: int) -> tuple[float, float]:
        return self.node_x[node], self.node_y[node]

    def dijkstra(self, src: int, weights: list[float] | None = None) -> np.ndarray:
        """Distances from src to every node.  Unreachable nodes get inf.

        With default weights the result is memoized on the graph; custom
        weight vectors (used for perturbed routing) are never cached.
        """
        if weights is None and src in self._dist_cache:
            return self._dist_cache[src]
        w = [e.length for e in self.edges] if weights is None else weights
        dist = np.full(self.n_nodes, np.inf)
        dist[src] = 0.0
        heap = [(0.0, src)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v, eid in self.adjacency[u]:
                nd = d + w[eid]
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        if weights is None:
            self._dist_cache[src] = dist
        return dist

    def nodes_within(self, src: int, max_dist: float) -> list[int]:
        """Nodes at positive road distance <= max_dist from src, sorted."""
        dist = self.dijkstra(src)
        out = np.flatnonzero((dist > 0) & (dist <= max_dist))
        return [int(v) for v in out]


@dataclass(frozen=True)
class Route:
    """A node path with its edge ids and cumulative length profile."""

    nodes: tuple[int, ...]
    edge_ids: tuple[int, ...]
    cum_length: tuple[float, ...]  # cum_length[i] = meters up to nodes[i]

    def __post_init__(self):
        if len(self.nodes) != len(self.edge_ids) + 1:
            raise ValueError("route needs exactly one more node than edges")
        if len(self.cum_length) != len(self.nodes):
            raise ValueError("cumulative length profile has wrong size")

    @property
    def total_length(self) -> float:
        return self.cum_length[-1]

    @property
    def src(self) -> int:
        return self.nodes[0]

    @property
    def dst(self) -> int:
        return self.nodes[-1]


def _walk_route(
    g: RoadGraph, src: int, dst: int, dist_from_dst: np.ndarray, weights: list[float]
) -> Route:
    """Rebuild the path src->dst from a distance field rooted at dst.

    At each node take the neighbor that lies exactly on a shortest
    path (dist[u] == weight + dist[v]); neighbors are scanned in node
    id order so ties resolve identically on every run.
    """
    if not np.isfinite(dist_from_dst[src]):
        raise ValueError(f"no path from {src} to {dst}")
    nodes = [src]
    edge_ids: list[int] = []
    cum = [0.0]
    u = src
    guard = g.n_nodes + 1
    while u != dst:
        for v, eid in g.adjacency[u]:
            if dist_from_dst[u] == weights[eid] + dist_from_dst[v]:
                true_len = g.edges[eid].length
                nodes.append(v)
                edge_ids.append(eid)
                cum.append(cum[-1] + true_len)
                u = v
                break
        else:
            raise RuntimeError(f"distance field inconsistent at node {u}")
        guard -= 1
        if guard < 0:
            raise RuntimeError("route reconstruction did not terminate")
    return Route(tuple(nodes), tuple(edge_ids), tuple(cum))


def shortest_path(g: RoadGraph, src: int, dst: int) -> Route:
    """Deterministic shortest route by road length."""
    _check_endpoints(g, src, dst)
    if src == dst:
        return Route((src,), (), (0.0,))
    weights = [e.length for e in g.edges]
    return _walk_route(g, src, dst, g.dijkstra(dst), weights)


def random_route(
    g: RoadGraph,
    src: int,
    dst: int,
    rng: np.random.Generator,
    max_factor: float = 3.0,
) -> Route:
    """Shortest path under per-trip random edge weight inflation.

    Every edge length is multiplied by an independent uniform draw from
    [1, max_factor] before running the search, which spreads traffic
    over near-shortest alternatives while keeping routes loop-free.
    ``max_factor=1`` degenerates to :func:`shortest_path` exactly.
    The reported route lengths always use the true edge lengths.
    """
    _check_endpoints(g, src, dst)
    if max_factor < 1.0:
        raise ValueError(f"max_factor must be >= 1, got {max_factor}")
    if src == dst:
        return Route((src,), (), (0.0,))
    factors = rng.uniform(1.0, max_factor, size=g.n_edges)
    weights = [e.length * f for e, f in zip(g.edges, factors)]
    dist = g.dijkstra(dst, weights)
    return _walk_route(g, src, dst, dist, weights)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def main_road_route(g: RoadGraph, src: int, dst: int) -> Route:
    """Route that detours over the main-road subnetwork.

    Three legs: shortest path from src onto the nearest main-road
    component, a main-roads-only traversal, then off to dst.  The exit
    point is the component node nearest dst, so the middle leg can be
    empty when entry and exit coincide.  A graph with no main edges
    falls back to the plain shortest path (logged once per call).
    """
    _check_endpoints(g, src, dst)
    main_edges = [e for e in g.edges if e.main]
    if not main_edges:
        log.warning("graph has no main roads; falling back to shortest path")
        return shortest_path(g, src, dst)
    if src == dst:
        return Route((src,), (), (0.0,))

    uf = _UnionFind(g.n_nodes)
    for e in main_edges:
        uf.union(e.a, e.b)
    main_nodes = sorted({e.a for e in main_edges} | {e.b for e in main_edges})

    # Nearest main component to src: compare by entry distance, break
    # ties toward the smaller node id.
    dist_src = g.dijkstra(src)
    entry = min(main_nodes, key=lambda v: (dist_src[v], v))
    if not np.isfinite(dist_src[entry]):
        log.warning("main roads unreachable from node %d; using shortest path", src)
        return shortest_path(g, src, dst)
    comp = uf.find(entry)
    comp_nodes = [v for v in main_nodes if uf.find(v) == comp]

    dist_dst = g.dijkstra(dst)
    exit_ = min(comp_nodes, key=lambda v: (dist_dst[v], v))

    legs = [shortest_path(g, src, entry)]
    if entry != exit_:
        legs.append(_main_only_path(g, entry, exit_))
    legs.append(shortest_path(g, exit_, dst))

    nodes: list[int] = [src]
    edge_ids: list[int] = []
    cum: list[float] = [0.0]
    for leg in legs:
        for i, eid in enumerate(leg.edge_ids):
            nodes.append(leg.nodes[i + 1])
            edge_ids.append(eid)
            cum.append(cum[-1] + g.edges[eid].length)
    return Route(tuple(nodes), tuple(edge_ids), tuple(cum))


def _main_only_path(g: RoadGraph, src: int, dst: int) -> Route:
    """Shortest path using main edges only (endpoints must share a
    main component)."""
    big = float("inf")
    weights = [e.length if e.main else big for e in g.edges]
    dist = np.full(g.n_nodes, np.inf)
    dist[dst] = 0.0
    heap = [(0.0, dst)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, eid in g.adjacency[u]:
            if not g.edges[eid].main:
                continue
            nd = d + weights[eid]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    if not np.isfinite(dist[src]):
        raise RuntimeError(f"nodes {src} and {dst} share no main-road component")
    # Reuse the deterministic walk, but only along main edges.
    nodes = [src]
    edge_ids: list[int] = []
    cum = [0.0]
    u = src
    while u != dst:
        for v, eid in g.adjacency[u]:
            if g.edges[eid].main and dist[u] == weights[eid] + dist[v]:
                nodes.append(v)
                edge_ids.append(eid)
                cum.append(cum[-1] + g.edges[eid].length)
                u = v
                break
        else:
            raise RuntimeError(f"main-road distance field inconsistent at {u}")
    return Route(tuple(nodes), tuple(edge_ids), tuple(cum))


def _check_endpoints(g: RoadGraph, src: int, dst: int):
    for name, v in (("src", src), ("dst", dst)):
        if not (0 <= v < g.n_nodes):
            raise ValueError(f"{name} node {v} outside graph with {g.n_nodes} nodes")


def generate_manhattan_grid(
    rows: int,
    cols: int,
    block_len: float,
    main_cols: list[int] | None = None,
) -> RoadGraph:
    """Regular grid of rows x cols intersections, block_len meters apart.

    Node id layout is row-major (id = row * cols + col).  Horizontal
    edges are numbered first, then vertical.  Vertical edges in the
    columns listed in main_cols are flagged as main roads, which models
    a handful of north-south arterials crossing the grid.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"grid needs rows, cols >= 1, got {rows}x{cols}")
    if rows == 1 and cols == 1:
        raise ValueError("a 1x1 grid has no edges")
    if block_len <= 0:
        raise ValueError(f"block_len must be positive, got {block_len}")
    main_set = set(main_cols or [])
    for c in main_set:
        if not (0 <= c < cols):
            raise ValueError(f"main column {c} outside 0..{cols - 1}")

    xs, ys = [], []
    for r in range(rows):
        for c in range(cols):
            xs.append(c * block_len)
            ys.append(r * block_len)

    edges: list[Edge] = []
    for r in range(rows):
        for c in range(cols - 1):
            a = r * cols + c
            edges.append(Edge(len(edges), a, a + 1, block_len, main=False))
    for r in range(rows - 1):
        for c in range(cols):
            a = r * cols + c
            edges.append(Edge(len(edges), a, a + cols, block_len, main=c in main_set))
    return RoadGraph(xs, ys, edges)


def save_road_graph(g: RoadGraph, path: str):
    """Write the line-oriented road graph format.

    Layout: a ``nodes N edges E`` header, one ``node id x y`` line per
    node, one ``edge id a b length main`` line per edge (main is 0/1).
    Lines starting with ``#`` are comments.
    """
    with open(path, "w") as fh:
        fh.write(f"nodes {g.n_nodes} edges {g.n_edges}\n")
        for i in range(g.n_nodes):
            fh.write(f"node {i} {g.node_x[i]:g} {g.node_y[i]:g}\n")
        for e in g.edges:
            fh.write(
                f"edge {e.edge_id} {e.a} {e.b} {e.length:g} {1 if e.main else 0}\n"
            )


def load_road_graph(path: str) -> RoadGraph:
    """Parse the format written by :func:`save_road_graph`.

    Raises ValueError naming the offending line number for malformed
    input: bad header, wrong field counts, ids out of order, counts
    that do not match the header, or non-positive edge lengths.
    """
    with open(path) as fh:
        lines = fh.readlines()

    def bad(lineno: int, why: str):
        raise ValueError(f"{path}:{lineno}: {why}")

    content = [
        (i + 1, ln.strip())
        for i, ln in enumerate(lines)
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not content:
        raise ValueError(f"{path}: empty road graph file")
    lineno, header = content[0]
    parts = header.split()
    if len(parts) != 4 or parts[0] != "nodes" or parts[2] != "edges":
        bad(lineno, f"expected 'nodes N edges E' header, got {header!r}")
    try:
        n_nodes, n_edges = int(parts[1]), int(parts[3])
    except ValueError:
        bad(lineno, "header counts are not integers")
    if n_nodes < 1 or n_edges < 1:
        bad(lineno, "graph needs at least one node and one edge")
    if len(content) != 1 + n_nodes + n_edges:
        raise ValueError(
            f"{path}: header promises {n_nodes} nodes and {n_edges} edges "
            f"but file has {len(content) - 1} record lines"
        )

    xs = [0.0] * n_nodes
    ys = [0.0] * n_nodes
    for idx in range(n_nodes):
        lineno, ln = content[1 + idx]
        parts = ln.split()
        if len(parts) != 4 or parts[0] != "node":
            bad(lineno, f"expected 'node id x y', got {ln!r}")
        try:
            nid, x, y = int(parts[1]), float(parts[2]), float(parts[3])
        except ValueError:
            bad(lineno, f"malformed node line {ln!r}")
        if nid != idx:
            bad(lineno, f"node ids must be sequential; expected {idx}, got {nid}")
        xs[nid], ys[nid] = x, y

    edges: list[Edge] = []
    for idx in range(n_edges):
        lineno, ln = content[1 + n_nodes + idx]
        parts = ln.split()
        if len(parts) != 6 or parts[0] != "edge":
            bad(lineno, f"expected 'edge id a b length main', got {ln!r}")
        try:
            eid, a, b = int(parts[1]), int(parts[2]), int(parts[3])
            length, main = float(parts[4]), int(parts[5])
        except ValueError:
            bad(lineno, f"malformed edge line {ln!r}")
        if eid != idx:
            bad(lineno, f"edge ids must be sequential; expected {idx}, got {eid}")
        if not (0 <= a < n_nodes and 0 <= b < n_nodes):
            bad(lineno, f"edge endpoints {a},{b} outside 0..{n_nodes - 1}")
        if length <= 0:
            bad(lineno, f"edge length must be positive, got {length}")
        if main not in (0, 1):
            bad(lineno, f"main flag must be 0 or 1, got {main}")
        edges.append(Edge(eid, a, b, length, bool(main)))
    return RoadGraph(xs, ys, edges)
