"""Tour of the road network layer: grids, files, and the three routing styles.

Run:  python3 demos/road_network.py
"""

import numpy as np

from vancast.roadnet import (
    generate_manhattan_grid,
    load_road_graph,
    main_road_route,
    random_route,
    save_road_graph,
    shortest_path,
)


def describe(label, route):
    path = " -> ".join(str(n) for n in route.nodes[:8])
    if len(route.nodes) > 8:
        path += " ..."
    print(f"  {label:<22} {route.total_length:7.0f} m  {path}")


g = generate_manhattan_grid(10, 10, 200.0, main_cols=[2, 5, 8])
print(f"10x10 grid: {g.n_nodes} nodes, {len(g.edges)} edges, "
      f"{sum(e.main for e in g.edges)} main-road edges")

# The file format round-trips, so hand-edited maps work too.
save_road_graph(g, "/tmp/demo_grid.txt")
g = load_road_graph("/tmp/demo_grid.txt")

src, dst = 0, 99  # opposite corners
rng = np.random.default_rng(3)
print(f"\nthree ways from node {src} to node {dst}:")
describe("shortest", shortest_path(g, src, dst))
for i in range(3):
    describe(f"randomized #{i + 1}", random_route(g, src, dst, rng))
describe("via main roads", main_road_route(g, src, dst))

# Randomized detours are bounded: with max_factor=1 the draw collapses
# back to the exact shortest path.
exact = random_route(g, src, dst, rng, max_factor=1.0)
assert exact.total_length == shortest_path(g, src, dst).total_length
print("\nmax_factor=1 reproduces the shortest path, as promised")
