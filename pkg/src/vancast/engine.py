"""Discrete-time simulation core: contacts, chunk exchange, main loop.

Each step advances vehicle motion, finds radio contacts with a uniform
spatial hash, moves coded chunks across every contact within the link
budget, flags newly completed vehicles, and samples the completion
count.  All randomness flows through one generator, so a (config,
seed) pair reproduces a run bit for bit.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from vancast.config import ExperimentConfig
from vancast.mobility import (
    DAY_LEN,
    Phase,
    Trip,
    TripSchedule,
    VehicleState,
    advance,
    assign_trips,
    initial_state,
    position_of,
)
from vancast.roadnet import RoadGraph, generate_manhattan_grid, load_road_graph


class ChunkStore:
    """The set of coded chunk ids one vehicle holds."""

    def __init__(self, n_chunks: int):
        if n_chunks < 1:
            raise ValueError(f"n_chunks must be >= 1, got {n_chunks}")
        self.n_chunks = n_chunks
        self.mask = np.zeros(n_chunks, dtype=bool)
        self.count = 0
        self.completed_at: float | None = None

    def add(self, chunk_id: int) -> bool:
        """Add one chunk id; returns True if it was new."""
        if self.mask[chunk_id]:
            return False
        self.mask[chunk_id] = True
        self.count += 1
        return True

    def add_all(self):
        self.mask[:] = True
        self.count = self.n_chunks

    def has(self, chunk_id: int) -> bool:
        return bool(self.mask[chunk_id])

    def ids(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.mask)]


@dataclass(frozen=True)
class Contact:
    """An unordered vehicle pair within radio range (a < b)."""

    a: int
    b: int
    distance: float


def detect_contacts(
    positions: dict[int, tuple[float, float]], comm_range: float
) -> list[Contact]:
    """All pairs at Euclidean distance <= comm_range, sorted by (a, b).

    Bins positions into a grid of comm_range-sized cells; candidate
    pairs then only come from the same or adjacent cells, so cost stays
    near-linear in vehicle count at typical densities.
    """
    if comm_range <= 0:
        raise ValueError(f"comm_range must be positive, got {comm_range}")
    cells: dict[tuple[int, int], list[int]] = {}
    for vid, (x, y) in positions.items():
        key = (math.floor(x / comm_range), math.floor(y / comm_range))
        cells.setdefault(key, []).append(vid)

    out: list[Contact] = []

    def try_pair(u: int, v: int):
        ux, uy = positions[u]
        vx, vy = positions[v]
        d = math.hypot(ux - vx, uy - vy)
        if d <= comm_range:
            a, b = (u, v) if u < v else (v, u)
            out.append(Contact(a, b, d))

    # Visit each unordered cell pair once: same cell, plus a fixed
    # half of the eight neighbors.
    half = ((1, 0), (1, 1), (0, 1), (-1, 1))
    for (cx, cy), vids in cells.items():
        for i in range(len(vids)):
            for j in range(i + 1, len(vids)):
                try_pair(vids[i], vids[j])
        for dx, dy in half:
            other = cells.get((cx + dx, cy + dy))
            if other:
                for u in vids:
                    for v in other:
                        try_pair(u, v)
    out.sort(key=lambda c: (c.a, c.b))
    return out


def exchange(
    store_a: ChunkStore,
    store_b: ChunkStore,
    budget_ab: int,
    budget_ba: int,
    rng: np.random.Generator,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Transfer up to budget chunks in each direction of one contact.

    Each side offers the chunk ids the other is missing; when the
    surplus exceeds the budget, the subset actually sent is a uniform
    draw without replacement.  Both directions are computed from the
    pre-exchange stores, so a chunk received this instant is not
    immediately re-offered back.
    """
    if budget_ab < 0 or budget_ba < 0:
        raise ValueError("budgets must be >= 0")
    if store_a.n_chunks != store_b.n_chunks:
        raise ValueError("stores disagree on the chunk universe")
    surplus_ab = np.flatnonzero(store_a.mask & ~store_b.mask)
    surplus_ba = np.flatnonzero(store_b.mask & ~store_a.mask)

    def pick(surplus: np.ndarray, budget: int) -> np.ndarray:
        if budget == 0 or surplus.size == 0:
            return surplus[:0]
        if surplus.size <= budget:
            return surplus
        return np.sort(rng.choice(surplus, size=budget, replace=False))

    sent_ab = pick(surplus_ab, budget_ab)
    sent_ba = pick(surplus_ba, budget_ba)
    if sent_ab.size:
        store_b.mask[sent_ab] = True
        store_b.count += int(sent_ab.size)
    if sent_ba.size:
        store_a.mask[sent_ba] = True
        store_a.count += int(sent_ba.size)
    return tuple(int(i) for i in sent_ab), tuple(int(i) for i in sent_ba)


def provision_seeds(
    stores: list[ChunkStore], seed_rate: float, rng: np.random.Generator
) -> list[int]:
    """Give a random seed_rate share of vehicles the full chunk set.

    The seed count rounds half-up, with a floor of one whenever the
    rate is positive, so tiny rates on small fleets still seed someone.
    Returns the sorted seed vehicle ids; their stores are filled and
    marked complete at t=0.
    """
    if not (0.0 <= seed_rate <= 1.0):
        raise ValueError(f"seed_rate must lie in [0, 1], got {seed_rate}")
    n = len(stores)
    n_seeds = int(n * seed_rate + 0.5)
    if seed_rate > 0 and n_seeds == 0:
        n_seeds = 1
    n_seeds = min(n_seeds, n)
    if n_seeds == 0:
        return []
    vids = sorted(int(v) for v in rng.choice(n, size=n_seeds, replace=False))
    for vid in vids:
        stores[vid].add_all()
        stores[vid].completed_at = 0.0
    return vids


@dataclass
class Metrics:
    """Completion counts sampled on a fixed time grid."""

    sample_interval: float
    samples: list[tuple[float, int]] = field(default_factory=list)

    def record(self, t: float, completed: int):
        if self.samples and abs(self.samples[-1][0] - t) < 1e-9:
            self.samples[-1] = (t, completed)
        else:
            self.samples.append((t, completed))


def time_to_fraction(metrics: Metrics, frac: float, n_vehicles: int) -> float | None:
    """First time the completed fraction reaches frac, or None.

    Interpolates linearly between the two samples that straddle the
    threshold, since completion counts only move on sample boundaries.
    """
    if not (0.0 < frac <= 1.0):
        raise ValueError(f"frac must lie in (0, 1], got {frac}")
    target = frac * n_vehicles
    prev_t, prev_c = None, None
    for t, c in metrics.samples:
        if c >= target:
            if prev_t is None or prev_c >= target:
                return t
            return prev_t + (target - prev_c) / (c - prev_c) * (t - prev_t)
        prev_t, prev_c = t, c
    return None


def write_metrics_csv(metrics: Metrics, n_vehicles: int, path: str):
    """Write time_s,completed_count,completed_fraction rows."""
    with open(path, "w", newline="") as fh:
        fh.write("time_s,completed_count,completed_fraction\n")
        for t, c in metrics.samples:
            fh.write(f"{t:g},{c},{c / n_vehicles:.6f}\n")


@dataclass
class SimState:
    """Everything a running simulation owns."""

    cfg: ExperimentConfig
    graph: RoadGraph
    rng: np.random.Generator
    states: list[VehicleState]
    schedules: list[TripSchedule]
    stores: list[ChunkStore]
    seeds: list[int]
    metrics: Metrics
    clock: float = 0.0
    completed_count: int = 0
    day: int = 0
    enroute: set[int] = field(default_factory=set)
    depart_heap: list[tuple[float, int]] = field(default_factory=list)
    accum: dict[tuple[int, int], list[float]] = field(default_factory=dict)
    next_sample: float = 0.0


def build_graph(cfg: ExperimentConfig) -> RoadGraph:
    if cfg.graph_file:
        return load_road_graph(cfg.graph_file)
    return generate_manhattan_grid(cfg.rows, cfg.cols, cfg.block_len, cfg.main_cols)


def _shift_schedule(schedule: TripSchedule, offset: float) -> TripSchedule:
    if offset == 0.0:
        return schedule
    return TripSchedule(
        schedule.vehicle_id,
        tuple(Trip(t.depart_time + offset, t.route) for t in schedule.trips),
    )


def _new_day(state: SimState):
    """Replace every schedule with a fresh day of trips.

    Vehicles start the new day wherever they rest: their parked node,
    or the destination of a route still being driven.  Trips of the old
    day that never departed are dropped.
    """
    cfg = state.cfg
    starts = []
    for vs in state.states:
        if vs.phase is Phase.EN_ROUTE:
            assert vs.route is not None
            starts.append(vs.route.dst)
        else:
            starts.append(vs.node)
    day_start = state.day * DAY_LEN
    fresh = assign_trips(
        state.graph,
        cfg.n_vehicles,
        cfg.mean_trips,
        cfg.max_trip_dist,
        state.rng,
        policy=cfg.routing_policy,
        main_road_fraction=cfg.main_road_fraction,
        start_nodes=starts,
    )
    state.schedules = [_shift_schedule(s, day_start) for s in fresh]
    state.depart_heap = []
    for vs in state.states:
        vs.next_trip = 0
        if vs.phase is Phase.PARKED and state.schedules[vs.vehicle_id].trips:
            heapq.heappush(
                state.depart_heap,
                (state.schedules[vs.vehicle_id].trips[0].depart_time, vs.vehicle_id),
            )


def init_sim(cfg: ExperimentConfig, graph: RoadGraph | None = None) -> SimState:
    """Build the initial simulation state for a configuration."""
    cfg.validate()
    g = graph if graph is not None else build_graph(cfg)
    rng = np.random.default_rng(cfg.master_seed)
    n = cfg.n_vehicles

    stores = [ChunkStore(cfg.n_chunks) for _ in range(n)]
    seeds = provision_seeds(stores, cfg.seed_rate, rng)

    homes = [int(v) for v in rng.integers(g.n_nodes, size=n)]
    state = SimState(
        cfg=cfg,
        graph=g,
        rng=rng,
        states=[],
        schedules=[],
        stores=stores,
        seeds=seeds,
        metrics=Metrics(cfg.sample_interval),
        completed_count=len(seeds),
    )
    state.schedules = assign_trips(
        g,
        n,
        cfg.mean_trips,
        cfg.max_trip_dist,
        rng,
        policy=cfg.routing_policy,
        main_road_fraction=cfg.main_road_fraction,
        start_nodes=homes,
    )
    state.states = [initial_state(state.schedules[vid], homes[vid]) for vid in range(n)]
    for vid in range(n):
        if state.schedules[vid].trips:
            heapq.heappush(
                state.depart_heap, (state.schedules[vid].trips[0].depart_time, vid)
            )
    state.metrics.record(0.0, state.completed_count)
    state.next_sample = cfg.sample_interval
    return state


def step(state: SimState, dt: float):
    """Advance the simulation by one time step of dt seconds."""
    cfg = state.cfg
    now = state.clock
    horizon = now + dt

    # Departures due this step.  A vehicle departing now stands at its
    # origin until the next step but already takes part in contacts.
    departed_now: set[int] = set()
    while state.depart_heap and state.depart_heap[0][0] <= horizon:
        _, vid = heapq.heappop(state.depart_heap)
        vs = state.states[vid]
        if vs.phase is not Phase.PARKED:
            continue
        advance(vs, state.schedules[vid], now, dt, cfg.speed)
        if vs.phase is Phase.EN_ROUTE:
            state.enroute.add(vid)
            departed_now.add(vid)

    # Motion for everyone already on the road.
    arrived: list[int] = []
    for vid in sorted(state.enroute):
        if vid in departed_now:
            continue
        vs = state.states[vid]
        advance(vs, state.schedules[vid], now, dt, cfg.speed)
        if vs.phase is Phase.PARKED:
            arrived.append(vid)
    for vid in arrived:
        state.enroute.discard(vid)
        sched = state.schedules[vid]
        vs = state.states[vid]
        if vs.next_trip < len(sched.trips):
            heapq.heappush(
                state.depart_heap, (sched.trips[vs.next_trip].depart_time, vid)
            )

    # Radio layer.
    positions: dict[int, tuple[float, float]] = {}
    for vid in sorted(state.enroute):
        pos = position_of(state.states[vid], state.graph)
        if pos is not None:
            positions[vid] = pos
    if cfg.parked_exchange:
        for vs in state.states:
            if vs.phase is Phase.PARKED and vs.vehicle_id not in positions:
                positions[vs.vehicle_id] = state.graph.node_pos(vs.node)

    contacts = detect_contacts(positions, cfg.comm_range)

    wire_bytes = 4 + cfg.symbol_size()
    chunks_per_s = cfg.transfer_rate / (8.0 * wire_bytes)
    degree: dict[int, int] = {}
    if cfg.share_bandwidth:
        for c in contacts:
            degree[c.a] = degree.get(c.a, 0) + 1
            degree[c.b] = degree.get(c.b, 0) + 1

    new_accum: dict[tuple[int, int], list[float]] = {}
    touched: set[int] = set()
    for c in contacts:
        key = (c.a, c.b)
        acc = state.accum.get(key, [0.0, 0.0])
        gain = chunks_per_s * dt
        if cfg.share_bandwidth:
            acc[0] += gain / degree[c.a]
            acc[1] += gain / degree[c.b]
        else:
            acc[0] += gain
            acc[1] += gain
        n_ab = int(acc[0])
        n_ba = int(acc[1])
        acc[0] -= n_ab
        acc[1] -= n_ba
        new_accum[key] = acc
        if n_ab or n_ba:
            sent_ab, sent_ba = exchange(
                state.stores[c.a], state.stores[c.b], n_ab, n_ba, state.rng
            )
            if sent_ab:
                touched.add(c.b)
            if sent_ba:
                touched.add(c.a)
    state.accum = new_accum

    for vid in sorted(touched):
        store = state.stores[vid]
        if store.completed_at is None and store.count >= cfg.decode_threshold:
            store.completed_at = horizon
            state.completed_count += 1

    state.clock = horizon
    while state.next_sample <= state.clock + 1e-9:
        state.metrics.record(state.next_sample, state.completed_count)
        state.next_sample += cfg.sample_interval


def run(cfg: ExperimentConfig, graph: RoadGraph | None = None) -> SimState:
    """Run a full simulation and return the final state.

    The day boundary re-rolls every trip schedule (vehicles keep their
    location across days), and the metrics always include a final
    sample at sim_duration.
    """
    state = init_sim(cfg, graph)
    dt = cfg.dt
    eps = 1e-9
    while state.clock < cfg.sim_duration - eps:
        while (
            state.clock >= (state.day + 1) * DAY_LEN - eps
            and state.clock < cfg.sim_duration - eps
        ):
            state.day += 1
            _new_day(state)
        step_dt = min(dt, cfg.sim_duration - state.clock)
        step(state, step_dt)
    if not state.metrics.samples or state.metrics.samples[-1][0] < state.clock - eps:
        state.metrics.record(state.clock, state.completed_count)
    return state
