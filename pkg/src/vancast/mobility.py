"""Trip schedules and vehicle motion.

Each vehicle gets a one-day schedule: a Poisson-distributed number of
trips at uniformly random times, chained so every trip starts where
the previous one ended.  Between trips the vehicle is parked and (by
default) invisible to the radio layer.  Motion along a route is
piecewise linear at a single constant speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from vancast.roadnet import (
    RoadGraph,
    Route,
    main_road_route,
    random_route,
    shortest_path,
)

DAY_LEN = 86_400.0


class ScheduleError(ValueError):
    """Raised when no destination satisfies the trip constraints."""


class Phase(Enum):
    PARKED = "parked"
    EN_ROUTE = "en_route"


@dataclass(frozen=True)
class Trip:
    depart_time: float  # seconds from schedule start
    route: Route


@dataclass(frozen=True)
class TripSchedule:
    """All trips of one vehicle for one day, sorted by departure."""

    vehicle_id: int
    trips: tuple[Trip, ...]

    def __post_init__(self):
        departs = [t.depart_time for t in self.trips]
        if departs != sorted(departs):
            raise ValueError("trips must be sorted by departure time")
        for prev, nxt in zip(self.trips, self.trips[1:]):
            if prev.route.dst != nxt.route.src:
                raise ValueError(
                    f"vehicle {self.vehicle_id}: trip starting at "
                    f"{nxt.depart_time:.0f}s does not start where the "
                    f"previous trip ended"
                )

    @property
    def final_node(self) -> int | None:
        """Where the vehicle rests after its last trip (None if no trips)."""
        if not self.trips:
            return None
        return self.trips[-1].route.dst


@dataclass
class VehicleState:
    """Mutable per-vehicle simulation state."""

    vehicle_id: int
    phase: Phase
    node: int  # current node when parked, route origin otherwise
    route: Route | None = None
    distance: float = 0.0  # meters travelled along the current route
    seg: int = 0  # index of the current route segment
    next_trip: int = 0  # index into the schedule's trip tuple
    is_seed: bool = False


def _pick_destination(
    g: RoadGraph, origin: int, max_trip_dist: float, rng: np.random.Generator
) -> int:
    """Uniform choice among nodes within (0, max_trip_dist] of origin."""
    candidates = g.nodes_within(origin, max_trip_dist)
    if not candidates:
        raise ScheduleError(
            f"no destination within {max_trip_dist:g} m of node {origin}"
        )
    return candidates[int(rng.integers(len(candidates)))]


def _route_for_policy(
    g: RoadGraph, src: int, dst: int, policy: str, rng: np.random.Generator
) -> Route:
    if policy == "shortest":
        return shortest_path(g, src, dst)
    if policy == "random":
        return random_route(g, src, dst, rng)
    if policy == "main_road":
        return main_road_route(g, src, dst)
    raise ValueError(f"unknown routing policy {policy!r}")


def assign_trips(
    g: RoadGraph,
    n_vehicles: int,
    mean_trips: float,
    max_trip_dist: float,
    rng: np.random.Generator,
    day_len: float = DAY_LEN,
    policy: str = "random",
    main_road_fraction: float = 0.0,
    start_nodes: list[int] | None = None,
) -> list[TripSchedule]:
    """Draw one day of trips for every vehicle.

    Trip counts are Poisson(mean_trips); departures are uniform over
    [0, day_len) and sorted; each trip's destination is a uniform pick
    from the nodes within road distance max_trip_dist of its origin.
    With main_road_fraction > 0, that share of vehicles (a Bernoulli
    draw per vehicle) routes every trip over the main roads; the rest
    use ``policy``.  Home nodes come from ``start_nodes`` when given
    (letting consecutive days chain), else uniformly at random.
    """
    if n_vehicles < 1:
        raise ValueError(f"need at least one vehicle, got {n_vehicles}")
    if mean_trips < 0:
        raise ValueError(f"mean_trips must be >= 0, got {mean_trips}")
    if not (0.0 <= main_road_fraction <= 1.0):
        raise ValueError(
            f"main_road_fraction must lie in [0, 1], got {main_road_fraction}"
        )
    if start_nodes is not None and len(start_nodes) != n_vehicles:
        raise ValueError(
            f"start_nodes has {len(start_nodes)} entries for "
            f"{n_vehicles} vehicles"
        )
    schedules = []
    for vid in range(n_vehicles):
        if start_nodes is None:
            origin = int(rng.integers(g.n_nodes))
        else:
            origin = start_nodes[vid]
        n_trips = int(rng.poisson(mean_trips))
        departs = np.sort(rng.uniform(0.0, day_len, size=n_trips))
        on_main = main_road_fraction > 0 and rng.random() < main_road_fraction
        trip_policy = "main_road" if on_main else policy
        trips = []
        for depart in departs:
            dst = _pick_destination(g, origin, max_trip_dist, rng)
            route = _route_for_policy(g, origin, dst, trip_policy, rng)
            trips.append(Trip(float(depart), route))
            origin = dst
        schedules.append(TripSchedule(vid, tuple(trips)))
    return schedules


def initial_state(schedule: TripSchedule, home: int) -> VehicleState:
    return VehicleState(schedule.vehicle_id, Phase.PARKED, home)


def advance(
    state: VehicleState,
    schedule: TripSchedule,
    now: float,
    dt: float,
    speed: float,
) -> None:
    """Move one vehicle forward by dt seconds (mutates state).

    At most one phase transition happens per step: a parked vehicle
    whose next departure falls inside (now, now + dt] starts driving
    (late departures start immediately), and a driving vehicle that
    covers the remaining route distance parks at the destination.  A
    vehicle never departs and arrives within the same step.
    """
    if state.phase is Phase.PARKED:
        if state.next_trip >= len(schedule.trips):
            return
        trip = schedule.trips[state.next_trip]
        if trip.depart_time > now + dt:
            return
        state.phase = Phase.EN_ROUTE
        state.route = trip.route
        state.node = trip.route.src
        state.distance = 0.0
        state.seg = 0
        state.next_trip += 1
        return

    route = state.route
    assert route is not None
    state.distance += speed * dt
    if state.distance >= route.total_length:
        state.phase = Phase.PARKED
        state.node = route.dst
        state.route = None
        state.distance = 0.0
        state.seg = 0
        return
    while route.cum_length[state.seg + 1] < state.distance:
        state.seg += 1


def position_of(state: VehicleState, g: RoadGraph) -> tuple[float, float] | None:
    """Planar position of a driving vehicle; None while parked."""
    if state.phase is Phase.PARKED:
        return None
    route = state.route
    assert route is not None
    seg = state.seg
    a = route.nodes[seg]
    b = route.nodes[seg + 1]
    seg_len = route.cum_length[seg + 1] - route.cum_length[seg]
    t = (state.distance - route.cum_length[seg]) / seg_len
    ax, ay = g.node_x[a], g.node_y[a]
    bx, by = g.node_x[b], g.node_y[b]
    return ax + (bx - ax) * t, ay + (by - ay) * t
