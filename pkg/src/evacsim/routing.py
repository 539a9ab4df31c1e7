"""Shortest-path machinery: static hazard-aware Dijkstra, a
time-dependent earliest-arrival search over recorded timelines, and the
reassignment procedure that re-routes simulated casualties.

The time-dependent search works on (vertex, arrival-tick) states because
recorded queue lengths are not FIFO-consistent over time: arriving later
at a vertex can yield an earlier departure, so per-vertex labels would be
wrong. Crossing edge (u, w) after arriving at u at tick ``t`` costs

    depart = t + decision + floor(queue(u, t) / rate(u))  (one-second
             decision, discretized up, plus the queueing delay)
    arrive = depart + ceil(effective_length / speed)      (traversal)

with the effective length evaluated against the hazard recorded at the
departure tick. A state is admissible only if u stays below the lethal
threshold for the whole presence window [t, depart], the edge's mean
intensity stays below it over (depart, arrive], and a lethal exit is
never entered. Recorded hazard must be non-decreasing per vertex (always
true for recorded fires), which reduces the window checks to
first-lethal-tick comparisons.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Mapping

from .config import SimParams
from .engine import Counters, Timeline, decision_ticks, queue_delay_ticks, traversal_ticks
from .hazard import HazardField, effective_length
from .scenario import BuildingGraph, Scenario, exit_distances

__all__ = [
    "TimedPath",
    "OccupancyTimeline",
    "effective_length",
    "dsp_route",
    "td_dijkstra",
    "reassign_perished",
    "DspPolicy",
]


@dataclass(frozen=True)
class TimedPath:
    """A vertex sequence with the tick each vertex is reached."""

    steps: tuple[tuple[int, int], ...]  # (vertex id, arrival tick)
    total_time: float  # seconds from start to exit arrival

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.steps)

    @property
    def exit_arrival_tick(self) -> int:
        return self.steps[-1][1]

    def validate(self, graph: BuildingGraph) -> None:
        if not graph.is_exit(self.steps[-1][0]):
            raise ValueError("timed path must end at an exit")
        for (u, tu), (w, tw) in zip(self.steps, self.steps[1:]):
            if w not in graph.adjacency[u]:
                raise ValueError(f"non-adjacent step {u}->{w}")
            if tw <= tu:
                raise ValueError("arrival ticks must strictly increase")


class OccupancyTimeline:
    """Recorded queue/hazard series plus committed route occupancies.

    Reads beyond the recorded horizon repeat the final tick's values.
    Committed occupancies are kept as sparse deltas so extrapolation never
    leaks a committed presence past its own window.
    """

    def __init__(
        self,
        queue_counts: Mapping[int, list[int]],
        hazard: Mapping[int, list[float]],
        horizon: int,
    ):
        if horizon < 0:
            raise ValueError("timeline must cover at least tick 0")
        self._queues = queue_counts
        self._hazard = hazard
        self.horizon = horizon
        self._delta: dict[tuple[int, int], int] = {}
        self._vertex_lethal_from: dict[float, dict[int, int]] = {}
        self._edge_lethal_from: dict[float, dict[tuple[int, int], int]] = {}

    @classmethod
    def from_timeline(cls, timeline: Timeline) -> "OccupancyTimeline":
        return cls(timeline.queue_counts, timeline.hazard, timeline.horizon)

    def queue_at(self, vid: int, tick: int) -> int:
        base = self._queues[vid][min(tick, self.horizon)]
        return base + self._delta.get((vid, tick), 0)

    def hazard_at(self, vid: int, tick: int) -> float:
        return self._hazard[vid][min(tick, self.horizon)]

    def add_presence(self, vid: int, tick: int) -> None:
        key = (vid, tick)
        self._delta[key] = self._delta.get(key, 0) + 1

    # -- lethal-window masks -------------------------------------------------

    def vertex_lethal_from(self, threshold: float) -> dict[int, int]:
        """First tick each vertex reaches the threshold (inf if never)."""
        cached = self._vertex_lethal_from.get(threshold)
        if cached is not None:
            return cached
        table: dict[int, int] = {}
        for vid, series in self._hazard.items():
            first = math.inf
            prev = -math.inf
            for tick, value in enumerate(series):
                if value < prev:
                    raise ValueError(
                        f"recorded hazard must be non-decreasing (vertex {vid})"
                    )
                prev = value
                if value >= threshold:
                    first = tick
                    break
            table[vid] = first
        self._vertex_lethal_from[threshold] = table
        return table

    def edge_lethal_from(
        self, graph: BuildingGraph, threshold: float
    ) -> dict[tuple[int, int], int]:
        """First tick each edge's mean endpoint intensity reaches the threshold."""
        cached = self._edge_lethal_from.get(threshold)
        if cached is not None:
            return cached
        table: dict[tuple[int, int], int] = {}
        for edge in graph.edges:
            hu = self._hazard[edge.u]
            hv = self._hazard[edge.v]
            first = math.inf
            for tick in range(self.horizon + 1):
                if (hu[tick] + hv[tick]) / 2.0 >= threshold:
                    first = tick
                    break
            table[edge.key] = first
        self._edge_lethal_from[threshold] = table
        return table

    def commit_timed_path(self, path: TimedPath, graph: BuildingGraph, params: SimParams) -> None:
        """Add the path's planned vertex occupancies to the working timeline.

        Each non-exit step occupies its vertex from the arrival tick until
        the tick before departure, with the departure recomputed exactly as
        the search computed it.
        """
        for vid, arrival in path.steps:
            if graph.is_exit(vid):
                continue
            rate = graph.vertex(vid).departure_rate
            depart = arrival + decision_ticks(params.tick_seconds) + queue_delay_ticks(
                self.queue_at(vid, arrival), rate, params.tick_seconds
            )
            for tick in range(arrival, depart):
                self.add_presence(vid, tick)


# ---------------------------------------------------------------------------
# Static hazard-aware Dijkstra (congestion-blind baseline)


def dsp_route(
    graph: BuildingGraph,
    field: HazardField,
    start: int,
    penalty: float,
    counters: Counters | None = None,
) -> list[int] | None:
    """Minimal-effective-length path from ``start`` to the nearest exit.

    Ties break toward smaller vertex ids. Returns ``None`` when no exit is
    reachable (a trapped evacuee keeps its position).
    """
    if start not in graph.vertices:
        raise ValueError(f"unknown vertex {start}")
    if graph.is_exit(start):
        return [start]
    dist: dict[int, float] = {start: 0.0}
    parent: dict[int, int] = {}
    heap: list[tuple[float, int]] = [(0.0, start)]
    settled: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        if graph.is_exit(u):
            path = [u]
            while path[-1] != start:
                path.append(parent[path[-1]])
            path.reverse()
            return path
        for w in graph.neighbors(u):
            if w in settled:
                continue
            if counters is not None:
                counters.bump("edge_relax")
            nd = d + effective_length(graph.edge_between(u, w), field, penalty)
            if nd < dist.get(w, math.inf) or (
                nd == dist.get(w, math.inf) and u < parent.get(w, u + 1)
            ):
                dist[w] = nd
                parent[w] = u
                heapq.heappush(heap, (nd, w))
    return None


# ---------------------------------------------------------------------------
# Time-dependent earliest-arrival search


def default_search_bound(graph: BuildingGraph, timeline: OccupancyTimeline, params: SimParams) -> int:
    """Arrival-tick cap for the time-dependent search."""
    max_safe_ticks = max(
        traversal_ticks(e.length, params.walking_speed, params.tick_seconds)
        for e in graph.edges
    )
    return timeline.horizon + max(200, 2 * len(graph) * (1 + max_safe_ticks))


def td_dijkstra(
    graph: BuildingGraph,
    timeline: OccupancyTimeline,
    start: int,
    t0: int,
    params: SimParams,
    t_max: int | None = None,
    counters: Counters | None = None,
) -> TimedPath | None:
    """Earliest exit arrival over the recorded timeline; None if unsavable.

    Label-setting over (vertex, arrival tick) states with the cost rule
    and lethal-window masks described in the module docstring. Results are
    bit-reproducible: the heap orders by (tick, vertex, discovery index)
    and neighbours expand in sorted order.
    """
    if start not in graph.vertices:
        raise ValueError(f"unknown vertex {start}")
    threshold = params.fire.lethal_threshold
    v_lethal = timeline.vertex_lethal_from(threshold)
    e_lethal = timeline.edge_lethal_from(graph, threshold)
    cap = default_search_bound(graph, timeline, params) if t_max is None else t_max

    if graph.is_exit(start):
        if timeline.hazard_at(start, t0) >= threshold:
            return None
        return TimedPath(((start, t0),), 0.0)

    seq = 0
    heap: list[tuple[int, int, int]] = [(t0, start, seq)]
    parent: dict[tuple[int, int], tuple[int, int] | None] = {(start, t0): None}
    settled: set[tuple[int, int]] = set()

    goal: tuple[int, int] | None = None
    while heap:
        tick, u, _ = heapq.heappop(heap)
        state = (u, tick)
        if state in settled:
            continue
        settled.add(state)
        if graph.is_exit(u):
            goal = state
            break
        rate = graph.vertex(u).departure_rate
        depart = tick + decision_ticks(params.tick_seconds) + queue_delay_ticks(
            timeline.queue_at(u, tick), rate, params.tick_seconds
        )
        # Presence window [tick, depart] must stay below the threshold.
        if depart >= v_lethal[u]:
            continue
        hu = timeline.hazard_at(u, depart)
        for w in graph.neighbors(u):
            if counters is not None:
                counters.bump("edge_relax")
            edge = graph.edge_between(u, w)
            mean = (hu + timeline.hazard_at(w, depart)) / 2.0
            eff = edge.length if mean == 0.0 else edge.length * (1.0 + params.hazard_penalty * mean)
            arrive = depart + traversal_ticks(eff, params.walking_speed, params.tick_seconds)
            if arrive > cap:
                continue
            # Edge must stay below the threshold over (depart, arrive].
            if arrive >= e_lethal[edge.key]:
                continue
            if graph.is_exit(w) and timeline.hazard_at(w, arrive) >= threshold:
                continue
            nxt = (w, arrive)
            if nxt in parent:
                continue
            parent[nxt] = state
            seq += 1
            heapq.heappush(heap, (arrive, w, seq))

    if goal is None:
        return None
    steps: list[tuple[int, int]] = []
    cursor: tuple[int, int] | None = goal
    while cursor is not None:
        steps.append(cursor)
        cursor = parent[cursor]
    steps.reverse()
    total = (goal[1] - t0) * params.tick_seconds
    return TimedPath(tuple(steps), total)


# ---------------------------------------------------------------------------
# Reassignment of simulated casualties


def reassign_perished(
    outcome,
    scenario: Scenario,
    update_timeline: bool = True,
    counters: Counters | None = None,
    t_max: int | None = None,
) -> dict[int, TimedPath | None]:
    """Compute repair routes for every evacuee that perished in ``outcome``.

    Casualties are processed in ascending order of static distance from
    their initial position to the nearest exit (ties by evacuee id); each
    committed route's planned occupancies feed the queue terms of the
    remaining ones unless ``update_timeline`` is disabled. ``None`` marks
    an unsavable evacuee.
    """
    graph = scenario.graph
    working = OccupancyTimeline.from_timeline(outcome.timeline)
    distances = exit_distances(graph)
    perished = sorted(
        (eid for eid, rec in outcome.evacuees.items() if rec.status == "perished"),
        key=lambda eid: (distances[outcome.evacuees[eid].realized_path[0][0]], eid),
    )
    result: dict[int, TimedPath | None] = {}
    for eid in perished:
        origin = outcome.evacuees[eid].realized_path[0][0]
        path = td_dijkstra(
            graph, working, origin, 0, scenario.params, t_max=t_max, counters=counters
        )
        result[eid] = path
        if path is not None and update_timeline:
            working.commit_timed_path(path, graph, scenario.params)
    return result


def timed_path_rows(
    paths: Mapping[int, TimedPath | None]
) -> list[tuple[int, int, int, int]]:
    """Serialize repair routes as (evacuee, step index, vertex, planned tick)."""
    rows = []
    for eid in sorted(paths):
        path = paths[eid]
        if path is None:
            continue
        for index, (vid, tick) in enumerate(path.steps):
            rows.append((eid, index, vid, tick))
    return rows


# ---------------------------------------------------------------------------
# Engine policy


class DspPolicy:
    """Recompute the hazard-aware static shortest path at every decision."""

    def begin_run(self, view) -> None:
        pass

    def on_tick(self, view, tick: int) -> None:
        pass

    def next_hop(self, evacuee_id: int, vertex: int, view, tick: int) -> int | None:
        view.counters.bump("planner_query")
        route = dsp_route(
            view.graph, view.field, vertex, view.params.hazard_penalty, view.counters
        )
        if route is None or len(route) < 2:
            return None
        return route[1]
