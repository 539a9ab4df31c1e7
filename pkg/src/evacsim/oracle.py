"""Exhaustive time-expanded check for the time-dependent search.

``brute_force_exit_arrival`` re-implements the documented hop-cost rule
literally (per-tick window scans, no label-setting, no early pruning) over
the explicit (vertex, tick) grid, so it stays an independent check of the
search in :mod:`evacsim.routing`. ``random_instance`` builds small random
graphs with random recorded queues and monotone hazard series;
``run_oracle_check`` compares the two implementations instance by
instance and reports any disagreement.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass

from .config import FireParams, SimParams
from .routing import OccupancyTimeline
from .scenario import BuildingGraph, Edge, Vertex
from . import routing


@dataclass
class OracleInstance:
    seed: int
    graph: BuildingGraph
    timeline: OccupancyTimeline
    start: int
    t0: int
    params: SimParams
    t_max: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "vertices": [
                    {
                        "id": v.id,
                        "kind": v.kind,
                        "departure_rate": v.departure_rate,
                    }
                    for v in sorted(self.graph.vertices.values(), key=lambda v: v.id)
                ],
                "edges": [
                    {"u": e.u, "v": e.v, "length": e.length, "kind": e.kind}
                    for e in self.graph.edges
                ],
                "queues": {str(v): self.timeline._queues[v] for v in sorted(self.graph.vertices)},
                "hazard": {str(v): self.timeline._hazard[v] for v in sorted(self.graph.vertices)},
                "horizon": self.timeline.horizon,
                "start": self.start,
                "t0": self.t0,
                "t_max": self.t_max,
                "walking_speed": self.params.walking_speed,
                "lethal_threshold": self.params.fire.lethal_threshold,
                "hazard_penalty": self.params.hazard_penalty,
            },
            indent=2,
        )


def brute_force_exit_arrival(
    graph: BuildingGraph,
    timeline: OccupancyTimeline,
    start: int,
    t0: int,
    params: SimParams,
    t_max: int,
) -> int | None:
    """Earliest exit-arrival tick by exhaustive time-expanded reachability."""
    threshold = params.fire.lethal_threshold
    if graph.is_exit(start):
        return t0 if timeline.hazard_at(start, t0) < threshold else None
    states: dict[int, set[int]] = {t0: {start}}
    for tick in range(t0, t_max + 1):
        here = states.get(tick)
        if not here:
            continue
        if any(graph.is_exit(v) for v in here):
            return tick
        for u in sorted(here):
            rate = graph.vertex(u).departure_rate
            wait = math.floor((timeline.queue_at(u, tick) / rate) / params.tick_seconds + 1e-9)
            decide = max(1, math.ceil(1.0 / params.tick_seconds - 1e-9))
            depart = tick + decide + wait
            if any(
                timeline.hazard_at(u, step) >= threshold
                for step in range(tick, depart + 1)
            ):
                continue
            for w in graph.neighbors(u):
                edge = graph.edge_between(u, w)
                mean = (timeline.hazard_at(u, depart) + timeline.hazard_at(w, depart)) / 2.0
                eff = edge.length if mean == 0.0 else edge.length + params.hazard_penalty * mean * edge.length
                cross = max(
                    1,
                    math.ceil((eff / params.walking_speed) / params.tick_seconds - 1e-9),
                )
                arrive = depart + cross
                if arrive > t_max:
                    continue
                if any(
                    (timeline.hazard_at(u, step) + timeline.hazard_at(w, step)) / 2.0 >= threshold
                    for step in range(depart + 1, arrive + 1)
                ):
                    continue
                if graph.is_exit(w) and timeline.hazard_at(w, arrive) >= threshold:
                    continue
                states.setdefault(arrive, set()).add(w)
    return None


def random_instance(seed: int) -> OracleInstance:
    """Random small instance: <= 8 vertices, horizon <= 20 ticks."""
    rng = random.Random(seed)
    n = rng.randint(2, 8)
    exit_count = 1 if n < 4 else rng.randint(1, 2)
    exit_ids = set(rng.sample(range(n), exit_count))
    vertices = [
        Vertex(
            id=i,
            kind="exit" if i in exit_ids else rng.choice(("room", "corridor")),
            departure_rate=rng.choice((0.5, 1.0, 2.0)),
        )
        for i in range(n)
    ]
    edges: dict[tuple[int, int], Edge] = {}
    for i in range(1, n):
        j = rng.randrange(i)
        edges[(j, i)] = Edge(j, i, float(rng.randint(1, 20)), rng.choice(("corridor", "doorway", "staircase")))
    for _ in range(rng.randint(0, n)):
        a, b = rng.sample(range(n), 2)
        key = (min(a, b), max(a, b))
        if key not in edges:
            edges[key] = Edge(key[0], key[1], float(rng.randint(1, 20)), "corridor")
    graph = BuildingGraph(vertices, edges.values())

    horizon = rng.randint(0, 20)
    queues: dict[int, list[int]] = {}
    hazard: dict[int, list[float]] = {}
    for vid in range(n):
        queues[vid] = [rng.randint(0, 5) if rng.random() < 0.7 else 0 for _ in range(horizon + 1)]
        series = [0.0] * (horizon + 1)
        if rng.random() < 0.5:
            onset = rng.randint(0, horizon)
            step = rng.choice((0.05, 0.1, 0.25, 0.5))
            level = step
            for tick in range(onset, horizon + 1):
                series[tick] = min(1.0, level)
                level += step
        hazard[vid] = series
    timeline = OccupancyTimeline(queues, hazard, horizon)

    params = SimParams(
        walking_speed=rng.choice((0.7, 1.0, 1.4, 2.0)),
        tick_seconds=rng.choice((0.5, 1.0, 1.0, 2.0)),
        hazard_penalty=1000.0,
        fire=FireParams(lethal_threshold=rng.choice((0.5, 0.7, 0.9))),
    )
    start = rng.choice(sorted(set(range(n)) - exit_ids))
    return OracleInstance(
        seed=seed,
        graph=graph,
        timeline=timeline,
        start=start,
        t0=rng.randint(0, 3),
        params=params,
        t_max=horizon + 60,
    )


@dataclass
class OracleMismatch:
    seed: int
    search_tick: int | None
    brute_tick: int | None
    instance: OracleInstance


def run_oracle_check(count: int, seed: int) -> tuple[int, list[OracleMismatch]]:
    """Compare the search against brute force on ``count`` seeded instances."""
    mismatches: list[OracleMismatch] = []
    for index in range(count):
        inst = random_instance(seed * 1_000_003 + index)
        found = routing.td_dijkstra(
            inst.graph, inst.timeline, inst.start, inst.t0, inst.params, t_max=inst.t_max
        )
        search_tick = None if found is None else found.exit_arrival_tick
        brute_tick = brute_force_exit_arrival(
            inst.graph, inst.timeline, inst.start, inst.t0, inst.params, inst.t_max
        )
        if search_tick != brute_tick:
            mismatches.append(OracleMismatch(inst.seed, search_tick, brute_tick, inst))
    return count, mismatches
