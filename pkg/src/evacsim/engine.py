"""Discrete-event evacuation core.

Time advances in fixed ticks (``tick_seconds`` each). Within a tick the
phases run in a fixed order so runs are deterministic:

    hazard step -> deaths -> departures -> arrivals -> decisions -> record

Queueing happens at vertices only: an evacuee arriving at vertex ``v`` at
tick ``t`` behind ``k`` others departs after the one-second decision cost
(discretized up to whole ticks) plus ``floor(k / d)`` ticks of queueing
delay per the vertex's departure rate. Edge traversal takes
``ceil(effective_length / speed)`` ticks, evaluated against the hazard at
the departure tick; an evacuee cannot turn around mid-edge.

Deaths: an evacuee perishes the first tick it occupies a vertex at or
above the lethal threshold, or traverses an edge whose mean endpoint
intensity reaches it. Arriving at a lethal exit kills instead of saving.

An evacuee whose policy returns ``None`` steps aside: it stays at the
vertex (still exposed to fire and counted in the timeline) but stops
blocking the FIFO queue; it is re-asked every tick.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .config import ConfigError, SimParams
from .hazard import (
    HazardField,
    edge_intensity,
    effective_length,
    hazard_step,
    ignite,
    is_lethal,
)
from .scenario import BuildingGraph, Edge, Scenario

QUEUED = "queued"
TRAVERSING = "traversing"
ESCAPED = "escaped"
PERISHED = "perished"


class EngineError(RuntimeError):
    """A routing policy violated its contract (e.g. non-adjacent hop)."""


def queue_delay(n_queued: int, departure_rate: float) -> float:
    """Seconds an evacuee waits behind ``n_queued`` others at a vertex."""
    if departure_rate <= 0.0:
        raise ConfigError(f"nonpositive departure_rate {departure_rate}")
    if n_queued < 0:
        raise ValueError(f"negative queue length {n_queued}")
    return n_queued / departure_rate


def edge_time(effective_length_m: float, walking_speed: float) -> float:
    """Seconds to cross an edge of the given effective length."""
    if walking_speed <= 0.0:
        raise ConfigError(f"nonpositive walking speed {walking_speed}")
    if effective_length_m < 0.0:
        raise ValueError(f"negative effective length {effective_length_m}")
    return effective_length_m / walking_speed


def traversal_ticks(effective_length_m: float, walking_speed: float, tick_seconds: float) -> int:
    """Whole ticks to cross an edge; partial ticks round up, minimum one."""
    seconds = edge_time(effective_length_m, walking_speed)
    return max(1, math.ceil(seconds / tick_seconds - 1e-9))


def queue_delay_ticks(n_queued: int, departure_rate: float, tick_seconds: float) -> int:
    """Whole ticks of queueing delay; partial ticks round down."""
    return math.floor(queue_delay(n_queued, departure_rate) / tick_seconds + 1e-9)


def decision_ticks(tick_seconds: float) -> int:
    """Whole ticks covering the one-second next-direction decision."""
    return max(1, math.ceil(1.0 / tick_seconds - 1e-9))


@dataclass
class Evacuee:
    id: int
    vertex: int  # current vertex when queued; destination when traversing
    status: str = QUEUED
    departure_tick: int | None = None
    edge: Edge | None = None
    arrival_tick: int | None = None
    terminal_tick: int | None = None
    parked: bool = False
    realized_path: list[tuple[int, int]] = field(default_factory=list)


class Timeline:
    """Per-vertex queue length and hazard intensity for every tick."""

    def __init__(self, vertex_ids: Sequence[int]):
        self.vertex_ids = sorted(vertex_ids)
        self.queue_counts: dict[int, list[int]] = {v: [] for v in self.vertex_ids}
        self.hazard: dict[int, list[float]] = {v: [] for v in self.vertex_ids}
        self.horizon = -1

    def record(self, queue_by_vertex: Mapping[int, int], field_: HazardField) -> None:
        for vid in self.vertex_ids:
            self.queue_counts[vid].append(queue_by_vertex.get(vid, 0))
            self.hazard[vid].append(field_.intensity_at(vid))
        self.horizon += 1

    def queue_at(self, vid: int, tick: int) -> int:
        return self.queue_counts[vid][tick]

    def hazard_at(self, vid: int, tick: int) -> float:
        return self.hazard[vid][tick]


@dataclass
class EvacueeRecord:
    id: int
    status: str
    terminal_tick: int | None
    realized_path: tuple[tuple[int, int], ...]
    exchange_count: int  # landmark-vertex arrivals along the realized path


@dataclass
class SimOutcome:
    evacuees: dict[int, EvacueeRecord]
    timeline: Timeline
    total_duration: int  # ticks
    truncated: bool
    instruction_counters: dict[str, int]
    event_log: list[tuple[int, int, str, int]] | None = None

    @property
    def escaped_count(self) -> int:
        return sum(1 for r in self.evacuees.values() if r.status == ESCAPED)

    @property
    def perished_count(self) -> int:
        return sum(1 for r in self.evacuees.values() if r.status == PERISHED)


class Counters(dict):
    """Instruction counters keyed by abstract operation class."""

    def bump(self, key: str, n: int = 1) -> None:
        self[key] = self.get(key, 0) + n


class EngineView:
    """Read access to live run state, handed to routing policies."""

    def __init__(
        self,
        graph: BuildingGraph,
        params: SimParams,
        field_: HazardField,
        occupancy: Mapping[int, int],
        rng: random.Random,
        counters: Counters,
    ):
        self.graph = graph
        self.params = params
        self.field = field_
        self._occupancy = occupancy  # vertex -> evacuees present
        self.rng = rng
        self.counters = counters

    def queue_len(self, vid: int) -> int:
        return self._occupancy.get(vid, 0)

    def occupied_vertices(self) -> list[int]:
        return sorted(vid for vid, n in self._occupancy.items() if n > 0)


class RoutingPolicy:
    """Next-hop chooser. Subclasses override :meth:`next_hop`.

    ``next_hop`` must return a neighbour of ``vertex`` or ``None`` to hold
    in place. ``on_tick`` runs once per tick in the decisions phase (used
    for exploratory packet traffic).
    """

    def begin_run(self, view: EngineView) -> None:
        pass

    def on_tick(self, view: EngineView, tick: int) -> None:
        pass

    def next_hop(self, evacuee_id: int, vertex: int, view: EngineView, tick: int) -> int | None:
        raise NotImplementedError


class FixedRoutePolicy(RoutingPolicy):
    """Source routing: every evacuee follows its committed vertex sequence.

    Evacuees without a route (or with an exhausted one) hold in place;
    no planner is ever consulted on their behalf.
    """

    def __init__(self, routes: Mapping[int, Sequence[int] | None]):
        self.routes = {
            eid: tuple(r) if r is not None else None for eid, r in routes.items()
        }
        self._position: dict[int, int] = {}

    def next_hop(self, evacuee_id: int, vertex: int, view: EngineView, tick: int) -> int | None:
        route = self.routes.get(evacuee_id)
        if not route:
            return None
        idx = self._position.get(evacuee_id, 0)
        if idx >= len(route) or route[idx] != vertex or idx + 1 >= len(route):
            return None
        self._position[evacuee_id] = idx + 1
        return route[idx + 1]


def _landmark_arrivals(graph: BuildingGraph, path: Sequence[tuple[int, int]]) -> int:
    return sum(1 for vid, _ in path if graph.vertex(vid).landmark)


def run_simulation(
    scenario: Scenario,
    policy: RoutingPolicy,
    fire_seed: int,
    behavior_seed: int,
    tick_cap: int | None = None,
    record_events: bool = False,
) -> SimOutcome:
    """Run one evacuation to completion (or to the tick cap).

    Deterministic for fixed (scenario, policy, seeds): the fire has its
    own RNG stream, behavioural randomness its own, and all per-tick
    iteration follows sorted vertex / evacuee-id order. If the cap is hit
    the outcome is flagged truncated and the remaining evacuees are
    conservatively marked perished.
    """
    graph = scenario.graph
    params = scenario.params
    cap = params.tick_cap if tick_cap is None else tick_cap

    fire_rng = random.Random(fire_seed)
    behavior_rng = random.Random(behavior_seed)
    field_ = HazardField()
    ignite(field_, scenario.hazard_origin, 0, params.fire)

    queues: dict[int, deque[int]] = {vid: deque() for vid in graph.vertices}
    parked: dict[int, list[int]] = {vid: [] for vid in graph.vertices}
    occupancy: dict[int, int] = {vid: 0 for vid in graph.vertices}
    evacuees: dict[int, Evacuee] = {}
    counters = Counters()
    view = EngineView(graph, params, field_, occupancy, behavior_rng, counters)
    events: list[tuple[int, int, str, int]] | None = [] if record_events else None

    def log(tick: int, eid: int, kind: str, vid: int) -> None:
        if events is not None:
            events.append((tick, eid, kind, vid))

    def join_queue(ev: Evacuee, vid: int, tick: int) -> None:
        ahead = len(queues[vid])
        rate = graph.vertex(vid).departure_rate
        ev.vertex = vid
        ev.status = QUEUED
        ev.edge = None
        ev.arrival_tick = None
        ev.parked = False
        ev.departure_tick = (
            tick
            + decision_ticks(params.tick_seconds)
            + queue_delay_ticks(ahead, rate, params.tick_seconds)
        )
        ev.realized_path.append((vid, tick))
        queues[vid].append(ev.id)
        occupancy[vid] += 1

    def leave_vertex(ev: Evacuee) -> None:
        if ev.parked:
            parked[ev.vertex].remove(ev.id)
            ev.parked = False
        else:
            queues[ev.vertex].remove(ev.id)
        occupancy[ev.vertex] -= 1

    def depart(ev: Evacuee, vid: int, nxt: int, tick: int) -> None:
        if nxt not in graph.adjacency[vid]:
            raise EngineError(
                f"policy returned non-adjacent hop {vid}->{nxt} for evacuee {ev.id}"
            )
        leave_vertex(ev)
        edge = graph.edge_between(vid, nxt)
        eff = effective_length(edge, field_, params.hazard_penalty)
        ev.status = TRAVERSING
        ev.edge = edge
        ev.vertex = nxt
        ev.departure_tick = None
        ev.arrival_tick = tick + traversal_ticks(
            eff, params.walking_speed, params.tick_seconds
        )
        counters.bump("sim_event")
        log(tick, ev.id, "depart", vid)

    # Tick 0: place evacuees, assign first departures, record initial state.
    for eid in sorted(scenario.initial_positions):
        ev = Evacuee(id=eid, vertex=scenario.initial_positions[eid])
        evacuees[eid] = ev
        join_queue(ev, ev.vertex, 0)
        log(0, eid, "arrive", ev.vertex)
    active = set(evacuees)
    policy.begin_run(view)
    policy.on_tick(view, 0)

    timeline = Timeline(graph.sorted_vertex_ids())
    timeline.record(occupancy, field_)

    truncated = False
    tick = 0
    while active:
        tick += 1
        if tick > cap:
            truncated = True
            tick = cap
            break
        counters.bump("tick")

        # Phase 1: fire advances.
        hazard_step(field_, graph, params.fire, fire_rng, tick)

        # Phase 2: deaths.
        for eid in sorted(active):
            ev = evacuees[eid]
            if ev.status == QUEUED and is_lethal(field_, params.fire, ev.vertex):
                _perish(ev, tick, leave_vertex)
                active.discard(eid)
                counters.bump("sim_event")
                log(tick, eid, "perish", ev.vertex)
            elif (
                ev.status == TRAVERSING
                and edge_intensity(field_, ev.edge) >= params.fire.lethal_threshold
            ):
                _perish(ev, tick, None)
                active.discard(eid)
                counters.bump("sim_event")
                log(tick, eid, "perish", ev.vertex)

        # Phase 3: departures, FIFO per vertex in sorted vertex order.
        for vid in graph.sorted_vertex_ids():
            q = queues[vid]
            while q:
                ev = evacuees[q[0]]
                if ev.departure_tick > tick:
                    break
                nxt = policy.next_hop(ev.id, vid, view, tick)
                if nxt is None:
                    # Step aside: stop blocking the queue, re-ask next tick.
                    q.popleft()
                    parked[vid].append(ev.id)
                    ev.parked = True
                    ev.departure_tick = tick + 1
                    log(tick, ev.id, "hold", vid)
                    continue
                depart(ev, vid, nxt, tick)
            for eid in list(parked[vid]):
                ev = evacuees[eid]
                if ev.departure_tick > tick:
                    continue
                nxt = policy.next_hop(eid, vid, view, tick)
                if nxt is None:
                    ev.departure_tick = tick + 1
                else:
                    depart(ev, vid, nxt, tick)

        # Phase 4: arrivals, in evacuee-id order.
        for eid in sorted(active):
            ev = evacuees[eid]
            if ev.status != TRAVERSING or ev.arrival_tick != tick:
                continue
            dest = ev.vertex
            counters.bump("sim_event")
            if graph.is_exit(dest):
                ev.realized_path.append((dest, tick))
                if is_lethal(field_, params.fire, dest):
                    _perish(ev, tick, None)
                    log(tick, eid, "perish", dest)
                else:
                    ev.status = ESCAPED
                    ev.edge = None
                    ev.terminal_tick = tick
                    log(tick, eid, "escape", dest)
                active.discard(eid)
            else:
                join_queue(ev, dest, tick)
                log(tick, eid, "arrive", dest)

        # Phase 5: decisions (exploratory packet traffic etc.).
        policy.on_tick(view, tick)

        # Phase 6: record the timeline.
        timeline.record(occupancy, field_)

    if truncated:
        for eid in sorted(active):
            ev = evacuees[eid]
            _perish(ev, cap, leave_vertex if ev.status == QUEUED else None)
            log(cap, eid, "perish", ev.vertex)
        active.clear()

    records = {}
    for eid, ev in sorted(evacuees.items()):
        records[eid] = EvacueeRecord(
            id=eid,
            status=ev.status,
            terminal_tick=ev.terminal_tick,
            realized_path=tuple(ev.realized_path),
            exchange_count=_landmark_arrivals(graph, ev.realized_path),
        )
    total = max((r.terminal_tick or 0 for r in records.values()), default=0)
    return SimOutcome(
        evacuees=records,
        timeline=timeline,
        total_duration=total,
        truncated=truncated,
        instruction_counters=dict(counters),
        event_log=events,
    )


def _perish(ev: Evacuee, tick: int, leave_vertex) -> None:
    if ev.status == QUEUED and leave_vertex is not None:
        leave_vertex(ev)
    ev.status = PERISHED
    ev.terminal_tick = tick
    ev.edge = None
    ev.departure_tick = None
    ev.arrival_tick = None


def event_log_rows(outcome: SimOutcome) -> list[tuple[int, int, str, int]]:
    """Event log as (tick, evacuee, event, vertex) rows; empty if not recorded."""
    return list(outcome.event_log or [])


def hazard_trace_rows(outcome: SimOutcome) -> list[tuple[int, int, float]]:
    """Hazard trace as (vertex, tick, intensity) rows over the recorded horizon."""
    rows = []
    tl = outcome.timeline
    for vid in tl.vertex_ids:
        series = tl.hazard[vid]
        for tick, value in enumerate(series):
            if value > 0.0:
                rows.append((vid, tick, value))
    return rows
