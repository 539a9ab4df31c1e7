import math
import random

import pytest

from evacsim.config import SimParams
from evacsim.engine import EvacueeRecord, SimOutcome, Timeline
from evacsim.hazard import HazardField
from evacsim.oracle import brute_force_exit_arrival, random_instance, run_oracle_check
from evacsim.routing import (
    OccupancyTimeline,
    dsp_route,
    effective_length,
    reassign_perished,
    td_dijkstra,
)
from evacsim.scenario import BuildingGraph, Edge, Scenario, Vertex

from conftest import NO_SPREAD, make_triangle

PENALTY = 1000.0


def _all_simple_paths(graph, start):
    """Exhaustive enumeration of simple paths from start to any exit."""
    paths = []

    def walk(u, seen, acc):
        if graph.is_exit(u):
            paths.append(list(acc))
            return
        for w in graph.neighbors(u):
            if w not in seen:
                seen.add(w)
                acc.append(w)
                walk(w, seen, acc)
                acc.pop()
                seen.remove(w)

    if graph.is_exit(start):
        return [[start]]
    walk(start, {start}, [start])
    return paths


def _path_cost(graph, field, path):
    return sum(
        effective_length(graph.edge_between(u, w), field, PENALTY)
        for u, w in zip(path, path[1:])
    )


# --- static routing ----------------------------------------------------------


def test_dsp_prefers_direct_edge_without_hazard(triangle):
    assert dsp_route(triangle, HazardField(), 0, PENALTY) == [0, 2]


def test_dsp_detours_around_burning_vertex():
    # burning middle vertex on the short route flips the choice
    graph = BuildingGraph(
        [Vertex(0, kind="room"), Vertex(1, kind="corridor"),
         Vertex(2, kind="corridor"), Vertex(3, kind="exit")],
        [Edge(0, 1, 1.0), Edge(1, 3, 1.0), Edge(0, 2, 10.0), Edge(2, 3, 10.0)],
    )
    field = HazardField(intensity={1: 0.5})
    assert dsp_route(graph, field, 0, PENALTY) == [0, 2, 3]


def test_dsp_from_exit_is_trivial(triangle):
    assert dsp_route(triangle, HazardField(), 2, PENALTY) == [2]


def test_dsp_matches_enumeration_on_random_graphs():
    for seed in range(40):
        inst = random_instance(seed)
        graph = inst.graph
        rng = random.Random(seed + 1)
        field = HazardField(
            intensity={
                vid: rng.choice((0.0, 0.0, 0.2, 0.6, 1.0)) for vid in graph.vertices
            }
        )
        for start in graph.vertices:
            route = dsp_route(graph, field, start, PENALTY)
            paths = _all_simple_paths(graph, start)
            assert route is not None and paths
            best = min(_path_cost(graph, field, p) for p in paths)
            assert _path_cost(graph, field, route) == pytest.approx(best)


def test_safe_paths_beat_burning_paths():
    # whenever a safe path is short enough, no path through fire can win
    for seed in range(30):
        inst = random_instance(seed + 1000)
        graph = inst.graph
        rng = random.Random(seed)
        field = HazardField(
            intensity={vid: rng.choice((0.0, 0.0, 0.0, 0.3, 0.8)) for vid in graph.vertices}
        )
        burning = [v for v, i in field.intensity.items() if i > 0]
        if not burning:
            continue
        min_intensity = min(i for i in field.intensity.values() if i > 0) / 2.0
        min_len = min(e.length for e in graph.edges)
        bound = PENALTY * min_intensity * min_len
        for start in graph.vertices:
            paths = _all_simple_paths(graph, start)
            safe = [
                p for p in paths
                if all(
                    (field.intensity_at(u) + field.intensity_at(w)) == 0.0
                    for u, w in zip(p, p[1:])
                )
            ]
            exposed = [p for p in paths if p not in safe]
            for p_safe in safe:
                if _path_cost(graph, field, p_safe) < bound:
                    for p_burn in exposed:
                        assert _path_cost(graph, field, p_safe) < _path_cost(
                            graph, field, p_burn
                        )


# --- time-dependent routing --------------------------------------------------


def _zero_timeline(graph, horizon=0):
    return OccupancyTimeline(
        {vid: [0] * (horizon + 1) for vid in graph.vertices},
        {vid: [0.0] * (horizon + 1) for vid in graph.vertices},
        horizon,
    )


def test_td_reduces_to_static_case():
    graph = BuildingGraph(
        [Vertex(0, kind="room"), Vertex(1, kind="corridor"), Vertex(2, kind="exit")],
        [Edge(0, 1, 10.0), Edge(1, 2, 5.0)],
    )
    params = SimParams(walking_speed=1.0, fire=NO_SPREAD)
    path = td_dijkstra(graph, _zero_timeline(graph), 0, 0, params)
    assert path.vertices == tuple(dsp_route(graph, HazardField(), 0, PENALTY))
    # per hop: length/speed plus the one-second decision cost
    assert path.total_time == (10 + 1) + (5 + 1)
    assert path.steps == ((0, 0), (1, 11), (2, 17))


def test_td_detours_around_recorded_lethal_window():
    # short arm's middle vertex turns lethal at tick 5; the evacuee would
    # reach it at tick 6, so the long arm must win
    graph = BuildingGraph(
        [Vertex(0, kind="room"), Vertex(1, kind="corridor"),
         Vertex(2, kind="corridor"), Vertex(3, kind="exit")],
        [Edge(0, 1, 5.0), Edge(1, 3, 5.0), Edge(0, 2, 20.0), Edge(2, 3, 20.0)],
    )
    horizon = 10
    hazard = {vid: [0.0] * (horizon + 1) for vid in graph.vertices}
    for t in range(5, horizon + 1):
        hazard[1][t] = 0.9
    timeline = OccupancyTimeline(
        {vid: [0] * (horizon + 1) for vid in graph.vertices}, hazard, horizon
    )
    params = SimParams(walking_speed=1.0, fire=NO_SPREAD)
    path = td_dijkstra(graph, timeline, 0, 0, params)
    assert path.vertices == (0, 2, 3)
    # and brute force agrees exactly
    brute = brute_force_exit_arrival(graph, timeline, 0, 0, params, t_max=80)
    assert path.exit_arrival_tick == brute


def test_td_queue_term_uses_recorded_counts():
    graph = BuildingGraph(
        [Vertex(0, kind="room"), Vertex(1, kind="corridor"), Vertex(2, kind="exit")],
        [Edge(0, 1, 5.0), Edge(1, 2, 5.0)],
    )
    timeline = _zero_timeline(graph, horizon=12)
    timeline._queues[1] = [0] * 6 + [4] * 7  # queue of 4 from tick 6
    params = SimParams(walking_speed=1.0, fire=NO_SPREAD)
    path = td_dijkstra(graph, timeline, 0, 0, params)
    # arrive 1 at tick 6, wait 4 ticks extra: depart 11, arrive exit 16
    assert path.steps == ((0, 0), (1, 6), (2, 16))


def test_td_never_schedules_lethal_presence():
    params_pool = {}
    for seed in range(80):
        inst = random_instance(seed + 31337)
        path = td_dijkstra(
            inst.graph, inst.timeline, inst.start, inst.t0, inst.params, t_max=inst.t_max
        )
        if path is None:
            continue
        threshold = inst.params.fire.lethal_threshold
        for (u, tu), (w, tw) in zip(path.steps, path.steps[1:]):
            rate = inst.graph.vertex(u).departure_rate
            depart = tu + 1 + math.floor(
                inst.timeline.queue_at(u, tu) / rate / inst.params.tick_seconds + 1e-9
            )
            for t in range(tu, depart + 1):
                assert inst.timeline.hazard_at(u, t) < threshold
        assert inst.timeline.hazard_at(path.steps[-1][0], path.exit_arrival_tick) < threshold


def test_td_oracle_equivalence_sample():
    total, mismatches = run_oracle_check(60, seed=2)
    assert total == 60
    assert mismatches == []


def test_td_unsavable_when_every_route_burns():
    graph = BuildingGraph(
        [Vertex(0, kind="room"), Vertex(1, kind="corridor"), Vertex(2, kind="exit")],
        [Edge(0, 1, 5.0), Edge(1, 2, 5.0)],
    )
    horizon = 3
    hazard = {vid: [0.0] * (horizon + 1) for vid in graph.vertices}
    hazard[1] = [0.9] * (horizon + 1)
    timeline = OccupancyTimeline(
        {vid: [0] * (horizon + 1) for vid in graph.vertices}, hazard, horizon
    )
    assert td_dijkstra(graph, timeline, 0, 0, SimParams(fire=NO_SPREAD)) is None


# --- reassignment ------------------------------------------------------------


def _fake_outcome(graph, records, horizon=0):
    timeline = Timeline(graph.sorted_vertex_ids())
    for _ in range(horizon + 1):
        timeline.record({}, HazardField())
    return SimOutcome(
        evacuees=records,
        timeline=timeline,
        total_duration=horizon,
        truncated=False,
        instruction_counters={},
    )


def _perished_record(eid, vertex):
    return EvacueeRecord(
        id=eid, status="perished", terminal_tick=5,
        realized_path=((vertex, 0),), exchange_count=1,
    )


def test_reassign_zero_perished_is_empty():
    graph = make_triangle()
    records = {
        0: EvacueeRecord(0, "escaped", 4, ((0, 0), (2, 4)), 1),
    }
    scenario = Scenario(graph, 1, {0: 0}, SimParams(fire=NO_SPREAD))
    assert reassign_perished(_fake_outcome(graph, records), scenario) == {}


def test_reassign_single_perished_gets_route_from_initial_vertex():
    graph = make_triangle()
    records = {0: _perished_record(0, 0)}
    scenario = Scenario(graph, 1, {0: 0}, SimParams(walking_speed=1.0, fire=NO_SPREAD))
    result = reassign_perished(_fake_outcome(graph, records), scenario)
    assert set(result) == {0}
    assert result[0].vertices[0] == 0
    assert graph.is_exit(result[0].vertices[-1])


def test_reassign_commits_occupancy_between_casualties():
    # two casualties share a single-corridor exit route; the second must
    # inherit the first's committed queueing and arrive strictly later
    graph = BuildingGraph(
        [Vertex(0, kind="room"), Vertex(1, kind="exit")],
        [Edge(0, 1, 10.0)],
    )
    records = {0: _perished_record(0, 0), 1: _perished_record(1, 0)}
    scenario = Scenario(graph, 0, {0: 0, 1: 0}, SimParams(walking_speed=1.0, fire=NO_SPREAD))
    outcome = _fake_outcome(graph, records)
    result = reassign_perished(outcome, scenario)
    assert result[0].exit_arrival_tick < result[1].exit_arrival_tick
    static = reassign_perished(outcome, scenario, update_timeline=False)
    assert static[0].exit_arrival_tick == static[1].exit_arrival_tick


def test_reassign_orders_by_distance_then_id():
    graph = BuildingGraph(
        [Vertex(0, kind="room"), Vertex(1, kind="corridor"), Vertex(2, kind="exit")],
        [Edge(0, 1, 10.0), Edge(1, 2, 5.0)],
    )
    # evacuee 7 starts closer than evacuee 3: 7 is processed first, so 3
    # sees 7's committed queueing at the shared corridor
    records = {3: _perished_record(3, 0), 7: _perished_record(7, 1)}
    scenario = Scenario(
        graph, 1, {3: 0, 7: 1}, SimParams(walking_speed=1.0, fire=NO_SPREAD)
    )
    result = reassign_perished(_fake_outcome(graph, records), scenario)
    assert list(result) == [7, 3]


def test_reassign_is_deterministic():
    graph = make_triangle()
    records = {0: _perished_record(0, 0), 1: _perished_record(1, 1)}
    scenario = Scenario(graph, 1, {0: 0, 1: 1}, SimParams(fire=NO_SPREAD))
    outcome = _fake_outcome(graph, records)
    first = reassign_perished(outcome, scenario)
    second = reassign_perished(outcome, scenario)
    assert first == second
