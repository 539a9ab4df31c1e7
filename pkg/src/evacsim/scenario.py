"""Building graph model, scenario documents and initial occupancy.

A scenario is a single JSON document with three sections: ``graph``
(vertices and edges), ``params`` (overrides for
:class:`~evacsim.config.SimParams`) and ``occupancy`` (explicit evacuee
positions or ``{count, seed}``), plus a top-level ``hazard_origin``
vertex id. ``load_scenario`` fills in defaults for everything omitted and
validates the result.
"""

from __future__ import annotations

import heapq
import json
import math
import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .config import (
    EDGE_KINDS,
    VERTEX_KINDS,
    ConfigError,
    CpnParams,
    CycleModel,
    FireParams,
    SimParams,
)


class ScenarioError(ValueError):
    """Raised for malformed or invalid scenario documents."""


@dataclass(frozen=True)
class Vertex:
    id: int
    floor: int = 0
    kind: str = "room"
    departure_rate: float = 1.0  # evacuees released per second
    landmark: bool = True

    def __post_init__(self) -> None:
        if self.kind not in VERTEX_KINDS:
            raise ScenarioError(f"vertex {self.id}: unknown kind {self.kind!r}")
        if self.departure_rate <= 0.0:
            raise ScenarioError(
                f"vertex {self.id}: nonpositive departure_rate {self.departure_rate}"
            )


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    length: float  # metres
    kind: str = "corridor"
    spread_rate: float | None = None  # per-tick ignition probability

    def __post_init__(self) -> None:
        if self.u == self.v:
            raise ScenarioError(f"edge ({self.u}, {self.v}): endpoints must differ")
        if self.length <= 0.0:
            raise ScenarioError(
                f"edge ({self.u}, {self.v}): nonpositive length {self.length}"
            )
        if self.kind not in EDGE_KINDS:
            raise ScenarioError(f"edge ({self.u}, {self.v}): unknown kind {self.kind!r}")
        if self.spread_rate is not None and not 0.0 <= self.spread_rate <= 1.0:
            raise ScenarioError(
                f"edge ({self.u}, {self.v}): spread_rate outside [0, 1]"
            )

    @property
    def key(self) -> tuple[int, int]:
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)

    def other(self, vertex: int) -> int:
        return self.v if vertex == self.u else self.u


class BuildingGraph:
    """Undirected, connected building graph with at least one exit."""

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[Edge]):
        self.vertices: dict[int, Vertex] = {}
        for vx in vertices:
            if vx.id in self.vertices:
                raise ScenarioError(f"duplicate vertex id {vx.id}")
            self.vertices[vx.id] = vx
        self.edges: list[Edge] = []
        self._edge_by_key: dict[tuple[int, int], Edge] = {}
        self.adjacency: dict[int, list[int]] = {vid: [] for vid in self.vertices}
        for e in edges:
            for endpoint in (e.u, e.v):
                if endpoint not in self.vertices:
                    raise ScenarioError(
                        f"dangling edge endpoint {endpoint} on edge ({e.u}, {e.v})"
                    )
            if e.key in self._edge_by_key:
                raise ScenarioError(f"duplicate edge between {e.u} and {e.v}")
            self.edges.append(e)
            self._edge_by_key[e.key] = e
            self.adjacency[e.u].append(e.v)
            self.adjacency[e.v].append(e.u)
        self.edges.sort(key=lambda e: e.key)
        for vid in self.adjacency:
            self.adjacency[vid].sort()
        self.exits: tuple[int, ...] = tuple(
            sorted(vid for vid, vx in self.vertices.items() if vx.kind == "exit")
        )
        self._validate()

    def _validate(self) -> None:
        if not self.vertices:
            raise ScenarioError("graph has no vertices")
        if not self.exits:
            raise ScenarioError("no exit vertex in graph")
        # Connectivity implies every vertex reaches an exit.
        start = next(iter(self.exits))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in self.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(self.vertices):
            missing = sorted(set(self.vertices) - seen)
            raise ScenarioError(f"graph not connected; unreachable vertices {missing}")

    def vertex(self, vid: int) -> Vertex:
        return self.vertices[vid]

    def neighbors(self, vid: int) -> list[int]:
        return self.adjacency[vid]

    def edge_between(self, u: int, v: int) -> Edge:
        key = (u, v) if u < v else (v, u)
        try:
            return self._edge_by_key[key]
        except KeyError:
            raise ScenarioError(f"no edge between {u} and {v}") from None

    def is_exit(self, vid: int) -> bool:
        return self.vertices[vid].kind == "exit"

    def non_exit_vertices(self) -> list[int]:
        return sorted(vid for vid in self.vertices if not self.is_exit(vid))

    def sorted_vertex_ids(self) -> list[int]:
        return sorted(self.vertices)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BuildingGraph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class Scenario:
    graph: BuildingGraph
    hazard_origin: int
    initial_positions: Mapping[int, int]  # evacuee id -> vertex id
    params: SimParams = field(default_factory=SimParams)

    def __post_init__(self) -> None:
        if self.hazard_origin not in self.graph.vertices:
            raise ScenarioError(f"hazard_origin {self.hazard_origin} not in graph")
        if self.graph.is_exit(self.hazard_origin):
            raise ScenarioError("hazard_origin must not be an exit")
        for eid, vid in self.initial_positions.items():
            if vid not in self.graph.vertices:
                raise ScenarioError(f"evacuee {eid} placed on unknown vertex {vid}")
            if self.graph.is_exit(vid):
                raise ScenarioError(f"evacuee {eid} placed on exit vertex {vid}")

    @property
    def evacuee_count(self) -> int:
        return len(self.initial_positions)

    def with_occupancy(self, positions: Mapping[int, int]) -> "Scenario":
        return Scenario(self.graph, self.hazard_origin, dict(positions), self.params)


# ---------------------------------------------------------------------------
# Document parsing


def _require(mapping: Mapping[str, Any], key: str, context: str) -> Any:
    if key not in mapping:
        raise ScenarioError(f"{context}: missing required field {key!r}")
    return mapping[key]


def _parse_vertex(raw: Mapping[str, Any]) -> Vertex:
    kind = raw.get("kind", "room")
    return Vertex(
        id=int(_require(raw, "id", "vertex")),
        floor=int(raw.get("floor", 0)),
        kind=kind,
        departure_rate=float(raw.get("departure_rate", 1.0)),
        landmark=bool(raw.get("landmark", kind != "exit")),
    )


def _parse_edge(raw: Mapping[str, Any]) -> Edge:
    rate = raw.get("spread_rate")
    return Edge(
        u=int(_require(raw, "u", "edge")),
        v=int(_require(raw, "v", "edge")),
        length=float(_require(raw, "length", "edge")),
        kind=raw.get("kind", "corridor"),
        spread_rate=None if rate is None else float(rate),
    )


def _parse_params(raw: Mapping[str, Any]) -> SimParams:
    fire_raw = raw.get("fire", {})
    cpn_raw = raw.get("cpn", {})
    cycle_raw = raw.get("cycle_model", {})
    try:
        fire = FireParams(
            spread_rate_by_kind=dict(
                fire_raw.get("spread_rates", FireParams().spread_rate_by_kind)
            ),
            growth_rate=float(fire_raw.get("growth_rate", FireParams().growth_rate)),
            lethal_threshold=float(
                fire_raw.get("lethal_threshold", FireParams().lethal_threshold)
            ),
        )
        cpn_defaults = CpnParams()
        cpn = CpnParams(
            drift=float(cpn_raw.get("drift", cpn_defaults.drift)),
            sp_per_node_per_tick=int(
                cpn_raw.get("sp_per_node_per_tick", cpn_defaults.sp_per_node_per_tick)
            ),
            mailbox_capacity=int(
                cpn_raw.get("mailbox_capacity", cpn_defaults.mailbox_capacity)
            ),
            learning_rate=float(
                cpn_raw.get("learning_rate", cpn_defaults.learning_rate)
            ),
            threshold_smoothing=float(
                cpn_raw.get("threshold_smoothing", cpn_defaults.threshold_smoothing)
            ),
            initial_weight=float(
                cpn_raw.get("initial_weight", cpn_defaults.initial_weight)
            ),
            hop_budget_factor=int(
                cpn_raw.get("hop_budget_factor", cpn_defaults.hop_budget_factor)
            ),
        )
        cycle_defaults = CycleModel()
        cycle = CycleModel(
            ipc=float(cycle_raw.get("ipc", cycle_defaults.ipc)),
            frequency_hz=float(cycle_raw.get("frequency_hz", cycle_defaults.frequency_hz)),
            servers=int(cycle_raw.get("servers", cycle_defaults.servers)),
            instruction_weights=dict(
                cycle_raw.get("instruction_weights", cycle_defaults.instruction_weights)
            ),
        )
        defaults = SimParams()
        return SimParams(
            walking_speed=float(raw.get("walking_speed", defaults.walking_speed)),
            tick_seconds=float(raw.get("tick_seconds", defaults.tick_seconds)),
            hazard_penalty=float(raw.get("hazard_penalty", defaults.hazard_penalty)),
            tick_cap=int(raw.get("tick_cap", defaults.tick_cap)),
            fire=fire,
            cpn=cpn,
            cycle_model=cycle,
        )
    except ConfigError as exc:
        raise ScenarioError(f"invalid params: {exc}") from exc


def load_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document.

    Raises :class:`ScenarioError` on malformed JSON, dangling edge
    endpoints, missing exits, nonpositive lengths and any other invariant
    violation. Omitted parameters are filled with defaults.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed scenario document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")

    graph_raw = _require(doc, "graph", "scenario")
    vertices = [_parse_vertex(v) for v in _require(graph_raw, "vertices", "graph")]
    edges = [_parse_edge(e) for e in _require(graph_raw, "edges", "graph")]
    params = _parse_params(doc.get("params", {}))
    # Resolve per-edge spread rates from the kind table when absent.
    resolved = [
        e
        if e.spread_rate is not None
        else Edge(e.u, e.v, e.length, e.kind, params.fire.spread_rate_by_kind[e.kind])
        for e in edges
    ]
    graph = BuildingGraph(vertices, resolved)

    occupancy = doc.get("occupancy", {})
    if "positions" in occupancy:
        positions = {int(k): int(v) for k, v in occupancy["positions"].items()}
    else:
        count = int(occupancy.get("count", 0))
        seed = int(occupancy.get("seed", 0))
        positions = generate_occupancy(graph, count, seed)

    return Scenario(
        graph=graph,
        hazard_origin=int(_require(doc, "hazard_origin", "scenario")),
        initial_positions=positions,
        params=params,
    )


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    p = scenario.params
    return {
        "graph": {
            "vertices": [
                {
                    "id": vx.id,
                    "floor": vx.floor,
                    "kind": vx.kind,
                    "departure_rate": vx.departure_rate,
                    "landmark": vx.landmark,
                }
                for vx in sorted(scenario.graph.vertices.values(), key=lambda v: v.id)
            ],
            "edges": [
                {
                    "u": e.u,
                    "v": e.v,
                    "length": e.length,
                    "kind": e.kind,
                    "spread_rate": e.spread_rate,
                }
                for e in scenario.graph.edges
            ],
        },
        "hazard_origin": scenario.hazard_origin,
        "occupancy": {
            "positions": {str(k): v for k, v in sorted(scenario.initial_positions.items())}
        },
        "params": {
            "walking_speed": p.walking_speed,
            "tick_seconds": p.tick_seconds,
            "hazard_penalty": p.hazard_penalty,
            "tick_cap": p.tick_cap,
            "fire": {
                "spread_rates": dict(p.fire.spread_rate_by_kind),
                "growth_rate": p.fire.growth_rate,
                "lethal_threshold": p.fire.lethal_threshold,
            },
            "cpn": {
                "drift": p.cpn.drift,
                "sp_per_node_per_tick": p.cpn.sp_per_node_per_tick,
                "mailbox_capacity": p.cpn.mailbox_capacity,
                "learning_rate": p.cpn.learning_rate,
                "threshold_smoothing": p.cpn.threshold_smoothing,
                "initial_weight": p.cpn.initial_weight,
                "hop_budget_factor": p.cpn.hop_budget_factor,
            },
            "cycle_model": {
                "ipc": p.cycle_model.ipc,
                "frequency_hz": p.cycle_model.frequency_hz,
                "servers": p.cycle_model.servers,
                "instruction_weights": dict(p.cycle_model.instruction_weights),
            },
        },
    }


def serialize_scenario(scenario: Scenario) -> str:
    """Render a scenario back to its document form (stable field order)."""
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


# ---------------------------------------------------------------------------
# Static distances and occupancy


def exit_distances(graph: BuildingGraph) -> dict[int, float]:
    """Physical-length distance from every vertex to its nearest exit."""
    dist: dict[int, float] = {vid: math.inf for vid in graph.vertices}
    heap: list[tuple[float, int]] = []
    for ex in graph.exits:
        dist[ex] = 0.0
        heapq.heappush(heap, (0.0, ex))
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for w in graph.neighbors(u):
            nd = d + graph.edge_between(u, w).length
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def static_distance_to_exit(graph: BuildingGraph, vid: int) -> float:
    """Shortest physical path length from ``vid`` to the nearest exit."""
    if vid not in graph.vertices:
        raise ScenarioError(f"unknown vertex {vid}")
    d = exit_distances(graph)[vid]
    if math.isinf(d):
        raise ScenarioError(f"vertex {vid} cannot reach any exit")
    return d


def generate_occupancy(graph: BuildingGraph, n: int, seed: int) -> dict[int, int]:
    """Place ``n`` evacuees uniformly at random on non-exit vertices.

    The algorithm is fixed so placements are bit-identical everywhere:
    evacuee ids 0..n-1 are assigned in order by drawing
    ``random.Random(seed).randrange(len(candidates))`` over the sorted
    list of non-exit vertex ids.
    """
    if n < 0:
        raise ScenarioError(f"occupancy count must be >= 0, got {n}")
    candidates = graph.non_exit_vertices()
    if n > 0 and not candidates:
        raise ScenarioError("graph has no non-exit vertex to occupy")
    rng = random.Random(seed)
    return {eid: candidates[rng.randrange(len(candidates))] for eid in range(n)}
