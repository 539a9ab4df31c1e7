"""Synthetic reference building: three floors, 243 vertices, two exits.

The layout is a mall-like construction (the published experiments used a
real shopping-centre graph that is not available): each floor is a 6x6
corridor grid with 43 rooms hung off it through doorways and two
staircase landings in opposite corners; landings stack vertically along
staircase edges. The ground floor's remaining two corners are the exits.
Edge lengths carry seeded jitter so the generator is deterministic for a
fixed seed.

Layout ids per floor (base = floor * 81):
    base+0  .. base+35   corridor grid, row-major 6x6
    base+36 .. base+78   rooms
    base+79, base+80     staircase landings at grid corners (0,5) and (5,0)
Ground floor vertices 0 (corner 0,0) and 35 (corner 5,5) are the exits.
"""

from __future__ import annotations

import random

from .config import CpnParams, CycleModel, FireParams, SimParams
from .scenario import BuildingGraph, Edge, Scenario, Vertex, generate_occupancy

FLOORS = 3
GRID = 6
ROOMS_PER_FLOOR = 43
FLOOR_SIZE = GRID * GRID + ROOMS_PER_FLOOR + 2  # 81
DEFAULT_SEED = 7

# Fire constants for the bundled scenario. The kind table is the baseline
# for slow creep; the generator marks the ground-floor main channel (the
# old retail strip along row 0) as fast-burning via explicit edge rates,
# so the blaze races toward exit A but only creeps elsewhere.
REFERENCE_FIRE = FireParams(
    spread_rate_by_kind={"doorway": 0.002, "corridor": 0.0015, "staircase": 0.001},
    growth_rate=0.05,
    lethal_threshold=0.7,
)
CHANNEL_SPREAD_RATE = 0.02

REFERENCE_PARAMS = SimParams(
    walking_speed=1.4,
    tick_seconds=1.0,
    hazard_penalty=1000.0,
    tick_cap=3600,
    fire=REFERENCE_FIRE,
    cpn=CpnParams(),
    cycle_model=CycleModel(),
)

# Fire starts at the ground-floor corner where staircase A meets the main
# channel toward exit A, so that channel turns lethal mid-evacuation.
REFERENCE_HAZARD_ORIGIN = 5


def _grid_id(floor: int, row: int, col: int) -> int:
    return floor * FLOOR_SIZE + row * GRID + col


def reference_building(seed: int = DEFAULT_SEED) -> BuildingGraph:
    """Build the 243-vertex reference graph; deterministic per seed.

    Each exit hangs off a single lobby vertex, so all outflow merges
    there, and staircase landings release evacuees at half the default
    rate: the two choke points that make occupancy levels matter.
    """
    rng = random.Random(seed)
    vertices: list[Vertex] = []
    edges: list[Edge] = []
    exits = {_grid_id(0, 0, 0), _grid_id(0, GRID - 1, GRID - 1)}
    # The exits keep only their lobby-side corridor edge; the lobby door
    # is the narrow merge point in front of each exit.
    lobbies = {_grid_id(0, 0, 1), _grid_id(0, GRID - 1, GRID - 2)}
    lobby_edges = {
        (_grid_id(0, 0, 0), _grid_id(0, 0, 1)),
        (_grid_id(0, GRID - 1, GRID - 2), _grid_id(0, GRID - 1, GRID - 1)),
    }

    for floor in range(FLOORS):
        base = floor * FLOOR_SIZE
        for row in range(GRID):
            for col in range(GRID):
                vid = _grid_id(floor, row, col)
                if vid in exits:
                    kind, rate = "exit", 1.0
                elif vid in lobbies:
                    kind, rate = "doorway", 0.2
                else:
                    kind, rate = "corridor", 1.0
                vertices.append(
                    Vertex(
                        id=vid,
                        floor=floor,
                        kind=kind,
                        departure_rate=rate,
                        landmark=kind != "exit",
                    )
                )
        # Corridor grid edges; exit corners keep only the lobby edge.
        for row in range(GRID):
            for col in range(GRID):
                vid = _grid_id(floor, row, col)
                for nxt in (
                    _grid_id(floor, row, col + 1) if col + 1 < GRID else None,
                    _grid_id(floor, row + 1, col) if row + 1 < GRID else None,
                ):
                    if nxt is None:
                        continue
                    length = round(rng.uniform(12.0, 20.0), 1)
                    if (vid in exits or nxt in exits) and (vid, nxt) not in lobby_edges:
                        continue
                    if (vid, nxt) == (_grid_id(0, GRID - 1, GRID - 2), _grid_id(0, GRID - 1, GRID - 1)):
                        # Exit B sits behind a long service passage, so exit A
                        # is the geometric main channel for most of the site.
                        length = round(rng.uniform(28.0, 34.0), 1)
                    edges.append(Edge(vid, nxt, length, "corridor"))
        # Rooms: one per non-exit grid vertex, extras on a seeded sample.
        open_slots = [
            s for s in range(GRID * GRID) if base + s not in exits
        ]
        slots = open_slots + rng.sample(open_slots, ROOMS_PER_FLOOR - len(open_slots))
        for index, slot in enumerate(slots):
            vid = base + GRID * GRID + index
            vertices.append(Vertex(id=vid, floor=floor, kind="room"))
            edges.append(
                Edge(vid, base + slot, round(rng.uniform(4.0, 8.0), 1), "doorway")
            )
        # Staircase landings in the corners opposite to the exits; narrow,
        # so they release evacuees well below the default rate.
        for offset, (row, col) in ((79, (0, GRID - 1)), (80, (GRID - 1, 0))):
            vid = base + offset
            vertices.append(
                Vertex(id=vid, floor=floor, kind="staircase", departure_rate=0.25)
            )
            edges.append(
                Edge(vid, _grid_id(floor, row, col),
                     round(rng.uniform(6.0, 10.0), 1), "corridor")
            )
        if floor > 0:
            for offset in (79, 80):
                edges.append(
                    Edge(base + offset, base - FLOOR_SIZE + offset,
                         round(rng.uniform(10.0, 14.0), 1), "staircase")
                )

    # Fast-burning main channel: the ground-floor row-0 strip plus the
    # stair-A connector; everything else takes the slow baseline rate.
    channel = {v for v in range(GRID)} | {FLOOR_SIZE - 2}  # row 0 of floor 0 + landing A
    resolved = []
    for e in edges:
        if e.u in channel and e.v in channel:
            rate = CHANNEL_SPREAD_RATE
        else:
            rate = REFERENCE_FIRE.spread_rate_by_kind[e.kind]
        resolved.append(Edge(e.u, e.v, e.length, e.kind, rate))
    return BuildingGraph(vertices, resolved)


def reference_scenario(
    evacuees: int = 120,
    occupancy_seed: int = 1,
    building_seed: int = DEFAULT_SEED,
    params: SimParams | None = None,
) -> Scenario:
    """Bundled reference scenario: graph, fire origin and occupancy."""
    graph = reference_building(building_seed)
    return Scenario(
        graph=graph,
        hazard_origin=REFERENCE_HAZARD_ORIGIN,
        initial_positions=generate_occupancy(graph, evacuees, occupancy_seed),
        params=params or REFERENCE_PARAMS,
    )
