"""Shared small-graph fixtures."""

from __future__ import annotations

import pytest

from evacsim.config import FireParams, SimParams
from evacsim.scenario import BuildingGraph, Edge, Scenario, Vertex

NO_SPREAD = FireParams(
    spread_rate_by_kind={"doorway": 0.0, "corridor": 0.0, "staircase": 0.0},
    growth_rate=0.05,
    lethal_threshold=0.7,
)


def make_line_graph() -> BuildingGraph:
    """exit(1) -- 10m -- room(0) -- 5m -- corridor(2): fire parked at 2."""
    return BuildingGraph(
        [Vertex(0, kind="room"), Vertex(1, kind="exit"), Vertex(2, kind="corridor")],
        [Edge(0, 1, 10.0, "corridor", 0.0), Edge(0, 2, 5.0, "corridor", 0.0)],
    )


def make_line_scenario(walking_speed: float = 1.0) -> Scenario:
    """One evacuee in a room 10 m from the exit; fire isolated off-path."""
    return Scenario(
        graph=make_line_graph(),
        hazard_origin=2,
        initial_positions={0: 0},
        params=SimParams(walking_speed=walking_speed, fire=NO_SPREAD),
    )


def make_triangle(direct: float = 3.0, leg: float = 2.0) -> BuildingGraph:
    """room(0) with a direct edge to exit(2) and a detour through corridor(1)."""
    return BuildingGraph(
        [Vertex(0, kind="room"), Vertex(1, kind="corridor"), Vertex(2, kind="exit")],
        [Edge(0, 2, direct), Edge(0, 1, leg), Edge(1, 2, leg)],
    )


def make_star(leaves: int = 4, spread: float = 0.5) -> BuildingGraph:
    """Hub(0) with ``leaves`` leaf rooms; one leaf promoted to exit."""
    vertices = [Vertex(0, kind="corridor")]
    edges = []
    for i in range(1, leaves + 1):
        kind = "exit" if i == leaves else "room"
        vertices.append(Vertex(i, kind=kind))
        edges.append(Edge(0, i, 10.0, "corridor", spread))
    return BuildingGraph(vertices, edges)


@pytest.fixture
def line_scenario() -> Scenario:
    return make_line_scenario()


@pytest.fixture
def triangle() -> BuildingGraph:
    return make_triangle()
