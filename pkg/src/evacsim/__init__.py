"""Deterministic building-evacuation simulator.

Compares three evacuee-routing strategies on a shared discrete-event
core: a congestion-blind hazard-aware shortest path, cognitive-packet
routing with an observed-time metric, and a simulate-then-repair pipeline
that re-routes simulated casualties over the recorded run.
"""

from .buildings import reference_building, reference_scenario
from .config import CpnParams, CycleModel, FireParams, SimParams
from .engine import SimOutcome, run_simulation
from .pipeline import ExperimentConfig, execute_plan, plan_routes, run_experiment
from .routing import TimedPath, dsp_route, reassign_perished, td_dijkstra
from .scenario import (
    BuildingGraph,
    Edge,
    Scenario,
    ScenarioError,
    Vertex,
    generate_occupancy,
    load_scenario,
    serialize_scenario,
    static_distance_to_exit,
)

__all__ = [
    "BuildingGraph",
    "CpnParams",
    "CycleModel",
    "Edge",
    "ExperimentConfig",
    "FireParams",
    "Scenario",
    "ScenarioError",
    "SimOutcome",
    "SimParams",
    "TimedPath",
    "Vertex",
    "dsp_route",
    "execute_plan",
    "generate_occupancy",
    "load_scenario",
    "plan_routes",
    "reassign_perished",
    "reference_building",
    "reference_scenario",
    "run_experiment",
    "run_simulation",
    "serialize_scenario",
    "static_distance_to_exit",
    "td_dijkstra",
]

__version__ = "0.1.0"
