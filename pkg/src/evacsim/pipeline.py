"""End-to-end orchestration: plan with the packet-routing simulation,
repair simulated casualties, execute the committed routes, and run
experiment grids.

The plan-then-execute flow is open loop: a planning run produces every
survivor's realized path as a frozen source route, the reassignment step
gives each planning casualty a repair route over the recorded timeline,
and the execution run replays all of it with no mid-run planner queries.
Under shared-seed fire replay the executed fire equals the predicted one.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping

from .analytics import ReportRow, count_exchanges, estimate_elapsed, survivor_rate
from .cpn import CpnstPolicy
from .engine import Counters, FixedRoutePolicy, SimOutcome, run_simulation
from .routing import DspPolicy, TimedPath, reassign_perished
from .scenario import Scenario, generate_occupancy

FIRE_REPLAY_MODES = ("shared-seed", "independent")


class PlanError(ValueError):
    """A route plan does not cover the scenario it is executed against."""


def derive_seed(base: int, *parts: object) -> int:
    """Deterministic, platform-stable seed derivation."""
    text = ":".join([str(base), *(str(p) for p in parts)])
    return int(hashlib.sha256(text.encode("utf-8")).hexdigest()[:16], 16)


@dataclass
class RoutePlan:
    """One committed route per evacuee plus planning metadata."""

    routes: dict[int, tuple[int, ...] | None]  # None marks an unsavable evacuee
    fire_seed: int
    behavior_seed: int
    algorithm: str
    planning_outcome: SimOutcome
    reassigned: dict[int, TimedPath | None]
    planning_counters: dict[str, int]
    reassign_counters: dict[str, int]

    @property
    def unsavable_ids(self) -> tuple[int, ...]:
        return tuple(sorted(eid for eid, r in self.routes.items() if r is None))


@dataclass(frozen=True)
class ExperimentConfig:
    occupancies: tuple[int, ...] = (30, 60, 90, 120)
    runs: int = 5
    seed_base: int = 0
    algorithms: tuple[str, ...] = ("cpnst", "cpnst-td", "dsp")
    fire_replay: str = "shared-seed"
    update_reassign_timeline: bool = True
    tick_cap: int | None = None

    def __post_init__(self) -> None:
        if not self.occupancies:
            raise ValueError("occupancies must be nonempty")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.fire_replay not in FIRE_REPLAY_MODES:
            raise ValueError(f"unknown fire-replay mode {self.fire_replay!r}")
        for alg in self.algorithms:
            if alg not in ("dsp", "cpnst", "cpnst-td"):
                raise ValueError(f"unknown algorithm {alg!r}")


def plan_routes(
    scenario: Scenario,
    fire_seed: int,
    behavior_seed: int,
    update_timeline: bool = True,
    tick_cap: int | None = None,
) -> RoutePlan:
    """Planning run plus casualty repair; survivors keep their realized paths."""
    planning = run_simulation(
        scenario, CpnstPolicy(), fire_seed, behavior_seed, tick_cap=tick_cap
    )
    reassign_counters = Counters()
    reassigned = reassign_perished(
        planning, scenario, update_timeline=update_timeline, counters=reassign_counters
    )
    routes: dict[int, tuple[int, ...] | None] = {}
    for eid, record in planning.evacuees.items():
        if record.status == "escaped":
            routes[eid] = tuple(v for v, _ in record.realized_path)
        else:
            repair = reassigned.get(eid)
            routes[eid] = repair.vertices if repair is not None else None
    return RoutePlan(
        routes=routes,
        fire_seed=fire_seed,
        behavior_seed=behavior_seed,
        algorithm="cpnst-td",
        planning_outcome=planning,
        reassigned=reassigned,
        planning_counters=dict(planning.instruction_counters),
        reassign_counters=dict(reassign_counters),
    )


def execute_plan(
    scenario: Scenario,
    plan: RoutePlan,
    exec_fire_seed: int,
    exec_behavior_seed: int,
    tick_cap: int | None = None,
    record_events: bool = False,
) -> SimOutcome:
    """Replay the committed routes with live queueing and hazard."""
    missing = sorted(set(scenario.initial_positions) - set(plan.routes))
    if missing:
        raise PlanError(f"plan misses evacuees {missing}")
    for eid, route in plan.routes.items():
        if route is not None and route[0] != scenario.initial_positions.get(eid):
            raise PlanError(
                f"route for evacuee {eid} starts at {route[0]}, "
                f"not its initial position {scenario.initial_positions.get(eid)}"
            )
    policy = FixedRoutePolicy(plan.routes)
    return run_simulation(
        scenario,
        policy,
        exec_fire_seed,
        exec_behavior_seed,
        tick_cap=tick_cap,
        record_events=record_events,
    )


def run_cell_detailed(
    template: Scenario,
    algorithm: str,
    occupancy: int,
    run_index: int,
    config: ExperimentConfig,
    positions: Mapping[int, int] | None = None,
    record_events: bool = False,
) -> tuple[ReportRow, SimOutcome, RoutePlan | None]:
    """One (algorithm, occupancy, run) cell of the experiment grid.

    Cell seeds derive from the base seed and (occupancy, run) only, so all
    algorithms face the identical fire, occupancy and behaviour streams in
    a given cell column. Pass ``positions`` to pin the occupancy instead
    of regenerating it from the derived seed.
    """
    cell_seed = derive_seed(config.seed_base, occupancy, run_index)
    fire_seed = derive_seed(cell_seed, "fire")
    behavior_seed = derive_seed(cell_seed, "behavior")
    if positions is None:
        positions = generate_occupancy(
            template.graph, occupancy, derive_seed(cell_seed, "occupancy")
        )
    scenario = template.with_occupancy(positions)
    model = scenario.params.cycle_model
    plan: RoutePlan | None = None

    if algorithm == "dsp":
        outcome = run_simulation(
            scenario, DspPolicy(), fire_seed, behavior_seed,
            tick_cap=config.tick_cap, record_events=record_events,
        )
        planning_elapsed = 0.0
    elif algorithm == "cpnst":
        outcome = run_simulation(
            scenario, CpnstPolicy(), fire_seed, behavior_seed,
            tick_cap=config.tick_cap, record_events=record_events,
        )
        planning_elapsed = 0.0
    elif algorithm == "cpnst-td":
        plan = plan_routes(
            scenario,
            fire_seed,
            behavior_seed,
            update_timeline=config.update_reassign_timeline,
            tick_cap=config.tick_cap,
        )
        if config.fire_replay == "shared-seed":
            exec_fire_seed = fire_seed
        else:
            exec_fire_seed = derive_seed(cell_seed, "exec-fire")
        exec_behavior_seed = derive_seed(cell_seed, "exec-behavior")
        outcome = execute_plan(
            scenario, plan, exec_fire_seed, exec_behavior_seed,
            tick_cap=config.tick_cap, record_events=record_events,
        )
        planning_elapsed = estimate_elapsed(plan.planning_counters, model) + estimate_elapsed(
            plan.reassign_counters, model
        )
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")

    row = ReportRow(
        algorithm=algorithm,
        occupancy=len(positions),
        seed=cell_seed,
        survivor_pct=survivor_rate(outcome),
        exchanges=count_exchanges(outcome, algorithm),
        duration_s=outcome.total_duration * scenario.params.tick_seconds,
        planning_elapsed_s=planning_elapsed,
        truncated=outcome.truncated,
    )
    return row, outcome, plan


def run_cell(
    template: Scenario,
    algorithm: str,
    occupancy: int,
    run_index: int,
    config: ExperimentConfig,
) -> ReportRow:
    row, _, _ = run_cell_detailed(template, algorithm, occupancy, run_index, config)
    return row


def iter_cells(template: Scenario, config: ExperimentConfig):
    """Cell argument tuples in the deterministic reporting order."""
    for algorithm in sorted(config.algorithms):
        for occupancy in config.occupancies:
            for run_index in range(config.runs):
                yield (template, algorithm, occupancy, run_index, config)


def run_experiment(
    template: Scenario,
    config: ExperimentConfig,
    workers: int = 1,
) -> list[ReportRow]:
    """Full grid; row order is deterministic regardless of worker count."""
    cells = list(iter_cells(template, config))
    if workers <= 1:
        return [run_cell(*args) for args in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_cell, *args) for args in cells]
        return [f.result() for f in futures]
