"""Seeded property suites over randomized instances (100+ cases each)."""

import random

from hypothesis import given, settings, strategies as st

from evacsim.config import CpnParams, FireParams, SimParams
from evacsim.cpn import Ack, CpnNodeState, handle_ack, rnn_steady_state
from evacsim.engine import run_simulation
from evacsim.hazard import HazardField, hazard_step, ignite
from evacsim.oracle import random_instance
from evacsim.pipeline import execute_plan, plan_routes
from evacsim.routing import DspPolicy
from evacsim.scenario import Scenario, generate_occupancy

CASES = settings(max_examples=120, derandomize=True, deadline=None)

FIRE = FireParams(growth_rate=0.1, lethal_threshold=0.7)


def _random_scenario(seed: int, evacuees: int | None = None) -> Scenario:
    inst = random_instance(seed)
    rng = random.Random(seed ^ 0xA5A5)
    graph = inst.graph
    n = rng.randint(1, 8) if evacuees is None else evacuees
    non_exit = graph.non_exit_vertices()
    return Scenario(
        graph=graph,
        hazard_origin=non_exit[rng.randrange(len(non_exit))],
        initial_positions=generate_occupancy(graph, n, seed),
        params=SimParams(walking_speed=1.0, fire=FIRE, tick_cap=600),
    )


# --- hazard ------------------------------------------------------------------


@CASES
@given(seed=st.integers(0, 2**32 - 1))
def test_hazard_monotone_and_local(seed):
    inst = random_instance(seed)
    graph = inst.graph
    rng = random.Random(seed)
    field = HazardField()
    origin = graph.non_exit_vertices()[0]
    ignite(field, origin, 0, FIRE)
    previous_intensity = dict(field.intensity)
    previous_burning = set(field.ignition_time)
    for tick in range(1, 40):
        hazard_step(field, graph, FIRE, rng, tick)
        for vid, value in field.intensity.items():
            assert value >= previous_intensity.get(vid, 0.0) - 1e-12
            assert 0.0 <= value <= 1.0
        for vid in set(field.ignition_time) - previous_burning:
            assert any(w in previous_burning for w in graph.neighbors(vid))
        previous_intensity = dict(field.intensity)
        previous_burning = set(field.ignition_time)


# --- engine ------------------------------------------------------------------


@CASES
@given(seed=st.integers(0, 2**32 - 1))
def test_conservation_under_random_runs(seed):
    scenario = _random_scenario(seed)
    outcome = run_simulation(scenario, DspPolicy(), seed, seed + 1, record_events=True)
    n = len(scenario.initial_positions)
    terminal_by_tick: dict[int, int] = {}
    for t, _, kind, _ in outcome.event_log:
        if kind in ("escape", "perish"):
            terminal_by_tick[t] = terminal_by_tick.get(t, 0) + 1
    active = n
    for tick in sorted(terminal_by_tick):
        active -= terminal_by_tick[tick]
        assert 0 <= active <= n
    assert active == 0
    assert outcome.escaped_count + outcome.perished_count == n


@CASES
@given(seed=st.integers(0, 2**32 - 1))
def test_fifo_order_under_random_runs(seed):
    scenario = _random_scenario(seed)
    outcome = run_simulation(scenario, DspPolicy(), seed, seed + 1, record_events=True)
    arrivals: dict[int, list[int]] = {}
    departures: dict[int, list[int]] = {}
    order: dict[tuple[int, int], int] = {}
    counter = 0
    for t, eid, kind, vid in outcome.event_log:
        if kind == "arrive":
            arrivals.setdefault(vid, []).append(eid)
            order[(vid, eid)] = counter
            counter += 1
        elif kind == "depart":
            departures.setdefault(vid, []).append(eid)
    for vid, departed in departures.items():
        joined = [eid for eid in arrivals.get(vid, []) if eid in set(departed)]
        # departures happen in join order (holders never depart)
        assert departed == sorted(departed, key=lambda e: order[(vid, e)])
        assert len(joined) == len(departed)


@CASES
@given(seed=st.integers(0, 2**32 - 1))
def test_no_escape_through_lethal_vertex(seed):
    scenario = _random_scenario(seed)
    outcome = run_simulation(scenario, DspPolicy(), seed, seed + 1)
    tl = outcome.timeline
    threshold = scenario.params.fire.lethal_threshold
    for record in outcome.evacuees.values():
        if record.status != "escaped":
            continue
        for vid, tick in record.realized_path:
            assert tl.hazard_at(vid, min(tick, tl.horizon)) < threshold


# --- decision units ----------------------------------------------------------


@CASES
@given(
    data=st.lists(
        st.tuples(
            st.floats(0.0, 10.0, allow_nan=False),
            st.floats(1e-6, 10.0, allow_nan=False),
        ),
        min_size=1,
        max_size=6,
    )
)
def test_rnn_excitations_bounded_and_convergent(data):
    weights = {i: pair for i, pair in enumerate(data)}
    if sum(p + m for p, m in weights.values()) <= 0.0:
        return
    q = rnn_steady_state(weights)
    assert all(0.0 <= v < 1.0 for v in q.values())


@CASES
@given(
    seed=st.integers(0, 2**32 - 1),
    times=st.lists(st.floats(0.5, 500.0, allow_nan=False), min_size=1, max_size=30),
)
def test_reinforcement_sign_correctness(seed, times):
    params = CpnParams()
    state = CpnNodeState.fresh(0, (1, 2, 3), params)
    rng = random.Random(seed)
    for measured in times:
        used = rng.choice((1, 2, 3))
        reward = 1.0 / measured
        before = state.weights[used][0]
        above = reward >= state.reward_threshold
        handle_ack(state, Ack((9, used, 0), measured), params)
        after = state.weights[used][0]
        if above:
            assert after >= before
        else:
            assert after <= before


@CASES
@given(
    entries=st.lists(
        st.tuples(st.floats(1.0, 1000.0, allow_nan=False), st.integers(1, 5)),
        min_size=1,
        max_size=25,
    )
)
def test_mailbox_stays_ranked_and_bounded(entries):
    params = CpnParams(mailbox_capacity=5)
    state = CpnNodeState.fresh(0, (1, 2, 3, 4, 5), params)
    for measured, hop in entries:
        handle_ack(state, Ack((9, hop, 0), measured), params)
    times = [e.est_time for e in state.mailbox]
    assert times == sorted(times)
    assert len(state.mailbox) <= params.mailbox_capacity
    routes = [e.route for e in state.mailbox]
    assert len(set(routes)) == len(routes)


# --- pipeline ----------------------------------------------------------------


@CASES
@given(seed=st.integers(0, 2**32 - 1))
def test_execution_is_open_loop(seed):
    scenario = _random_scenario(seed, evacuees=4)
    plan = plan_routes(scenario, seed, seed + 1)
    outcome = execute_plan(scenario, plan, seed, seed + 2)
    assert outcome.instruction_counters.get("planner_query", 0) == 0
    assert set(plan.routes) == set(scenario.initial_positions)
