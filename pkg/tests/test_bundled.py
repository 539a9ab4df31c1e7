"""Bundled artifacts stay in sync with the generators."""

from pathlib import Path

from evacsim import cli
from evacsim.buildings import reference_scenario
from evacsim.cpn import mailbox_snapshot_rows, CpnstPolicy
from evacsim.scenario import load_scenario, serialize_scenario

REPO = Path(__file__).resolve().parent.parent
BUNDLED = REPO / "scenarios" / "reference_building.json"


def test_bundled_scenario_matches_generator():
    assert BUNDLED.is_file(), "bundled reference scenario missing"
    assert BUNDLED.read_text() == serialize_scenario(
        reference_scenario(evacuees=120, occupancy_seed=1)
    )


def test_bundled_scenario_loads():
    scenario = load_scenario(BUNDLED.read_text())
    assert len(scenario.graph) == 243
    assert len(scenario.graph.exits) == 2
    assert scenario.evacuee_count == 120


def test_cli_reports_truncated_runs(tmp_path):
    out = tmp_path / "row.csv"
    code = cli.main([
        "run", "--scenario", str(BUNDLED), "--algorithm", "dsp",
        "--evacuees", "6", "--seed", "1", "--out", str(out),
        "--tick-cap", "3",
    ])
    assert code == cli.EXIT_OK
    assert out.read_text().splitlines()[1].endswith(",true")


def test_cli_plan_trace(tmp_path):
    out = tmp_path / "row.csv"
    trace = tmp_path / "plan.csv"
    code = cli.main([
        "run", "--scenario", str(BUNDLED), "--algorithm", "cpnst-td",
        "--evacuees", "8", "--seed", "2", "--out", str(out),
        "--plan-trace", str(trace),
    ])
    assert code == cli.EXIT_OK
    lines = trace.read_text().splitlines()
    assert lines[0] == "evacuee,step,vertex,planned_tick"


def test_mailbox_snapshot_rows_shape():
    import random
    from evacsim.engine import Counters, EngineView
    from evacsim.hazard import HazardField

    scenario = reference_scenario(evacuees=10, occupancy_seed=5)
    occupancy = {vid: 0 for vid in scenario.graph.vertices}
    for vid in scenario.initial_positions.values():
        occupancy[vid] += 1
    view = EngineView(
        scenario.graph, scenario.params, HazardField(), occupancy,
        random.Random(4), Counters(),
    )
    policy = CpnstPolicy()
    policy.begin_run(view)
    from evacsim.cpn import cpn_tick

    for tick in range(20):
        cpn_tick(policy.network, view, scenario.params.cpn, tick)
    rows = mailbox_snapshot_rows(policy.network)
    assert rows, "expected at least one discovered route"
    node, rank, est, fresh, exposed, route = rows[0]
    assert rank == 0 and est > 0 and isinstance(route, str)
