import pytest

from evacsim.analytics import (
    REPORT_HEADER,
    ReportRow,
    count_exchanges,
    estimate_elapsed,
    parse_report_rows,
    summarize_rows,
    survivor_rate,
)
from evacsim.config import CycleModel
from evacsim.engine import EvacueeRecord, SimOutcome, Timeline
from evacsim.hazard import HazardField
from evacsim.scenario import BuildingGraph, Edge, Vertex


def _outcome(statuses, exchange_counts=None):
    records = {}
    exchange_counts = exchange_counts or {}
    for eid, status in enumerate(statuses):
        records[eid] = EvacueeRecord(
            id=eid,
            status=status,
            terminal_tick=10,
            realized_path=((0, 0),),
            exchange_count=exchange_counts.get(eid, 1),
        )
    timeline = Timeline([0])
    timeline.record({}, HazardField())
    return SimOutcome(records, timeline, 10, False, {})


def test_survivor_rate_examples():
    assert survivor_rate(_outcome(["escaped"] * 27 + ["perished"] * 3)) == 90.0
    assert survivor_rate(_outcome(["perished"] * 120)) == 0.0
    assert survivor_rate(_outcome(["escaped"] * 120)) == 100.0
    assert survivor_rate(_outcome([])) == 100.0


def test_count_exchanges_pipeline_is_one_per_evacuee():
    outcome = _outcome(["escaped"] * 60, {eid: 9 for eid in range(60)})
    assert count_exchanges(outcome, "cpnst-td") == 60


def test_count_exchanges_live_algorithms_count_landmarks():
    outcome = _outcome(["escaped"], {0: 5})
    assert count_exchanges(outcome, "dsp") == 5
    assert count_exchanges(outcome, "cpnst") == 5


def test_count_exchanges_rejects_unknown_tag():
    with pytest.raises(ValueError):
        count_exchanges(_outcome([]), "astar")


def test_exchange_count_skips_non_landmarks():
    from evacsim.engine import run_simulation, FixedRoutePolicy
    from evacsim.config import SimParams
    from evacsim.scenario import Scenario
    from conftest import NO_SPREAD

    graph = BuildingGraph(
        [
            Vertex(0, kind="room", landmark=True),
            Vertex(1, kind="corridor", landmark=False),
            Vertex(2, kind="exit", landmark=False),
            Vertex(9, kind="room"),
        ],
        [Edge(0, 1, 5.0, "corridor", 0.0), Edge(1, 2, 5.0, "corridor", 0.0),
         Edge(9, 2, 5.0, "doorway", 0.0)],
    )
    scenario = Scenario(graph, 9, {0: 0}, SimParams(walking_speed=1.0, fire=NO_SPREAD))
    outcome = run_simulation(scenario, FixedRoutePolicy({0: (0, 1, 2)}), 1, 2)
    # only the initial room is a landmark on the path
    assert outcome.evacuees[0].exchange_count == 1


def test_estimate_elapsed_examples():
    model = CycleModel(ipc=1.0, frequency_hz=3.4e9, servers=1,
                       instruction_weights={"op": 1.0})
    assert estimate_elapsed({"op": 6_800_000_000}, model) == pytest.approx(2.0)
    assert estimate_elapsed({}, model) == 0.0


def test_estimate_elapsed_is_linear():
    model = CycleModel(instruction_weights={"a": 10.0, "b": 100.0})
    base = estimate_elapsed({"a": 5, "b": 7}, model)
    doubled = estimate_elapsed({"a": 10, "b": 14}, model)
    assert doubled == pytest.approx(2 * base)
    summed = estimate_elapsed({"a": 5}, model) + estimate_elapsed({"b": 7}, model)
    assert summed == pytest.approx(base)


def test_estimate_elapsed_divides_across_servers():
    single = CycleModel(servers=1, instruction_weights={"op": 1.0})
    fleet = CycleModel(servers=243, instruction_weights={"op": 1.0})
    work = {"op": 10**12}
    assert estimate_elapsed(work, single) == pytest.approx(
        243 * estimate_elapsed(work, fleet)
    )


def _row(algorithm="dsp", occupancy=30, seed=1, survivor=90.0, exchanges=100,
         duration=200.0, planning=0.0, truncated=False):
    return ReportRow(algorithm, occupancy, seed, survivor, exchanges,
                     duration, planning, truncated)


def test_summarize_rows_per_cell():
    rows = [
        _row(seed=1, survivor=80.0, exchanges=90),
        _row(seed=2, survivor=100.0, exchanges=110),
        _row(algorithm="cpnst", seed=1, survivor=95.0),
    ]
    summary = summarize_rows(rows)
    assert [(srow.algorithm, srow.occupancy) for srow in summary] == [
        ("cpnst", 30), ("dsp", 30)
    ]
    dsp = summary[1]
    assert dsp.runs == 2
    assert dsp.survivor_pct_mean == 90.0
    assert dsp.survivor_pct_min == 80.0
    assert dsp.survivor_pct_max == 100.0
    assert dsp.exchanges_mean == 100.0


def test_report_row_csv_round_trip():
    rows = [_row(), _row(algorithm="cpnst-td", planning=1.25, truncated=True)]
    text = [REPORT_HEADER] + [r.to_csv() for r in rows]
    parsed = parse_report_rows(text)
    assert parsed == rows


def test_parse_report_rejects_bad_header():
    with pytest.raises(ValueError, match="header"):
        parse_report_rows(["nope", "dsp,30,1,90.0,5,1.0,0.0,false"])
