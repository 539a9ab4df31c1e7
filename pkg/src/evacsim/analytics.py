"""Run metrics: survivor rate, information-exchange counts and the
instruction-counter model of planning compute time.

The elapsed-time estimate converts counted abstract operations into
instructions via per-class weights, instructions into cycles via the
instructions-per-cycle figure, and cycles into seconds by dividing evenly
across the server fleet. The ``REFERENCE_*`` constants describe the
published reference deployment this model is compared against; they are
documentation, not asserted outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .config import CycleModel
from .engine import SimOutcome

ALGORITHMS = ("cpnst", "cpnst-td", "dsp")

REPORT_HEADER = (
    "algorithm,occupancy,seed,survivor_pct,exchanges,duration_s,planning_elapsed_s,truncated"
)
SUMMARY_HEADER = (
    "algorithm,occupancy,runs,survivor_pct_mean,survivor_pct_min,survivor_pct_max,"
    "exchanges_mean,exchanges_min,exchanges_max,duration_s_mean,planning_elapsed_s_mean"
)

# Reference deployment profile: 243 servers at 3.4 GHz, one instruction
# per cycle; reported planning / reassignment costs for a 136 s evacuation.
REFERENCE_CYCLE_MODEL = CycleModel(ipc=1.0, frequency_hz=3.4e9, servers=243)
REFERENCE_PLANNING_CYCLES = 1.92e12
REFERENCE_REASSIGNMENT_CYCLES = 3.74e10
REFERENCE_PLANNING_SECONDS = 2.63
REFERENCE_REASSIGNMENT_SECONDS = 0.39
REFERENCE_EVACUATION_SECONDS = 136.0


@dataclass(frozen=True)
class ReportRow:
    algorithm: str
    occupancy: int
    seed: int
    survivor_pct: float
    exchanges: int
    duration_s: float
    planning_elapsed_s: float
    truncated: bool

    def to_csv(self) -> str:
        return (
            f"{self.algorithm},{self.occupancy},{self.seed},"
            f"{self.survivor_pct:.2f},{self.exchanges},"
            f"{self.duration_s:.1f},{self.planning_elapsed_s:.4f},"
            f"{'true' if self.truncated else 'false'}"
        )


@dataclass(frozen=True)
class SummaryRow:
    algorithm: str
    occupancy: int
    runs: int
    survivor_pct_mean: float
    survivor_pct_min: float
    survivor_pct_max: float
    exchanges_mean: float
    exchanges_min: int
    exchanges_max: int
    duration_s_mean: float
    planning_elapsed_s_mean: float

    def to_csv(self) -> str:
        return (
            f"{self.algorithm},{self.occupancy},{self.runs},"
            f"{self.survivor_pct_mean:.2f},{self.survivor_pct_min:.2f},"
            f"{self.survivor_pct_max:.2f},{self.exchanges_mean:.1f},"
            f"{self.exchanges_min},{self.exchanges_max},"
            f"{self.duration_s_mean:.1f},{self.planning_elapsed_s_mean:.4f}"
        )


def survivor_rate(outcome: SimOutcome) -> float:
    """Escaped evacuees as a percentage; an empty run counts as 100."""
    total = len(outcome.evacuees)
    if total == 0:
        return 100.0
    return 100.0 * outcome.escaped_count / total


def count_exchanges(outcome: SimOutcome, algorithm: str) -> int:
    """Two-way phone/cloud exchanges for a run of the given algorithm.

    The simulate-then-repair pipeline sends final routes up front, so it
    costs exactly one exchange per evacuee. The live algorithms re-plan on
    the way: one exchange per landmark-vertex arrival along each realized
    path, the initial vertex included.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm tag {algorithm!r}")
    if algorithm == "cpnst-td":
        return len(outcome.evacuees)
    return sum(rec.exchange_count for rec in outcome.evacuees.values())


def estimate_elapsed(counters: Mapping[str, int], model: CycleModel) -> float:
    """Seconds of fleet compute implied by the operation counters."""
    instructions = sum(
        count * model.instruction_weights.get(key, 0.0)
        for key, count in counters.items()
    )
    cycles = instructions / model.ipc
    return cycles / (model.frequency_hz * model.servers)


def summarize_rows(rows: Iterable[ReportRow]) -> list[SummaryRow]:
    """Per-(algorithm, occupancy) mean/min/max over the runs of a batch."""
    cells: dict[tuple[str, int], list[ReportRow]] = {}
    for row in rows:
        cells.setdefault((row.algorithm, row.occupancy), []).append(row)
    out = []
    for (algorithm, occupancy) in sorted(cells):
        group = cells[(algorithm, occupancy)]
        survivors = [r.survivor_pct for r in group]
        exchanges = [r.exchanges for r in group]
        out.append(
            SummaryRow(
                algorithm=algorithm,
                occupancy=occupancy,
                runs=len(group),
                survivor_pct_mean=sum(survivors) / len(group),
                survivor_pct_min=min(survivors),
                survivor_pct_max=max(survivors),
                exchanges_mean=sum(exchanges) / len(group),
                exchanges_min=min(exchanges),
                exchanges_max=max(exchanges),
                duration_s_mean=sum(r.duration_s for r in group) / len(group),
                planning_elapsed_s_mean=sum(r.planning_elapsed_s for r in group) / len(group),
            )
        )
    return out


def parse_report_rows(lines: Iterable[str]) -> list[ReportRow]:
    """Read rows back from the delimited report format."""
    rows = []
    for index, line in enumerate(lines):
        line = line.strip()
        if not line:
            continue
        if index == 0:
            if line != REPORT_HEADER:
                raise ValueError(f"unexpected report header: {line!r}")
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise ValueError(f"report row must have 8 columns: {line!r}")
        rows.append(
            ReportRow(
                algorithm=parts[0],
                occupancy=int(parts[1]),
                seed=int(parts[2]),
                survivor_pct=float(parts[3]),
                exchanges=int(parts[4]),
                duration_s=float(parts[5]),
                planning_elapsed_s=float(parts[6]),
                truncated=parts[7] == "true",
            )
        )
    return rows
