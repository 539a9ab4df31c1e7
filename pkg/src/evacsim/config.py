"""Parameter sets shared across the simulator.

Every tunable constant lives in one of the frozen dataclasses below so a
scenario document can override any of them. Defaults are chosen for the
bundled reference building; none of them is hard-coded anywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

VERTEX_KINDS = ("room", "corridor", "doorway", "staircase", "exit")
EDGE_KINDS = ("corridor", "doorway", "staircase")

DEFAULT_SPREAD_RATES: Mapping[str, float] = {
    "doorway": 0.02,
    "corridor": 0.01,
    "staircase": 0.005,
}

# Abstract operation classes counted during a run. Weights are instructions
# per counted operation on the modeled server fleet, calibrated once so a
# 120-evacuee planning run on the bundled building lands near the reference
# deployment's reported compute cost (see analytics.REFERENCE_*). They are
# config, not measurements.
DEFAULT_INSTRUCTION_WEIGHTS: Mapping[str, float] = {
    "sim_event": 1.0e7,
    "tick": 5.0e7,
    "sp_hop": 2.0e7,
    "rnn_sweep": 1.0e7,
    "ack_update": 2.0e7,
    "edge_relax": 5.0e6,
    "planner_query": 5.0e6,
}


class ConfigError(ValueError):
    """A parameter value violates its documented range."""


@dataclass(frozen=True)
class FireParams:
    """Stochastic fire model constants."""

    spread_rate_by_kind: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_SPREAD_RATES)
    )
    growth_rate: float = 0.05
    lethal_threshold: float = 0.7

    def __post_init__(self) -> None:
        for kind, rate in self.spread_rate_by_kind.items():
            if kind not in EDGE_KINDS:
                raise ConfigError(f"unknown edge kind in spread rates: {kind!r}")
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"spread rate for {kind!r} outside [0, 1]: {rate}")
        if self.growth_rate <= 0.0:
            raise ConfigError(f"growth_rate must be positive: {self.growth_rate}")
        if not 0.0 < self.lethal_threshold <= 1.0:
            raise ConfigError(
                f"lethal_threshold outside (0, 1]: {self.lethal_threshold}"
            )


@dataclass(frozen=True)
class CpnParams:
    """Cognitive-packet exploration and reinforcement constants."""

    drift: float = 0.1
    sp_per_node_per_tick: int = 1
    mailbox_capacity: int = 5
    mailbox_ttl: int = 30  # ticks before an unrefreshed route is ignored; 0 = keep forever
    learning_rate: float = 0.1
    threshold_smoothing: float = 0.8
    initial_weight: float = 0.01
    dead_end_inhibition: float = 50.0
    hazard_guard_fraction: float = 0.5  # refuse hops burning at this share of lethal
    hop_budget_factor: int = 2

    def __post_init__(self) -> None:
        if not 0.0 <= self.drift <= 1.0:
            raise ConfigError(f"drift outside [0, 1]: {self.drift}")
        if self.sp_per_node_per_tick < 0:
            raise ConfigError("sp_per_node_per_tick must be >= 0")
        if self.mailbox_capacity < 1:
            raise ConfigError("mailbox_capacity must be >= 1")
        if self.mailbox_ttl < 0:
            raise ConfigError("mailbox_ttl must be >= 0")
        if self.learning_rate <= 0.0:
            raise ConfigError("learning_rate must be positive")
        if not 0.0 < self.threshold_smoothing < 1.0:
            raise ConfigError("threshold_smoothing must lie in (0, 1)")
        if self.initial_weight <= 0.0:
            raise ConfigError("initial_weight must be positive")
        if self.dead_end_inhibition < 1.0:
            raise ConfigError("dead_end_inhibition must be >= 1")
        if not 0.0 < self.hazard_guard_fraction <= 1.0:
            raise ConfigError("hazard_guard_fraction must lie in (0, 1]")
        if self.hop_budget_factor < 1:
            raise ConfigError("hop_budget_factor must be >= 1")


@dataclass(frozen=True)
class CycleModel:
    """Maps counted abstract operations to CPU time on a server fleet."""

    ipc: float = 1.0
    frequency_hz: float = 3.4e9
    servers: int = 243
    instruction_weights: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_INSTRUCTION_WEIGHTS)
    )

    def __post_init__(self) -> None:
        if self.ipc <= 0.0:
            raise ConfigError("ipc must be positive")
        if self.frequency_hz <= 0.0:
            raise ConfigError("frequency_hz must be positive")
        if self.servers < 1:
            raise ConfigError("servers must be >= 1")


@dataclass(frozen=True)
class SimParams:
    """Run-wide simulation constants."""

    walking_speed: float = 1.4  # metres per second
    tick_seconds: float = 1.0
    hazard_penalty: float = 1000.0  # effective-length multiplier on burning edges
    tick_cap: int = 3600
    fire: FireParams = field(default_factory=FireParams)
    cpn: CpnParams = field(default_factory=CpnParams)
    cycle_model: CycleModel = field(default_factory=CycleModel)

    def __post_init__(self) -> None:
        if self.walking_speed <= 0.0:
            raise ConfigError("walking_speed must be positive")
        if self.tick_seconds <= 0.0:
            raise ConfigError("tick_seconds must be positive")
        if self.hazard_penalty <= 0.0:
            raise ConfigError("hazard_penalty must be positive")
        if self.tick_cap < 1:
            raise ConfigError("tick_cap must be >= 1")
