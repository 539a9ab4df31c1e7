"""Stochastic fire model: ignition, per-tick spread and intensity queries.

Ignited vertices grow linearly by ``growth_rate`` per tick, clamped to
[0, 1]. Each tick, every edge with exactly one ignited endpoint gives the
other endpoint an independent Bernoulli chance to ignite at that edge's
spread rate. All draws come from a dedicated fire RNG stream so a fire can
be replayed independently of evacuee behaviour.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .config import FireParams
from .scenario import BuildingGraph, Edge


@dataclass
class HazardField:
    """Mutable per-run fire state: vertex intensities and ignition ticks."""

    intensity: dict[int, float] = field(default_factory=dict)
    ignition_time: dict[int, int] = field(default_factory=dict)

    def intensity_at(self, vid: int) -> float:
        return self.intensity.get(vid, 0.0)

    def copy(self) -> "HazardField":
        return HazardField(dict(self.intensity), dict(self.ignition_time))


def ignite(field: HazardField, vid: int, tick: int, params: FireParams) -> HazardField:
    """Mark ``vid`` ignited at ``tick``; no-op if it already burns."""
    if vid in field.ignition_time:
        return field
    field.ignition_time[vid] = tick
    field.intensity[vid] = min(1.0, params.growth_rate)
    return field


def hazard_step(
    field: HazardField,
    graph: BuildingGraph,
    params: FireParams,
    rng: random.Random,
    tick: int,
) -> HazardField:
    """Advance the fire by one tick: grow intensities, then spread.

    Spread draws happen for every frontier edge in sorted edge order, one
    uniform draw per edge, so a fixed RNG stream replays the same fire.
    New ignitions take effect after the scan: a vertex can only catch fire
    from a neighbour that was already burning when the tick started.
    """
    burning = field.ignition_time
    for vid in burning:
        field.intensity[vid] = min(1.0, field.intensity[vid] + params.growth_rate)
    newly: list[int] = []
    for edge in graph.edges:
        u_burns = edge.u in burning
        v_burns = edge.v in burning
        if u_burns == v_burns:
            continue
        target = edge.v if u_burns else edge.u
        if rng.random() < _spread_rate(edge, params):
            newly.append(target)
    for vid in newly:
        ignite(field, vid, tick, params)
    return field


def _spread_rate(edge: Edge, params: FireParams) -> float:
    if edge.spread_rate is not None:
        return edge.spread_rate
    return params.spread_rate_by_kind[edge.kind]


def edge_intensity(field: HazardField, edge: Edge) -> float:
    """Hazard level of an edge: mean of its endpoint intensities."""
    return (field.intensity_at(edge.u) + field.intensity_at(edge.v)) / 2.0


def is_lethal(field: HazardField, params: FireParams, vid: int) -> bool:
    """True once a vertex's intensity reaches the lethal threshold."""
    return field.intensity_at(vid) >= params.lethal_threshold


def effective_length(edge: Edge, field: HazardField, penalty: float) -> float:
    """Edge routing cost in metres.

    A clean edge costs its physical length; a burning one costs
    ``L + penalty * intensity * L``, which at the default penalty makes
    any fully safe path outrank any burning one at building scale.
    """
    intensity = edge_intensity(field, edge)
    if intensity == 0.0:
        return edge.length
    return edge.length + penalty * intensity * edge.length
