"""Cognitive-packet routing with a time metric.

Each non-exit vertex hosts a decision unit: a ranked mailbox of
discovered exit routes and one neuron per neighbour with excitatory and
inhibitory rates. Smart packets explore hop by hop (random with the drift
probability, otherwise toward the most excited neuron, never revisiting a
vertex) and record queue lengths and effective edge lengths as they go.
A packet reaching an exit acknowledges back along its route: every node
on the route learns the route suffix and its estimated time, and
reinforces the neighbour the suffix used.

Neuron excitation solves the balance fixed point

    q_i = w+_i / (R + w-_i + sum_{j != i} q_j * w+_j / (n - 1))

with R the total rate ``sum_j (w+_j + w-_j)``: a neighbour's learned
excitation competes laterally against the others. Iteration is
Gauss-Seidel to 1e-9 (at most 1000 sweeps); all excitations stay in
[0, 1) for reachable (positive) weight states.

Evacuees follow the top-ranked mailbox route, re-read at every vertex;
an empty or stale mailbox falls back to the static hazard-aware path.
"""

from __future__ import annotations

import random
from bisect import insort
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .config import CpnParams
from .engine import Counters, EngineView, RoutingPolicy
from .hazard import effective_length
from .routing import dsp_route


class RnnError(RuntimeError):
    """Fixed-point iteration failed to converge or saturated."""


@dataclass(frozen=True)
class MailboxEntry:
    est_time: float  # seconds, per the observed-time metric
    route: tuple[int, ...]  # this node first, an exit last
    freshness: int  # tick of the latest supporting acknowledgement
    hazard_exposed: bool = False  # measurement saw fire somewhere en route


@dataclass(frozen=True)
class SmartPacket:
    origin: int
    visited: tuple[int, ...]
    edge_lengths: tuple[float, ...]  # effective metres per traversed edge
    queue_counts: tuple[int, ...]  # queue seen at each visited vertex


@dataclass(frozen=True)
class Ack:
    reverse_route: tuple[int, ...]  # exit first, the receiving node last
    measured_time: float  # seconds over the forward route
    hazard_exposed: bool = False  # any hop measured above its physical length


@dataclass
class CpnNodeState:
    node: int
    neighbors: tuple[int, ...]
    mailbox: list[MailboxEntry] = field(default_factory=list)
    weights: dict[int, list[float]] = field(default_factory=dict)  # [w+, w-]
    reward_threshold: float = 0.0
    _q_cache: dict[int, float] | None = None

    @classmethod
    def fresh(
        cls,
        node: int,
        neighbors: Sequence[int],
        params: CpnParams,
        rng: random.Random | None = None,
        dead_ends: frozenset[int] = frozenset(),
    ) -> "CpnNodeState":
        """Untrained unit.

        With ``rng``, excitatory rates carry seeded jitter so untrained
        greedy walks fan out instead of herding. Neighbours flagged as
        dead ends start strongly inhibited: stepping into one kills an
        exploring packet, so only drift should ever try them.
        """
        base = params.initial_weight
        weights = {}
        for w in sorted(neighbors):
            jitter = base * rng.random() if rng is not None else 0.0
            minus = base * (params.dead_end_inhibition if w in dead_ends else 1.0)
            weights[w] = [base + jitter, minus]
        return cls(node=node, neighbors=tuple(sorted(neighbors)), weights=weights)

    def excitations(self, counters: Counters | None = None) -> dict[int, float]:
        if self._q_cache is None:
            self._q_cache = rnn_steady_state(self.weights, counters=counters)
        return self._q_cache

    def invalidate(self) -> None:
        self._q_cache = None


def rnn_steady_state(
    weights: Mapping[int, Sequence[float]],
    counters: Counters | None = None,
    tolerance: float = 1e-9,
    max_sweeps: int = 1000,
) -> dict[int, float]:
    """Per-neighbour steady-state excitation of the decision unit.

    Raises :class:`RnnError` when the iteration fails to converge or any
    excitation saturates at 1 (pathological weights).
    """
    if not weights:
        raise ValueError("decision unit needs at least one neighbour")
    order = sorted(weights)
    total_rate = 0.0
    for nid in order:
        plus, minus = weights[nid]
        if plus < 0.0 or minus < 0.0:
            raise ValueError(f"negative rate for neighbour {nid}")
        total_rate += plus + minus
    if total_rate <= 0.0:
        raise RnnError(f"all rates zero: {dict(weights)}")
    n = len(order)
    q = {nid: 0.0 for nid in order}
    for _ in range(max_sweeps):
        if counters is not None:
            counters.bump("rnn_sweep")
        # Jacobi sweeps: symmetric weights keep exactly symmetric q.
        excited = sum(q[o] * weights[o][0] for o in order)
        delta = 0.0
        nxt: dict[int, float] = {}
        for nid in order:
            plus, minus = weights[nid]
            lateral = (excited - q[nid] * plus) / (n - 1) if n > 1 else 0.0
            value = plus / (total_rate + minus + lateral)
            if value >= 1.0:
                raise RnnError(f"excitation saturated for neighbour {nid}: {dict(weights)}")
            delta = max(delta, abs(value - q[nid]))
            nxt[nid] = value
        q = nxt
        if delta < tolerance:
            return q
    raise RnnError(f"no convergence within {max_sweeps} sweeps: {dict(weights)}")


def _choose_next(
    state: CpnNodeState,
    seen: set[int],
    params: CpnParams,
    rng: random.Random,
    counters: Counters | None,
) -> int | None:
    candidates = [w for w in state.neighbors if w not in seen]
    if not candidates:
        return None
    if rng.random() < params.drift:
        return candidates[rng.randrange(len(candidates))]
    q = state.excitations(counters)
    return max(candidates, key=lambda w: (q[w], -w))


def sp_next_hop(
    state: CpnNodeState,
    sp: SmartPacket,
    params: CpnParams,
    rng: random.Random,
    counters: Counters | None = None,
) -> int | None:
    """Choose the packet's next hop, or ``None`` to kill a looped packet."""
    return _choose_next(state, set(sp.visited), params, rng, counters)


def path_time_estimate(
    route: Sequence[int],
    edge_lengths: Sequence[float],
    queue_counts: Sequence[int],
    walking_speed: float,
    departure_rates: Sequence[float],
) -> float:
    """Observed-time metric of a route ending at an exit.

    Sums per hop the effective length over the walking speed plus the
    queueing delay at the hop's starting vertex; the final exit
    contributes no queue term. A route of one vertex (already at the
    exit) costs zero.
    """
    hops = len(route) - 1
    if hops < 0:
        raise ValueError("route must contain at least one vertex")
    if len(edge_lengths) != hops or len(queue_counts) < hops or len(departure_rates) < hops:
        raise ValueError("per-hop samples must cover every hop of the route")
    total = 0.0
    for i in range(hops):
        total += edge_lengths[i] / walking_speed + queue_counts[i] / departure_rates[i]
    return total


def handle_ack(
    state: CpnNodeState,
    ack: Ack,
    params: CpnParams,
    tick: int = 0,
    counters: Counters | None = None,
) -> CpnNodeState:
    """Store the acknowledged route suffix and reinforce the decision unit."""
    if counters is not None:
        counters.bump("ack_update")
    route = tuple(reversed(ack.reverse_route))
    if route[0] != state.node:
        raise ValueError(f"acknowledgement for node {route[0]} handled at {state.node}")
    entry = MailboxEntry(
        est_time=ack.measured_time,
        route=route,
        freshness=tick,
        hazard_exposed=ack.hazard_exposed,
    )
    state.mailbox = [e for e in state.mailbox if e.route != route]
    insort(state.mailbox, entry, key=lambda e: (e.est_time, e.route))
    del state.mailbox[params.mailbox_capacity:]

    if len(route) < 2 or ack.measured_time <= 0.0:
        return state
    used = route[1]
    if used not in state.weights:
        return state
    # Reward is the inverse route time; the smoothed threshold decides the
    # update direction. The step size is weight-scaled rather than
    # reward-scaled so adaptation speed does not depend on route length.
    reward = 1.0 / ack.measured_time
    bump = params.learning_rate * params.initial_weight
    others = [w for w in state.neighbors if w != used]
    if reward >= state.reward_threshold:
        state.weights[used][0] += bump
        for w in others:
            state.weights[w][1] += bump / len(others)
    else:
        state.weights[used][1] += bump
        for w in others:
            state.weights[w][0] += bump / len(others)
    a = params.threshold_smoothing
    state.reward_threshold = a * state.reward_threshold + (1.0 - a) * reward
    state.invalidate()
    return state


def cpnst_next_hop(
    evacuee_id: int,
    state: CpnNodeState,
    tick: int = 0,
    ttl: int = 0,
    blocked: frozenset[int] = frozenset(),
) -> int | None:
    """Next hop of the top-ranked usable mailbox route; ``None`` otherwise.

    A route is usable when its first hop is still adjacent and not in
    ``blocked`` (vertices visibly burning), its measurement saw no fire,
    and its entry has been refreshed within ``ttl`` ticks (0 disables
    expiry). Anything else falls back to the caller's static routing.
    """
    for entry in state.mailbox:
        if entry.hazard_exposed:
            continue
        if ttl and tick - entry.freshness > ttl:
            continue
        if len(entry.route) < 2:
            continue
        hop = entry.route[1]
        if hop in state.neighbors and hop not in blocked:
            return hop
    return None


def cpn_tick(
    network: Mapping[int, CpnNodeState],
    view: EngineView,
    params: CpnParams,
    tick: int,
) -> None:
    """One round of exploration: launch packets from every occupied vertex.

    Each packet walks until it loops out, exhausts the hop budget or
    reaches an exit; on success an acknowledgement updates every node
    along the route with its measured suffix time.
    """
    graph = view.graph
    budget = params.hop_budget_factor * len(graph)
    for origin in view.occupied_vertices():
        if graph.is_exit(origin):
            continue
        for _ in range(params.sp_per_node_per_tick):
            sp = _explore(origin, network, view, params, budget)
            if sp is not None:
                _acknowledge(sp, network, view, params, tick)


def _explore(
    origin: int,
    network: Mapping[int, CpnNodeState],
    view: EngineView,
    params: CpnParams,
    budget: int,
) -> SmartPacket | None:
    graph = view.graph
    visited = [origin]
    seen = {origin}
    lengths: list[float] = []
    queues: list[int] = [view.queue_len(origin)]
    current = origin
    for _ in range(budget):
        nxt = _choose_next(network[current], seen, params, view.rng, view.counters)
        if nxt is None:
            return None
        view.counters.bump("sp_hop")
        edge = graph.edge_between(current, nxt)
        lengths.append(effective_length(edge, view.field, view.params.hazard_penalty))
        visited.append(nxt)
        seen.add(nxt)
        current = nxt
        if graph.is_exit(current):
            return SmartPacket(
                origin=origin,
                visited=tuple(visited),
                edge_lengths=tuple(lengths),
                queue_counts=tuple(queues),
            )
        queues.append(view.queue_len(current))
    return None


def _acknowledge(
    sp: SmartPacket,
    network: Mapping[int, CpnNodeState],
    view: EngineView,
    params: CpnParams,
    tick: int,
) -> None:
    graph = view.graph
    route = sp.visited
    hops = len(route) - 1
    rates = [graph.vertex(route[i]).departure_rate for i in range(hops)]
    # Suffix times and fire exposure from the exit backwards.
    suffix = [0.0] * (hops + 1)
    exposed = [False] * (hops + 1)
    for i in range(hops - 1, -1, -1):
        suffix[i] = (
            suffix[i + 1]
            + sp.edge_lengths[i] / view.params.walking_speed
            + sp.queue_counts[i] / rates[i]
        )
        physical = graph.edge_between(route[i], route[i + 1]).length
        exposed[i] = exposed[i + 1] or sp.edge_lengths[i] > physical
    for i in range(hops):
        ack = Ack(
            reverse_route=tuple(reversed(route[i:])),
            measured_time=suffix[i],
            hazard_exposed=exposed[i],
        )
        handle_ack(network[route[i]], ack, params, tick, view.counters)


def mailbox_snapshot_rows(
    network: Mapping[int, CpnNodeState]
) -> list[tuple[int, int, float, int, bool, str]]:
    """Debug export: (node, rank, est_time, freshness, exposed, route) rows."""
    rows = []
    for vid in sorted(network):
        for rank, entry in enumerate(network[vid].mailbox):
            rows.append(
                (
                    vid,
                    rank,
                    entry.est_time,
                    entry.freshness,
                    entry.hazard_exposed,
                    "-".join(str(v) for v in entry.route),
                )
            )
    return rows


class CpnstPolicy(RoutingPolicy):
    """Follow the top-ranked mailbox route, falling back to the static path."""

    def __init__(self) -> None:
        self.network: dict[int, CpnNodeState] = {}

    def begin_run(self, view: EngineView) -> None:
        params = view.params.cpn
        graph = view.graph
        dead_ends = frozenset(
            vid
            for vid in graph.sorted_vertex_ids()
            if len(graph.neighbors(vid)) == 1 and not graph.is_exit(vid)
        )
        self.network = {
            vid: CpnNodeState.fresh(vid, graph.neighbors(vid), params, view.rng, dead_ends)
            for vid in graph.sorted_vertex_ids()
            if not graph.is_exit(vid)
        }

    def on_tick(self, view: EngineView, tick: int) -> None:
        cpn_tick(self.network, view, view.params.cpn, tick)

    def next_hop(self, evacuee_id: int, vertex: int, view: EngineView, tick: int) -> int | None:
        view.counters.bump("planner_query")
        state = self.network[vertex]
        guard = (
            view.params.fire.lethal_threshold
            * view.params.cpn.hazard_guard_fraction
        )
        blocked = frozenset(
            w for w in state.neighbors if view.field.intensity_at(w) >= guard
        )
        hop = cpnst_next_hop(
            evacuee_id, state, tick, view.params.cpn.mailbox_ttl, blocked
        )
        if hop is not None:
            return hop
        route = dsp_route(
            view.graph, view.field, vertex, view.params.hazard_penalty, view.counters
        )
        if route is None or len(route) < 2:
            return None
        return route[1]
