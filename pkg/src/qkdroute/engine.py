"""Greedy iterative routing of key rate over disjoint path sets.

Each iteration finds the node pair whose effective rate falls furthest short
of its target, picks the least-loaded set of M internally disjoint paths for
it, and moves one rate step delta_r from the member edges to the pair.  The
loop stops when no pair is short, when the iteration budget runs out, or when
one of the structural dead ends below is hit.

All rates are integer units, so cost comparisons and the step accounting are
exact.  Randomness is confined to tie-breaking: one draw from a seeded PCG64
generator per tie with two or more candidates, taken over the candidates in
canonical order.  Runs are bit-reproducible for a given input and seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .model import (
    Edge,
    NetworkGraph,
    NodeId,
    RouterConfig,
    ValidationError,
    check_target_matrix,
    validate,
)
from .paths import MPathSet, PairPathCache, set_deficiency


class GuardViolation(RuntimeError):
    """An increment would drive an edge below one rate step."""


class StopReason(str, enum.Enum):
    CONVERGED = "converged"
    R_MAX = "r_max"
    DIRECT_PAIR_WORST = "direct_pair_worst"
    COST_WORSENED = "cost_worsened"
    NO_M_SET = "no_m_set"
    GUARD_EXHAUSTED = "guard_exhausted"


@dataclass(frozen=True)
class RoutingRecord:
    """One routed path set and the total rate assigned to it."""

    path_set: MPathSet
    rate: int

    @property
    def pair(self) -> Edge:
        return self.path_set.endpoints


class RoutingList:
    """Accumulated routing decisions, at most one record per canonical set."""

    def __init__(self) -> None:
        self._rates: Dict[MPathSet, int] = {}

    def add(self, path_set: MPathSet, delta_r: int) -> None:
        self._rates[path_set] = self._rates.get(path_set, 0) + delta_r

    def records(self) -> Tuple[RoutingRecord, ...]:
        """Records sorted by endpoints, then member node sequences."""
        ordered = sorted(self._rates.items(), key=lambda kv: kv[0].sort_key())
        return tuple(RoutingRecord(s, rate) for s, rate in ordered)

    def rate_for_pair(self, pair: Edge) -> int:
        i, j = min(pair), max(pair)
        return sum(
            rate for s, rate in self._rates.items() if s.endpoints == (i, j)
        )

    def pairs(self) -> Tuple[Edge, ...]:
        return tuple(sorted({s.endpoints for s in self._rates}))

    def __len__(self) -> int:
        return len(self._rates)

    def __contains__(self, path_set: MPathSet) -> bool:
        return path_set in self._rates

    def __getitem__(self, path_set: MPathSet) -> int:
        return self._rates[path_set]


@dataclass(frozen=True)
class IterationTrace:
    """One accepted increment, or the terminal event that ended the run.

    Exactly one trace entry per run carries a ``stop_reason``; it is always
    the last one.  ``delta_after`` on a ``cost_worsened`` entry is the
    rejected cost, recorded before rollback.
    """

    r: int
    selected_pair: Optional[Edge]
    pairs_tied: int
    chosen_set: Optional[MPathSet]
    sets_tied: int
    delta_before: int
    delta_after: int
    stop_reason: Optional[StopReason] = None
    # per-candidate (set, deficiency) pairs, kept only when requested
    candidates: Optional[Tuple[Tuple[MPathSet, int], ...]] = None


@dataclass(frozen=True)
class RoutingOutcome:
    routing_list: RoutingList
    effective: np.ndarray
    trace: Tuple[IterationTrace, ...]
    final_delta: int
    iterations: int

    @property
    def stop_reason(self) -> StopReason:
        reason = self.trace[-1].stop_reason
        assert reason is not None
        return reason


def cost_delta(target: np.ndarray, effective: np.ndarray) -> int:
    """Largest shortfall target - effective over unordered pairs i != j."""
    n = target.shape[0]
    iu = np.triu_indices(n, k=1)
    return int((target[iu] - effective[iu]).max())


def _choose(rng: np.random.Generator, items: Sequence) -> Tuple[object, int]:
    """Uniform pick; consumes one draw only when there is a real tie."""
    if len(items) == 1:
        return items[0], 1
    index = int(rng.integers(len(items)))
    return items[index], len(items)


def worst_pairs(deficiency: np.ndarray) -> List[Edge]:
    """All unordered pairs attaining the maximum deficiency, in row order."""
    n = deficiency.shape[0]
    iu = np.triu_indices(n, k=1)
    values = deficiency[iu]
    top = values.max()
    return [
        (int(iu[0][k]), int(iu[1][k]))
        for k in np.flatnonzero(values == top)
    ]


def select_worst_pair(
    deficiency: np.ndarray, rng: np.random.Generator
) -> Edge:
    """Uniformly random element of the argmax of the pair deficiency."""
    pair, _ = _choose(rng, worst_pairs(deficiency))
    return pair  # type: ignore[return-value]


def optimal_sets(
    candidates: Sequence[MPathSet], deficiency: np.ndarray
) -> List[MPathSet]:
    """Least-deficient candidates, narrowed to minimal total hop count."""
    scored = [(set_deficiency(s, deficiency), s) for s in candidates]
    best = min(score for score, _ in scored)
    pool = [s for score, s in scored if score == best]
    shortest = min(s.total_hops for s in pool)
    return [s for s in pool if s.total_hops == shortest]


def select_optimal_set(
    candidates: Sequence[MPathSet],
    deficiency: np.ndarray,
    rng: np.random.Generator,
) -> MPathSet:
    """Pick among optimal candidates, resolving residual ties by seed."""
    if not candidates:
        raise ValueError("no candidate path sets")
    chosen, _ = _choose(rng, optimal_sets(candidates, deficiency))
    return chosen  # type: ignore[return-value]


def apply_increment(
    effective: np.ndarray,
    pair: Edge,
    path_set: MPathSet,
    delta_r: int,
    strict_guard: bool = False,
) -> np.ndarray:
    """Move delta_r of rate from the member edges onto the pair.

    Returns a new matrix; the input is left untouched so a caller can keep
    it as the rollback state.

    Raises:
        GuardViolation: with ``strict_guard``, when any member edge holds
            less than delta_r before the decrement.
    """
    i, j = pair
    if (min(i, j), max(i, j)) != path_set.endpoints:
        raise ValueError(
            f"pair ({i}, {j}) does not match path set endpoints {path_set.endpoints}"
        )
    if delta_r < 0:
        raise ValueError(f"delta_r must be non-negative, got {delta_r}")
    if strict_guard:
        for u, v in path_set.edges:
            if effective[u, v] < delta_r:
                raise GuardViolation(
                    f"edge ({u}, {v}) holds {int(effective[u, v])} < {delta_r}"
                )
    out = effective.copy()
    out[i, j] += delta_r
    out[j, i] += delta_r
    for u, v in path_set.edges:
        out[u, v] -= delta_r
        out[v, u] -= delta_r
    return out


def _guard_ok(path_set: MPathSet, effective: np.ndarray, delta_r: int) -> bool:
    return all(effective[u, v] >= delta_r for u, v in path_set.edges)


def run(
    graph: NetworkGraph,
    target: np.ndarray,
    config: RouterConfig,
    trace_candidates: bool = False,
) -> RoutingOutcome:
    """Route key rate until every pair meets its target or a stop is hit.

    Args:
        graph: connected network with positive edge rates.
        target: symmetric target matrix in the same units as the graph.
        config: run parameters; ``config.delta_r`` must be set.
        trace_candidates: record per-iteration candidate deficiencies in the
            trace (memory-heavy on long runs, meant for audits and demos).

    Returns:
        The routing list, final effective matrix, per-iteration trace,
        final cost and accepted iteration count.
    """
    check_target_matrix(target, graph.node_count)
    if config.delta_r is None or config.delta_r <= 0:
        raise ValidationError("config.delta_r must be a positive unit count")
    report = validate(graph, config.m)
    if not report.connected:
        raise ValidationError("graph must be connected")

    rng = np.random.default_rng(config.seed)
    cache = PairPathCache(graph, config.m, config.hop_limit)
    routing = RoutingList()
    trace: List[IterationTrace] = []
    effective = graph.rate_matrix()
    delta = cost_delta(target, effective)
    r = 0

    def outcome() -> RoutingOutcome:
        return RoutingOutcome(routing, effective, tuple(trace), delta, r)

    def stop(
        reason: StopReason,
        pair: Optional[Edge] = None,
        pairs_tied: int = 0,
        chosen: Optional[MPathSet] = None,
        delta_after: Optional[int] = None,
    ) -> RoutingOutcome:
        trace.append(
            IterationTrace(
                r=r,
                selected_pair=pair,
                pairs_tied=pairs_tied,
                chosen_set=chosen,
                sets_tied=0,
                delta_before=delta,
                delta_after=delta if delta_after is None else delta_after,
                stop_reason=reason,
            )
        )
        return outcome()

    while delta > 0 and (config.r_max is None or r < config.r_max):
        deficiency = target - effective
        pair, pairs_tied = _choose(rng, worst_pairs(deficiency))
        if graph.has_edge(*pair):
            # the bottleneck is a direct link; no amount of re-routing
            # helps it, so the run ends here
            return stop(StopReason.DIRECT_PAIR_WORST, pair, pairs_tied)
        candidates = cache.m_path_sets(pair)
        if not candidates:
            return stop(StopReason.NO_M_SET, pair, pairs_tied)
        if config.strict_guard:
            candidates = tuple(
                s for s in candidates if _guard_ok(s, effective, config.delta_r)
            )
            if not candidates:
                return stop(StopReason.GUARD_EXHAUSTED, pair, pairs_tied)
        finalists = optimal_sets(candidates, deficiency)
        chosen, sets_tied = _choose(rng, finalists)
        updated = apply_increment(
            effective, pair, chosen, config.delta_r, strict_guard=config.strict_guard
        )
        new_delta = cost_delta(target, updated)
        if new_delta > delta:
            # reject and roll back: `effective` was never mutated
            return stop(
                StopReason.COST_WORSENED, pair, pairs_tied, chosen, new_delta
            )
        routing.add(chosen, config.delta_r)
        r += 1
        trace.append(
            IterationTrace(
                r=r,
                selected_pair=pair,
                pairs_tied=pairs_tied,
                chosen_set=chosen,
                sets_tied=sets_tied,
                delta_before=delta,
                delta_after=new_delta,
                candidates=tuple(
                    (s, set_deficiency(s, deficiency)) for s in candidates
                )
                if trace_candidates
                else None,
            )
        )
        effective = updated
        delta = new_delta

    return stop(StopReason.CONVERGED if delta <= 0 else StopReason.R_MAX)
