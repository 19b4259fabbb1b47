"""Network topology, rate matrices and structural validation.

A network is an undirected graph whose edges carry secret-key generation
rates, plus a symmetric matrix of target rates for every node pair.  Rates
are integers in the units fixed by the graph's :class:`~qkdroute.units.UnitScale`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .units import UnitScale

NodeId = int
Edge = Tuple[NodeId, NodeId]


class ValidationError(ValueError):
    """A structurally invalid network or configuration."""


def canonical_edge(u: NodeId, v: NodeId) -> Edge:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class NetworkGraph:
    """Undirected graph with per-edge key rates.

    ``rates`` maps canonical edges (u < v) to positive integer rate units.
    Instances are treated as immutable after construction.
    """

    node_count: int
    rates: Mapping[Edge, int]
    scale: UnitScale = field(default_factory=UnitScale)

    def __post_init__(self) -> None:
        if self.node_count < 2:
            raise ValidationError(f"need at least 2 nodes, got {self.node_count}")
        clean: dict[Edge, int] = {}
        adj: dict[NodeId, list[NodeId]] = {u: [] for u in range(self.node_count)}
        for (u, v), rate in self.rates.items():
            if u == v:
                raise ValidationError(f"self-loop on node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise ValidationError(f"edge ({u}, {v}) references an unknown node")
            key = canonical_edge(u, v)
            if key in clean:
                raise ValidationError(f"duplicate edge ({key[0]}, {key[1]})")
            if not isinstance(rate, (int, np.integer)) or isinstance(rate, bool):
                raise ValidationError(f"rate for edge {key} must be an integer unit count")
            if rate <= 0:
                raise ValidationError(f"rate for edge {key} must be positive, got {rate}")
            clean[key] = int(rate)
            adj[key[0]].append(key[1])
            adj[key[1]].append(key[0])
        if not clean:
            raise ValidationError("network has no edges")
        object.__setattr__(self, "rates", clean)
        object.__setattr__(self, "_adjacency", {u: tuple(sorted(ws)) for u, ws in adj.items()})

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return tuple(sorted(self.rates))

    def has_edge(self, u: NodeId, v: NodeId) -> bool:
        return canonical_edge(u, v) in self.rates

    def rate(self, u: NodeId, v: NodeId) -> int:
        """Rate units on edge (u, v); 0 for node pairs with no direct link."""
        return self.rates.get(canonical_edge(u, v), 0)

    def neighbors(self, u: NodeId) -> Tuple[NodeId, ...]:
        return self._adjacency[u]  # type: ignore[attr-defined]

    def degree(self, u: NodeId) -> int:
        return len(self.neighbors(u))

    def rate_matrix(self) -> np.ndarray:
        """Symmetric int64 matrix of edge rates, zero where no edge exists."""
        mat = np.zeros((self.node_count, self.node_count), dtype=np.int64)
        for (u, v), rate in self.rates.items():
            mat[u, v] = rate
            mat[v, u] = rate
        return mat

    def is_connected(self) -> bool:
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for w in self.neighbors(u):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == self.node_count

    def remote_pairs(self) -> Tuple[Edge, ...]:
        """All unordered node pairs without a direct link."""
        return tuple(
            (i, j)
            for i in range(self.node_count)
            for j in range(i + 1, self.node_count)
            if not self.has_edge(i, j)
        )


def uniform_target(node_count: int, units: int) -> np.ndarray:
    """Target matrix demanding the same rate for every distinct pair."""
    if units < 0:
        raise ValidationError(f"target must be non-negative, got {units}")
    mat = np.full((node_count, node_count), int(units), dtype=np.int64)
    np.fill_diagonal(mat, 0)
    return mat


def target_from_rows(rows: Sequence[Sequence[int]], node_count: int) -> np.ndarray:
    mat = np.asarray(rows, dtype=np.int64)
    check_target_matrix(mat, node_count)
    return mat


def check_target_matrix(target: np.ndarray, node_count: int) -> None:
    if target.shape != (node_count, node_count):
        raise ValidationError(
            f"target matrix must be {node_count}x{node_count}, got {target.shape}"
        )
    if not np.array_equal(target, target.T):
        raise ValidationError("target matrix must be symmetric")
    if np.any(np.diagonal(target) != 0):
        raise ValidationError("target matrix diagonal must be zero")
    if np.any(target < 0):
        raise ValidationError("target rates must be non-negative")


@dataclass(frozen=True)
class ValidationReport:
    """Structural fitness of a network for routing with M disjoint paths."""

    min_degree: int
    degree_violations: Tuple[NodeId, ...]
    connected: bool
    # filled in by qkdroute.paths.find_unroutable_pairs when a scan is requested
    remote_pairs_without_m_sets: Optional[Tuple[Edge, ...]] = None

    @property
    def ok(self) -> bool:
        return self.connected and not self.degree_violations


def validate(graph: NetworkGraph, m: int) -> ValidationReport:
    """Check degree and connectivity prerequisites for M-path routing.

    Every node needs degree >= m for m internally disjoint paths to pass
    through (or originate at) it.

    Args:
        graph: the network to inspect.
        m: number of disjoint paths per route set, at least 1.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    degrees = [graph.degree(u) for u in range(graph.node_count)]
    violations = tuple(u for u, d in enumerate(degrees) if d < m)
    return ValidationReport(
        min_degree=min(degrees),
        degree_violations=violations,
        connected=graph.is_connected(),
    )


@dataclass(frozen=True)
class RouterConfig:
    """Parameters of one routing run.

    ``delta_r`` is the per-iteration rate step in integer units; it must be
    set (and positive) before a run starts.  ``r_max`` and ``hop_limit`` are
    unbounded when None.
    """

    m: int = 2
    delta_r: Optional[int] = None
    r_max: Optional[int] = None
    seed: int = 0
    hop_limit: Optional[int] = None
    strict_guard: bool = True

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValidationError(f"m must be at least 1, got {self.m}")
        if self.delta_r is not None and self.delta_r <= 0:
            raise ValidationError(f"delta_r must be positive, got {self.delta_r}")
        if self.r_max is not None and self.r_max < 0:
            raise ValidationError(f"r_max must be non-negative, got {self.r_max}")
        if self.hop_limit is not None and self.hop_limit < 1:
            raise ValidationError(f"hop_limit must be at least 1, got {self.hop_limit}")
        if not (0 <= self.seed < 2**64):
            raise ValidationError("seed must fit in 64 bits")
