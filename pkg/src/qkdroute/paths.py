"""Simple-path enumeration and internally disjoint path-set construction.

Route candidates for a node pair are sets of M simple paths that share no
interior node, so compromising the routed key requires at least one corrupt
relay on every member path.  Everything here is deterministic: paths are
oriented from the smaller endpoint and emitted in lexicographic order, which
downstream tie-breaking relies on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .model import Edge, NetworkGraph, NodeId, canonical_edge

DeficiencyFn = Union[Callable[[NodeId, NodeId], int], np.ndarray]


@dataclass(frozen=True)
class Path:
    """A simple path, stored from its smaller endpoint.

    A path and its reverse are the same object for routing purposes, so the
    constructor normalizes orientation and equality follows from ``nodes``.
    """

    nodes: Tuple[NodeId, ...]

    def __post_init__(self) -> None:
        nodes = tuple(self.nodes)
        if len(nodes) < 2:
            raise ValueError("a path needs at least two nodes")
        if len(set(nodes)) != len(nodes):
            raise ValueError(f"path revisits a node: {nodes}")
        if nodes[0] > nodes[-1]:
            nodes = nodes[::-1]
        object.__setattr__(self, "nodes", nodes)

    @property
    def endpoints(self) -> Edge:
        return (self.nodes[0], self.nodes[-1])

    @property
    def hops(self) -> int:
        return len(self.nodes) - 1

    @cached_property
    def interior(self) -> FrozenSet[NodeId]:
        return frozenset(self.nodes[1:-1])

    @cached_property
    def edges(self) -> Tuple[Edge, ...]:
        return tuple(canonical_edge(u, v) for u, v in zip(self.nodes, self.nodes[1:]))

    def __str__(self) -> str:
        return "(" + ", ".join(str(n) for n in self.nodes) + ")"


@dataclass(frozen=True)
class MPathSet:
    """A set of internally disjoint simple paths between one node pair.

    Canonical form: members sorted lexicographically by node sequence, so
    equal sets compare and hash equal regardless of construction order.
    """

    paths: Tuple[Path, ...]

    def __post_init__(self) -> None:
        paths = tuple(sorted(self.paths, key=lambda p: p.nodes))
        if not paths:
            raise ValueError("a path set needs at least one path")
        endpoints = paths[0].endpoints
        if any(p.endpoints != endpoints for p in paths):
            raise ValueError("all member paths must share the same endpoints")
        if len(set(paths)) != len(paths):
            raise ValueError("duplicate member path")
        for a, b in itertools.combinations(paths, 2):
            if a.interior & b.interior:
                raise ValueError(f"paths {a} and {b} share interior node(s)")
        object.__setattr__(self, "paths", paths)

    @property
    def endpoints(self) -> Edge:
        return self.paths[0].endpoints

    @property
    def m(self) -> int:
        return len(self.paths)

    @property
    def total_hops(self) -> int:
        return sum(p.hops for p in self.paths)

    @cached_property
    def edges(self) -> Tuple[Edge, ...]:
        return tuple(e for p in self.paths for e in p.edges)

    def sort_key(self) -> Tuple[Tuple[NodeId, ...], ...]:
        return tuple(p.nodes for p in self.paths)

    def __str__(self) -> str:
        return "{" + ", ".join(str(p) for p in self.paths) + "}"


def enumerate_simple_paths(
    graph: NetworkGraph,
    i: NodeId,
    j: NodeId,
    hop_limit: Optional[int] = None,
) -> Tuple[Path, ...]:
    """All simple paths between i and j, lexicographic by node sequence.

    Args:
        graph: network to search.
        i, j: distinct endpoints; orientation of the result is always from
            min(i, j), so (i, j) and (j, i) return the same tuple.
        hop_limit: keep only paths with at most this many hops.

    Returns:
        Paths in deterministic lexicographic order.
    """
    if i == j:
        raise ValueError("path endpoints must differ")
    for node in (i, j):
        if not (0 <= node < graph.node_count):
            raise ValueError(f"node {node} is not in the graph")
    if hop_limit is not None and hop_limit < 1:
        raise ValueError(f"hop_limit must be at least 1, got {hop_limit}")
    start, goal = (i, j) if i < j else (j, i)
    found: list[Path] = []
    visited = {start}
    trail = [start]

    def extend(u: NodeId) -> None:
        if u == goal:
            found.append(Path(tuple(trail)))
            return
        if hop_limit is not None and len(trail) - 1 >= hop_limit:
            return
        for w in graph.neighbors(u):
            if w not in visited:
                visited.add(w)
                trail.append(w)
                extend(w)
                trail.pop()
                visited.remove(w)

    extend(start)
    return tuple(found)


def enumerate_m_path_sets(paths: Sequence[Path], m: int) -> Tuple[MPathSet, ...]:
    """All size-m subsets of ``paths`` that are pairwise internally disjoint.

    Input paths must share endpoints.  Output order is lexicographic in the
    member node sequences, which is the canonical candidate order used for
    seeded tie-breaking.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    paths = sorted(paths, key=lambda p: p.nodes)
    if paths:
        endpoints = paths[0].endpoints
        if any(p.endpoints != endpoints for p in paths):
            raise ValueError("all paths must share the same endpoints")
    interiors = [p.interior for p in paths]
    sets: list[MPathSet] = []
    for combo in itertools.combinations(range(len(paths)), m):
        if all(
            not (interiors[a] & interiors[b])
            for a, b in itertools.combinations(combo, 2)
        ):
            sets.append(MPathSet(tuple(paths[k] for k in combo)))
    return tuple(sets)


def set_deficiency(path_set: MPathSet, deficiency: DeficiencyFn) -> int:
    """Worst (largest) pair deficiency over every edge of every member path.

    ``deficiency`` is either a callable d(i, j) or a symmetric matrix.
    """
    if callable(deficiency):
        values = (deficiency(u, v) for u, v in path_set.edges)
    else:
        values = (int(deficiency[u, v]) for u, v in path_set.edges)
    return max(values)


class PairPathCache:
    """Per-run memo of path and path-set enumerations, keyed by node pair.

    Not thread-safe; each routing run owns its own instance.
    """

    def __init__(self, graph: NetworkGraph, m: int, hop_limit: Optional[int] = None):
        self._graph = graph
        self._m = m
        self._hop_limit = hop_limit
        self._paths: Dict[Edge, Tuple[Path, ...]] = {}
        self._sets: Dict[Edge, Tuple[MPathSet, ...]] = {}

    def simple_paths(self, pair: Edge) -> Tuple[Path, ...]:
        key = canonical_edge(*pair)
        if key not in self._paths:
            self._paths[key] = enumerate_simple_paths(
                self._graph, key[0], key[1], self._hop_limit
            )
        return self._paths[key]

    def m_path_sets(self, pair: Edge) -> Tuple[MPathSet, ...]:
        key = canonical_edge(*pair)
        if key not in self._sets:
            self._sets[key] = enumerate_m_path_sets(self.simple_paths(key), self._m)
        return self._sets[key]


def find_unroutable_pairs(
    graph: NetworkGraph, m: int, hop_limit: Optional[int] = None
) -> Tuple[Edge, ...]:
    """Remote pairs for which no set of m internally disjoint paths exists."""
    cache = PairPathCache(graph, m, hop_limit)
    return tuple(
        pair for pair in graph.remote_pairs() if not cache.m_path_sets(pair)
    )
