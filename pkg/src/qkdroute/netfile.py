"""Reading and writing network description files.

The wire format is JSON::

    {
      "nodes": 6,
      "edges": [{"u": 0, "v": 1, "rate_kbps": 1.0}, ...],
      "target": 0.1,                  # scalar or full NxN matrix, kbit/s
      "router": {"M": 2, "delta_r_kbps": 0.01, "r_max": null,
                 "seed": 0, "hop_limit": null, "strict_guard": true},
      "resolution_bps": 1             # optional rate quantum, bit/s
    }

Numbers are parsed as decimals so fractional kbit/s values convert to
integer units exactly or are rejected, never silently rounded.
"""

from __future__ import annotations

import json
from decimal import Decimal
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np

from .model import (
    NetworkGraph,
    RouterConfig,
    ValidationError,
    check_target_matrix,
    uniform_target,
)
from .units import UnitScale, as_decimal


class NetworkFormatError(ValueError):
    """Malformed network description file."""


class LoadedNetwork(NamedTuple):
    graph: NetworkGraph
    target: np.ndarray
    config: RouterConfig


_ROUTER_KEYS = {"M", "delta_r_kbps", "r_max", "seed", "hop_limit", "strict_guard"}
_TOP_KEYS = {"nodes", "edges", "target", "router", "resolution_bps"}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise NetworkFormatError(message)


def _int_field(raw: object, name: str, allow_none: bool = False) -> Optional[int]:
    if raw is None and allow_none:
        return None
    _require(isinstance(raw, int) and not isinstance(raw, bool), f"{name} must be an integer")
    return int(raw)  # type: ignore[arg-type]


def load_network(path: Union[str, Path]) -> LoadedNetwork:
    """Parse and validate a network description file.

    Returns:
        The graph, the target matrix in integer units, and the router
        configuration (``delta_r`` stays None when the file omits it).

    Raises:
        NetworkFormatError: on malformed JSON or schema violations
            (self-loops, duplicate edges, non-positive or unrepresentable
            rates, asymmetric explicit targets, unknown keys).
        ValidationError: when the graph is disconnected.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(), parse_float=Decimal)
    except (OSError, json.JSONDecodeError) as exc:
        raise NetworkFormatError(f"cannot parse {path}: {exc}") from exc

    _require(isinstance(raw, dict), "top level must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    _require(not unknown, f"unknown top-level keys: {sorted(unknown)}")

    node_count = _int_field(raw.get("nodes"), "nodes")
    assert node_count is not None

    try:
        scale = UnitScale(as_decimal(raw.get("resolution_bps", 1), "resolution_bps"))
    except (TypeError, ValueError) as exc:
        raise NetworkFormatError(str(exc)) from exc

    edges_raw = raw.get("edges")
    _require(isinstance(edges_raw, list) and edges_raw, "edges must be a non-empty list")
    rates: dict[tuple[int, int], int] = {}
    for idx, entry in enumerate(edges_raw):
        _require(isinstance(entry, dict), f"edges[{idx}] must be an object")
        _require(
            set(entry) == {"u", "v", "rate_kbps"},
            f"edges[{idx}] must have exactly the keys u, v, rate_kbps",
        )
        u = _int_field(entry["u"], f"edges[{idx}].u")
        v = _int_field(entry["v"], f"edges[{idx}].v")
        assert u is not None and v is not None
        try:
            units = scale.units_from_kbps(entry["rate_kbps"], f"edges[{idx}].rate_kbps")
        except (TypeError, ValueError) as exc:
            raise NetworkFormatError(str(exc)) from exc
        _require(units > 0, f"edges[{idx}].rate_kbps must be positive")
        key = (min(u, v), max(u, v))
        _require(key not in rates, f"duplicate edge ({u}, {v})")
        _require(u != v, f"edges[{idx}] is a self-loop on node {u}")
        rates[key] = units

    try:
        graph = NetworkGraph(node_count=node_count, rates=rates, scale=scale)
    except ValidationError as exc:
        raise NetworkFormatError(str(exc)) from exc
    if not graph.is_connected():
        raise ValidationError(f"{path}: graph is disconnected")

    target = _parse_target(raw.get("target", 0), node_count, scale)
    config = _parse_router(raw.get("router", {}), scale)
    return LoadedNetwork(graph, target, config)


def _parse_target(raw: object, node_count: int, scale: UnitScale) -> np.ndarray:
    if isinstance(raw, list):
        _require(
            len(raw) == node_count and all(isinstance(row, list) for row in raw),
            f"target matrix must be {node_count}x{node_count}",
        )
        mat = np.zeros((node_count, node_count), dtype=np.int64)
        for i, row in enumerate(raw):
            _require(len(row) == node_count, f"target row {i} has wrong length")
            for j, cell in enumerate(row):
                try:
                    mat[i, j] = scale.units_from_kbps(cell, f"target[{i}][{j}]")
                except (TypeError, ValueError) as exc:
                    raise NetworkFormatError(str(exc)) from exc
        try:
            check_target_matrix(mat, node_count)
        except ValidationError as exc:
            raise NetworkFormatError(str(exc)) from exc
        return mat
    try:
        units = scale.units_from_kbps(raw, "target")
    except (TypeError, ValueError) as exc:
        raise NetworkFormatError(str(exc)) from exc
    _require(units >= 0, "target must be non-negative")
    return uniform_target(node_count, units)


def _parse_router(raw: object, scale: UnitScale) -> RouterConfig:
    _require(isinstance(raw, dict), "router must be an object")
    assert isinstance(raw, dict)
    unknown = set(raw) - _ROUTER_KEYS
    _require(not unknown, f"unknown router keys: {sorted(unknown)}")
    delta_r = None
    if raw.get("delta_r_kbps") is not None:
        try:
            delta_r = scale.units_from_kbps(raw["delta_r_kbps"], "router.delta_r_kbps")
        except (TypeError, ValueError) as exc:
            raise NetworkFormatError(str(exc)) from exc
    strict_guard = raw.get("strict_guard", True)
    _require(isinstance(strict_guard, bool), "router.strict_guard must be a boolean")
    try:
        return RouterConfig(
            m=_int_field(raw.get("M", 2), "router.M") or 0,
            delta_r=delta_r,
            r_max=_int_field(raw.get("r_max"), "router.r_max", allow_none=True),
            seed=_int_field(raw.get("seed", 0), "router.seed") or 0,
            hop_limit=_int_field(raw.get("hop_limit"), "router.hop_limit", allow_none=True),
            strict_guard=strict_guard,
        )
    except ValidationError as exc:
        raise NetworkFormatError(str(exc)) from exc


def _json_number(value: Decimal) -> Union[float, str]:
    # fall back to a string when the float repr would lose digits; the
    # loader accepts both spellings
    as_float = float(value)
    return as_float if Decimal(str(as_float)) == value else str(value)


def network_to_dict(
    graph: NetworkGraph, target: np.ndarray, config: RouterConfig
) -> dict:
    """Inverse of :func:`load_network`; reloading the result is lossless."""
    scale = graph.scale
    doc: dict = {
        "nodes": graph.node_count,
        "edges": [
            {"u": u, "v": v, "rate_kbps": _json_number(scale.kbps(graph.rate(u, v)))}
            for u, v in graph.edges
        ],
        "router": {
            "M": config.m,
            "delta_r_kbps": None
            if config.delta_r is None
            else _json_number(scale.kbps(config.delta_r)),
            "r_max": config.r_max,
            "seed": config.seed,
            "hop_limit": config.hop_limit,
            "strict_guard": config.strict_guard,
        },
    }
    if scale.resolution_bps != 1:
        doc["resolution_bps"] = _json_number(scale.resolution_bps)
    off_diagonal = target[~np.eye(graph.node_count, dtype=bool)]
    if off_diagonal.size and np.all(off_diagonal == off_diagonal[0]):
        doc["target"] = _json_number(scale.kbps(int(off_diagonal[0])))
    else:
        doc["target"] = [
            [_json_number(scale.kbps(int(target[i, j]))) for j in range(graph.node_count)]
            for i in range(graph.node_count)
        ]
    return doc


def save_network(
    path: Union[str, Path],
    graph: NetworkGraph,
    target: np.ndarray,
    config: RouterConfig,
) -> None:
    doc = network_to_dict(graph, target, config)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
