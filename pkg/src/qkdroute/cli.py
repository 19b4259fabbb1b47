"""Command-line front end.

Subcommands::

    qkdroute validate --input net.json [--m 2]
    qkdroute route    --input net.json [--delta-r 0.01] [--seed 0] ...
    qkdroute paths    --input net.json --pair 1,3 [--m 2] [--hop-limit H]
    qkdroute simulate --input net.json --routing DIR --tau 100 [--compromise 0,4]

Exit codes: 0 success, 1 validation or input failure, 2 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path as FsPath
from typing import Optional, Sequence

from . import __version__, artifacts, engine, keysim
from .model import RouterConfig, ValidationError, validate
from .netfile import NetworkFormatError, load_network
from .paths import (
    PairPathCache,
    enumerate_m_path_sets,
    enumerate_simple_paths,
    find_unroutable_pairs,
    set_deficiency,
)
from .units import as_decimal

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


def _parse_pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("pair must look like I,J")
    try:
        i, j = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError("pair must contain two integers") from exc
    return i, j


def _parse_nodes(text: str) -> tuple[int, ...]:
    if not text.strip():
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected a comma-separated node list") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkdroute",
        description="Key routing over multiple node-disjoint paths",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="network description JSON")
    common.add_argument("--m", type=int, default=None,
                        help="disjoint paths per route set (overrides the file)")

    p_validate = sub.add_parser("validate", parents=[common],
                                help="check degree and connectivity requirements")

    p_route = sub.add_parser("route", parents=[common],
                             help="run the routing loop and write artifacts")
    p_route.add_argument("--delta-r", default=None,
                         help="rate step in kbit/s (overrides the file)")
    p_route.add_argument("--r-max", type=int, default=None,
                         help="iteration budget (overrides the file)")
    p_route.add_argument("--seed", type=int, default=None,
                         help="tie-break seed (overrides the file)")
    p_route.add_argument("--hop-limit", type=int, default=None,
                         help="maximum hops per path (overrides the file)")
    p_route.add_argument("--no-strict-guard", action="store_true",
                         help="allow increments that exhaust an edge")
    p_route.add_argument("--out-dir", default="qkdroute_out",
                         help="artifact directory (default qkdroute_out)")
    p_route.add_argument("--sweep", default=None,
                         help="comma-separated delta-r values to run in parallel")
    p_route.add_argument("--from-manifest", default=None,
                         help="re-run a previous route from its manifest.json")

    p_paths = sub.add_parser("paths", parents=[common],
                             help="list disjoint path sets for one pair")
    p_paths.add_argument("--pair", type=_parse_pair, required=True,
                         help="node pair, e.g. 1,3")
    p_paths.add_argument("--hop-limit", type=int, default=None)

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="simulate key delivery over a routing artifact")
    p_sim.add_argument("--routing", required=True,
                       help="routing_list.json or the directory holding it")
    p_sim.add_argument("--tau", required=True,
                       help="harvest window in seconds")
    p_sim.add_argument("--seed", type=int, default=0,
                       help="seed for the key material")
    p_sim.add_argument("--compromise", type=_parse_nodes, default=(),
                       help="comma-separated compromised node ids")
    p_sim.add_argument("--epsilon", default=None,
                       help="per-node compromise probability for the bound")
    p_sim.add_argument("--out-dir", default=None,
                       help="also write report files to this directory")
    p_sim.add_argument("--dump-keys", action="store_true",
                       help="include hex key dumps in the text report")
    return parser


def _merged_config(file_config: RouterConfig, args: argparse.Namespace,
                   scale) -> RouterConfig:
    updates: dict = {}
    if args.m is not None:
        updates["m"] = args.m
    if getattr(args, "delta_r", None) is not None:
        updates["delta_r"] = scale.units_from_kbps(args.delta_r, "--delta-r")
    if getattr(args, "r_max", None) is not None:
        updates["r_max"] = args.r_max
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "hop_limit", None) is not None:
        updates["hop_limit"] = args.hop_limit
    if getattr(args, "no_strict_guard", False):
        updates["strict_guard"] = False
    return dataclasses.replace(file_config, **updates)


def cmd_validate(args: argparse.Namespace) -> int:
    graph, _, config = load_network(args.input)
    m = args.m if args.m is not None else config.m
    report = validate(graph, m)
    report = dataclasses.replace(
        report,
        remote_pairs_without_m_sets=find_unroutable_pairs(graph, m),
    )
    print(f"nodes: {graph.node_count}, edges: {len(graph.edges)}")
    print(f"minimum degree: {report.min_degree} (need >= {m})")
    print(f"connected: {'yes' if report.connected else 'no'}")
    if report.degree_violations:
        print(f"degree violations: {list(report.degree_violations)}")
    else:
        print("degree violations: none")
    if report.remote_pairs_without_m_sets:
        print(
            "remote pairs with no disjoint path set: "
            + ", ".join(f"({i}, {j})" for i, j in report.remote_pairs_without_m_sets)
        )
    return EXIT_OK if report.ok else EXIT_INVALID


def _run_route(
    input_path: str,
    config: RouterConfig,
    out_dir: FsPath,
) -> tuple[engine.RoutingOutcome, dict]:
    graph, target, _ = load_network(input_path)
    outcome = engine.run(graph, target, config)
    files = artifacts.write_route_artifacts(out_dir, outcome, graph, config, input_path)
    return outcome, files


def _sweep_worker(task: tuple[str, RouterConfig, str]) -> tuple[str, int, str, int]:
    input_path, config, out_dir = task
    outcome, _ = _run_route(input_path, config, FsPath(out_dir))
    return (
        out_dir,
        outcome.iterations,
        outcome.stop_reason.value,
        outcome.final_delta,
    )


def cmd_route(args: argparse.Namespace) -> int:
    if args.from_manifest:
        manifest = json.loads(FsPath(args.from_manifest).read_text())
        if manifest.get("format") != artifacts.MANIFEST_FORMAT:
            raise NetworkFormatError(f"{args.from_manifest} is not a run manifest")
        args.input = manifest["input"]
        cfg = manifest["config"]
        args.m = cfg["m"]
        args.delta_r = cfg["delta_r_kbps"]
        args.r_max = cfg["r_max"]
        args.seed = cfg["seed"]
        args.hop_limit = cfg["hop_limit"]
        args.no_strict_guard = not cfg["strict_guard"]
    graph, target, file_config = load_network(args.input)
    config = _merged_config(file_config, args, graph.scale)
    if config.delta_r is None:
        raise ValidationError(
            "delta_r is not set; pass --delta-r or add router.delta_r_kbps to the file"
        )
    scale = graph.scale

    if args.sweep:
        values = [v for v in args.sweep.split(",") if v.strip()]
        tasks = []
        for value in values:
            step = scale.units_from_kbps(value.strip(), "--sweep")
            combo = dataclasses.replace(config, delta_r=step)
            combo_dir = FsPath(args.out_dir) / f"delta_r_{value.strip()}"
            tasks.append((args.input, combo, str(combo_dir)))
        # combos are independent; order of completion does not matter
        with ProcessPoolExecutor() as pool:
            results = list(pool.map(_sweep_worker, tasks))
        for out_dir, iterations, reason, final_delta in results:
            print(
                f"{out_dir}: iterations={iterations} stop={reason} "
                f"final_delta={scale.kbps_str(final_delta)}"
            )
        return EXIT_OK

    outcome, files = _run_route(args.input, config, FsPath(args.out_dir))
    print(
        f"stop: {outcome.stop_reason.value} after {outcome.iterations} iterations, "
        f"final delta {scale.kbps_str(outcome.final_delta)} kbit/s"
    )
    sys.stdout.write(artifacts.render_routing_text(outcome.routing_list, scale))
    print(f"artifacts in {FsPath(args.out_dir)}")
    return EXIT_OK


def cmd_paths(args: argparse.Namespace) -> int:
    graph, target, config = load_network(args.input)
    m = args.m if args.m is not None else config.m
    i, j = args.pair
    paths = enumerate_simple_paths(graph, i, j, args.hop_limit)
    sets = enumerate_m_path_sets(paths, m)
    deficiency = target - graph.rate_matrix()
    print(f"pair ({min(i, j)}, {max(i, j)}), M={m}: "
          f"{len(paths)} simple paths, {len(sets)} disjoint sets")
    if not sets:
        print("no disjoint path set exists for this pair")
        return EXIT_OK
    for s in sets:
        d = set_deficiency(s, deficiency)
        print(f"{s}  D={graph.scale.kbps_str(d)}  hops={s.total_hops}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    graph, _, _ = load_network(args.input)
    routing_path = FsPath(args.routing)
    if routing_path.is_dir():
        routing_path = routing_path / "routing_list.json"
    routing, effective, meta = artifacts.read_routing_artifact(routing_path)
    if meta["nodes"] != graph.node_count:
        raise NetworkFormatError(
            f"routing artifact is for {meta['nodes']} nodes, network has "
            f"{graph.node_count}"
        )
    if meta["resolution_bps"] != str(graph.scale.resolution_bps):
        raise NetworkFormatError("routing artifact resolution does not match network")
    for record in routing.records():
        for path in record.path_set.paths:
            for u, v in path.edges:
                if not graph.has_edge(u, v):
                    raise NetworkFormatError(
                        f"routing record uses edge ({u}, {v}) "
                        "which is not in the network"
                    )
    tau = as_decimal(args.tau, "--tau")
    if not all(
        graph.scale.bits_exact(graph.rate(u, v), tau) for u, v in graph.edges
    ):
        print(
            "warning: tau leaves fractional bits on some edges; lengths are "
            "rounded down",
            file=sys.stderr,
        )
    sim = keysim.simulate(graph, routing, effective, tau, seed=args.seed)
    report = keysim.assess_compromise(sim, args.compromise, epsilon=args.epsilon)
    text = artifacts.render_simulation_text(sim, report, dump_keys=args.dump_keys)
    sys.stdout.write(text)
    if args.out_dir:
        artifacts.write_simulation_artifacts(
            args.out_dir, sim, report, args.input, routing_path,
            dump_keys=args.dump_keys,
        )
        print(f"artifacts in {FsPath(args.out_dir)}")
    if not all(key.agreed for key in sim.pair_keys.values()):
        print("endpoint keys disagree", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "route": cmd_route,
    "paths": cmd_paths,
    "simulate": cmd_simulate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (NetworkFormatError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (keysim.CapacityError, engine.GuardViolation, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
