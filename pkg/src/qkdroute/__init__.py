"""Key routing over multiple node-disjoint paths for trusted-node networks.

The package splits into:

- :mod:`qkdroute.model`: graphs, rate matrices, validation
- :mod:`qkdroute.netfile`: the JSON network description format
- :mod:`qkdroute.paths`: simple-path and disjoint path-set enumeration
- :mod:`qkdroute.engine`: the greedy rate-routing loop
- :mod:`qkdroute.keysim`: bit-level key delivery and compromise analysis
- :mod:`qkdroute.artifacts`: reproducible file outputs
- :mod:`qkdroute.cli`: the ``qkdroute`` command
"""

__version__ = "0.1.0"

from .engine import (
    IterationTrace,
    RoutingList,
    RoutingOutcome,
    RoutingRecord,
    StopReason,
    apply_increment,
    cost_delta,
    run,
    select_optimal_set,
    select_worst_pair,
)
from .keysim import (
    CompromiseReport,
    KeySimulation,
    assess_compromise,
    compromise_probability_bound,
    simulate,
)
from .model import (
    NetworkGraph,
    RouterConfig,
    ValidationError,
    ValidationReport,
    uniform_target,
    validate,
)
from .netfile import LoadedNetwork, NetworkFormatError, load_network, save_network
from .paths import (
    MPathSet,
    Path,
    enumerate_m_path_sets,
    enumerate_simple_paths,
    find_unroutable_pairs,
    set_deficiency,
)
from .units import UnitScale

__all__ = [
    "__version__",
    "CompromiseReport",
    "IterationTrace",
    "KeySimulation",
    "LoadedNetwork",
    "MPathSet",
    "NetworkFormatError",
    "NetworkGraph",
    "Path",
    "RouterConfig",
    "RoutingList",
    "RoutingOutcome",
    "RoutingRecord",
    "StopReason",
    "UnitScale",
    "ValidationError",
    "ValidationReport",
    "apply_increment",
    "assess_compromise",
    "compromise_probability_bound",
    "cost_delta",
    "enumerate_m_path_sets",
    "enumerate_simple_paths",
    "find_unroutable_pairs",
    "load_network",
    "run",
    "save_network",
    "select_optimal_set",
    "select_worst_pair",
    "set_deficiency",
    "simulate",
    "uniform_target",
    "validate",
]
