"""Top adjacency eigenvalues of large graphs from closed walks sampled
along a simple random walk."""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import (BudgetExhausted, ClosedWalksError, ConfigError, DataError,
                     EstimationError, IndeterminateEstimate)
from .graphio import (FullAccess, Graph, QueryLedger, RestrictedAccess, common_neighbor_count,
                      contains_neighbor, largest_connected_component, load_edge_list,
                      load_report)
from .walker import WalkConfig, WalkWindow, estimate_D, random_walk, step
from .estimators import (EstimateReport, choose_k, cwalker_a, cwalker_b, cwalker_c, estimate,
                         lambda2_from_traces, naive_lambda1, top_n_iterative, variance_and_ci)
from .oracle import (Spectrum, brute_force_closed_walks, dense_spectrum, dense_trace_power,
                     power_iteration_top2)

__all__ = [
    "__version__", "BudgetExhausted", "ClosedWalksError", "ConfigError", "DataError",
    "EstimationError", "IndeterminateEstimate", "FullAccess", "Graph", "QueryLedger",
    "RestrictedAccess", "common_neighbor_count", "contains_neighbor",
    "largest_connected_component", "load_edge_list", "load_report", "WalkConfig", "WalkWindow",
    "estimate_D", "random_walk", "step", "EstimateReport", "choose_k", "cwalker_a", "cwalker_b",
    "cwalker_c", "estimate", "lambda2_from_traces", "naive_lambda1", "top_n_iterative",
    "variance_and_ci", "Spectrum", "brute_force_closed_walks", "dense_spectrum",
    "dense_trace_power", "power_iteration_top2",
]
