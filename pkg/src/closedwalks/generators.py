"""Small deterministic graphs for tests, demos and calibration runs."""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .graphio import Graph


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(list(combinations(range(n), 2)), n=n)


def path_graph(n: int) -> Graph:
    return Graph.from_edges([(i, i + 1) for i in range(n - 1)], n=n)


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges([(i, (i + 1) % n) for i in range(n)], n=n)


def star_graph(leaves: int) -> Graph:
    """Hub 0 joined to leaves 1..leaves."""
    return Graph.from_edges([(0, i) for i in range(1, leaves + 1)], n=leaves + 1)


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(outer + spokes + inner, n=10)


def bridged_cliques(sizes, bridges: int = 1) -> Graph:
    """Cliques of the given sizes chained by ``bridges`` edges between
    consecutive blocks. Spectrum is close to {s - 1} plus many -1s."""
    edges, start = [], 0
    starts = []
    for s in sizes:
        starts.append(start)
        edges += [(start + a, start + b) for a, b in combinations(range(s), 2)]
        start += s
    for (a, sa), (b, sb) in zip(zip(starts, sizes), zip(starts[1:], sizes[1:])):
        for j in range(bridges):
            edges.append((a + j % sa, b + j % sb))
    return Graph.from_edges(edges, n=start)


def random_connected_graph(n: int, extra_edge_prob: float, rng) -> Graph:
    """Random spanning tree plus independent extra edges."""
    rng = np.random.default_rng(rng)
    order = rng.permutation(n)
    edges = [(order[i], order[rng.integers(i)]) for i in range(1, n)]
    for u, v in combinations(range(n), 2):
        if rng.random() < extra_edge_prob:
            edges.append((u, v))
    return Graph.from_edges(edges, n=n)


def barabasi_albert(n: int, m: int, seed) -> Graph:
    """Preferential attachment: each new node links to ``m`` distinct
    existing nodes chosen proportionally to degree."""
    rng = np.random.default_rng(seed)
    edges = []
    targets = list(range(m))
    repeated: list[int] = []
    for new in range(m, n):
        edges += [(new, t) for t in targets]
        repeated += targets
        repeated += [new] * m
        chosen: set[int] = set()
        while len(chosen) < m:
            chosen.add(repeated[rng.integers(len(repeated))])
        targets = sorted(chosen)
    return Graph.from_edges(edges, n=n)
