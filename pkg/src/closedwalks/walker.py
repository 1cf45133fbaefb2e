"""Simple random walks over a neighbor-query view.

Any :class:`~closedwalks.graphio.GraphAccess` can be walked one step at a
time with :func:`step`. For the in-memory views the whole walk runs in a
compiled loop that draws the same random numbers, so both routes produce
the same node sequence for the same seed.
"""
from __future__ import annotations

import math
from collections import deque
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import BudgetExhausted, ConfigError, EstimationError
from .graphio import INDEX, FullAccess, LocalAccess


def default_burn_in(n: int) -> int:
    return 100 * math.ceil(math.log2(n)) if n > 1 else 0


@dataclass(frozen=True)
class WalkConfig:
    walk_length: int
    burn_in: int | None = None
    seed: int = 0
    start_node: int | None = None

    def resolved_burn_in(self, n: int) -> int:
        return default_burn_in(n) if self.burn_in is None else self.burn_in

    def validate(self, n: int, window: int = 0) -> int:
        """Check m > t + window >= 0 and return the resolved burn-in."""
        t = self.resolved_burn_in(n)
        if t < 0:
            raise ConfigError(f"burn-in must be >= 0, got {t}")
        if self.walk_length <= t + window:
            raise ConfigError(
                f"walk length {self.walk_length} must exceed burn-in {t}"
                + (f" + window {window}" if window else "")
            )
        return t


class WalkWindow:
    """Ring buffer of the last ``depth`` visited nodes and their degrees,
    optionally with the neighbor lists of the last ``keep_neighbors``
    fetched nodes."""

    def __init__(self, depth: int, keep_neighbors: int = 0):
        self.depth = depth
        self.nodes: deque[int] = deque(maxlen=depth)
        self.degrees: deque[int | None] = deque(maxlen=depth)
        self.keep_neighbors = keep_neighbors
        self.neighbor_cache: deque[np.ndarray] = deque(maxlen=max(keep_neighbors, 1))

    @property
    def current(self) -> int:
        return self.nodes[-1]

    def push(self, node: int) -> None:
        self.nodes.append(int(node))
        self.degrees.append(None)

    def record_fetch(self, nbrs: np.ndarray) -> None:
        """Attach the just-fetched neighborhood to the current node."""
        self.degrees[-1] = len(nbrs)
        if self.keep_neighbors:
            self.neighbor_cache.append(nbrs)

    def back(self, j: int) -> int:
        """Node visited ``j`` steps before the current one."""
        return self.nodes[-1 - j]


def step(g, w: WalkWindow, rng) -> int:
    """Move to a uniformly chosen neighbor of the current node.

    Costs exactly one neighborhood query. Raises
    :class:`~closedwalks.errors.BudgetExhausted` before moving if the
    ledger is out of queries.
    """
    nbrs = g.neighbors(w.current)
    d = len(nbrs)
    if d == 0:
        raise EstimationError(f"node {w.current} has no neighbors; walk is stuck")
    w.record_fetch(nbrs)
    j = min(int(rng.random() * d), d - 1)
    nxt = int(nbrs[j])
    w.push(nxt)
    return nxt


@dataclass
class DAccumulator:
    """Running sum of 1/d over counted steps.

    ``degree_counts`` optionally tallies how often each degree was seen, so
    the sum can be formed exactly in rationals (exact D on regular graphs).
    """

    inv_degree_sum: float = 0.0
    steps_counted: int = 0
    degree_counts: dict | None = None

    def add(self, degree: int) -> None:
        self.inv_degree_sum += 1.0 / degree
        self.steps_counted += 1
        if self.degree_counts is not None:
            self.degree_counts[degree] = self.degree_counts.get(degree, 0) + 1


MAX_EXACT_DEGREES = 256


def estimate_D(acc: DAccumulator, n: int) -> float:
    """Degree-sum estimate n * steps / sum(1/d) from a walk's accumulator."""
    if acc.steps_counted < 1 or acc.inv_degree_sum <= 0:
        raise EstimationError("no counted steps; D estimate undefined")
    dc = acc.degree_counts
    if dc and len(dc) <= MAX_EXACT_DEGREES:
        inv = sum((Fraction(c, d) for d, c in dc.items()), Fraction(0))
        return float(n * acc.steps_counted / inv)
    return n * acc.steps_counted / acc.inv_degree_sum


@dataclass
class Walk:
    """A recorded walk plus every neighborhood it fetched.

    ``nodes[0..L]`` are the visited nodes; N(nodes[j]) for j < L is
    ``nbrs[offsets[rows[j]]:offsets[rows[j] + 1]]``.
    """

    nodes: np.ndarray
    rows: np.ndarray
    degs: np.ndarray
    offsets: np.ndarray
    nbrs: np.ndarray
    node_count: int
    burn_in: int
    walk_length: int
    queries_used: int
    seed: int
    complete: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def steps_taken(self) -> int:
        return len(self.nodes) - 1

    @property
    def steps_counted(self) -> int:
        return max(self.steps_taken - self.burn_in, 0)

    def d_accumulator(self) -> DAccumulator:
        L, t = self.steps_taken, self.burn_in
        degs = self.degs[t:L]
        uniq, counts = np.unique(degs, return_counts=True)
        inv = float(np.sum(counts / uniq))
        return DAccumulator(inv, len(degs), dict(zip(uniq.tolist(), counts.tolist())))

    def dump_trace(self, path) -> None:
        np.savetxt(path, self.nodes, fmt="%d")


def _local_walk(access: LocalAccess, cfg: WalkConfig, t: int, rng, start: int) -> Walk:
    g = access._graph
    m = cfg.walk_length
    uniforms = rng.random(m)
    remaining = access.ledger.remaining
    allowed = m if remaining is None else max(0, min(m, remaining))
    access.ledger.charge(allowed)
    nodes = _kernels.walk_csr(g.offsets, g.neighbors_flat, start, uniforms[:allowed])
    rows = nodes[:-1]
    degs = g.offsets[rows + 1] - g.offsets[rows]
    if len(degs) and degs.min() == 0:
        raise EstimationError("walk reached an isolated node")
    return Walk(nodes, rows, degs, g.offsets, g.neighbors_flat, g.node_count, t, m,
                allowed, cfg.seed, complete=allowed == m)


def _streamed_walk(access, cfg: WalkConfig, t: int, rng, start: int) -> Walk:
    window = WalkWindow(depth=2, keep_neighbors=1)
    window.push(start)
    nodes = [start]
    rows: list[int] = []
    row_of: dict[int, int] = {}
    chunks: list[np.ndarray] = []
    complete = True
    used = 0
    for _ in range(cfg.walk_length):
        cur = window.current
        try:
            step(access, window, rng)
        except BudgetExhausted:
            complete = False
            break
        used += 1
        if cur not in row_of:
            row_of[cur] = len(chunks)
            chunks.append(np.asarray(window.neighbor_cache[-1], dtype=INDEX))
        rows.append(row_of[cur])
        nodes.append(window.current)
    lens = np.array([len(c) for c in chunks], dtype=INDEX)
    offsets = np.zeros(len(chunks) + 1, dtype=INDEX)
    np.cumsum(lens, out=offsets[1:])
    nbrs = np.concatenate(chunks) if chunks else np.zeros(0, dtype=INDEX)
    rows_a = np.asarray(rows, dtype=INDEX)
    return Walk(np.asarray(nodes, dtype=INDEX), rows_a, lens[rows_a], offsets, nbrs,
                access.node_count(), t, cfg.walk_length, used, cfg.seed, complete=complete)


def random_walk(access, cfg: WalkConfig, window: int = 0, compiled: bool = True) -> Walk:
    """Walk ``cfg.walk_length`` steps (burn-in included), charging one query
    per step and stopping early if the ledger's budget runs out.

    ``compiled=False`` forces the step-by-step route even for in-memory views.
    """
    n = access.node_count()
    t = cfg.validate(n, window)
    rng = np.random.default_rng(cfg.seed)
    if cfg.start_node is not None:
        start = int(cfg.start_node)
        if not 0 <= start < n:
            raise ConfigError(f"start node {start} outside 0..{n - 1}")
    elif isinstance(access, FullAccess):
        start = int(rng.integers(n))
    else:
        raise ConfigError("restricted access needs an explicit start node")
    if compiled and isinstance(access, LocalAccess):
        return _local_walk(access, cfg, t, rng, start)
    return _streamed_walk(access, cfg, t, rng, start)
