"""Undirected simple graphs in CSR form, SNAP edge-list loading, and the
neighbor-query views the samplers walk on."""
from __future__ import annotations

import gzip
import io
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import BudgetExhausted, EdgeListParseError, EmptyGraphError, NodeIndexError

INDEX = np.int64


def _frozen(a, dtype=INDEX):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable CSR adjacency of an undirected simple graph.

    ``neighbors[offsets[v]:offsets[v + 1]]`` is N(v), sorted strictly
    ascending. ``original_ids[v]`` is the id node ``v`` had in the source file.
    """

    offsets: np.ndarray
    neighbors_flat: np.ndarray
    original_ids: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "offsets", _frozen(self.offsets))
        object.__setattr__(self, "neighbors_flat", _frozen(self.neighbors_flat))
        object.__setattr__(self, "original_ids", _frozen(self.original_ids))
        if len(self.original_ids) != self.node_count:
            raise ValueError("original_ids must have one entry per node")

    @classmethod
    def from_edges(cls, edges, n: int | None = None, original_ids=None) -> "Graph":
        """Build from (u, v) pairs over dense ids 0..n-1.

        Direction is ignored; self-loops and repeated pairs are dropped.
        """
        e = np.asarray(edges, dtype=INDEX).reshape(-1, 2)
        if n is None:
            n = int(e.max()) + 1 if len(e) else 0
        if len(e) and (e.min() < 0 or e.max() >= n):
            raise NodeIndexError(f"edge endpoint outside 0..{n - 1}")
        e = e[e[:, 0] != e[:, 1]]
        both = np.concatenate([e, e[:, ::-1]])
        keys = np.unique(both[:, 0] * n + both[:, 1])
        src, dst = np.divmod(keys, n)
        offsets = np.zeros(n + 1, dtype=INDEX)
        np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
        if original_ids is None:
            original_ids = np.arange(n, dtype=INDEX)
        return cls(offsets, dst, original_ids)

    @property
    def node_count(self) -> int:
        return len(self.offsets) - 1

    @property
    def degree_sum(self) -> int:
        return int(self.offsets[-1])

    @property
    def edge_count(self) -> int:
        return self.degree_sum // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.node_count else 0

    def _check(self, v):
        if not 0 <= v < self.node_count:
            raise NodeIndexError(f"node {v} outside 0..{self.node_count - 1}")

    def neighbors(self, v: int) -> np.ndarray:
        self._check(v)
        return self.neighbors_flat[self.offsets[v]:self.offsets[v + 1]]

    def degree(self, v: int) -> int:
        self._check(v)
        return int(self.offsets[v + 1] - self.offsets[v])

    def edges(self) -> np.ndarray:
        """Each undirected edge once, as (u, v) with u < v."""
        src = np.repeat(np.arange(self.node_count, dtype=INDEX), self.degrees)
        keep = src < self.neighbors_flat
        return np.column_stack([src[keep], self.neighbors_flat[keep]])

    def to_scipy(self) -> csr_matrix:
        n = self.node_count
        data = np.ones(len(self.neighbors_flat), dtype=np.float64)
        return csr_matrix((data, self.neighbors_flat, self.offsets), shape=(n, n))

    def to_dense(self, dtype=np.float64) -> np.ndarray:
        a = np.zeros((self.node_count, self.node_count), dtype=dtype)
        src = np.repeat(np.arange(self.node_count), self.degrees)
        a[src, self.neighbors_flat] = 1
        return a

    def subgraph(self, nodes) -> "Graph":
        """Induced subgraph on ``nodes`` (ascending), re-indexed densely."""
        nodes = np.unique(np.asarray(nodes, dtype=INDEX))
        remap = np.full(self.node_count, -1, dtype=INDEX)
        remap[nodes] = np.arange(len(nodes), dtype=INDEX)
        e = self.edges()
        e = remap[e]
        e = e[(e >= 0).all(axis=1)]
        return Graph.from_edges(e, n=len(nodes), original_ids=self.original_ids[nodes])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.neighbors_flat, other.neighbors_flat)
            and np.array_equal(self.original_ids, other.original_ids)
        )

    __hash__ = None


@dataclass
class LoadReport:
    path: str
    raw_pairs: int
    nodes: int
    edges: int
    dropped_self_loops: int
    dropped_duplicates: int
    lcc_nodes: int | None = None
    lcc_edges: int | None = None

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "raw_pairs": self.raw_pairs,
            "nodes": self.nodes,
            "edges": self.edges,
            "dropped_self_loops": self.dropped_self_loops,
            "dropped_duplicates": self.dropped_duplicates,
            "lcc_nodes": self.lcc_nodes,
            "lcc_edges": self.lcc_edges,
        }


def _open_text(path: Path):
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, encoding="utf-8")


def _find_bad_line(path: Path):
    with _open_text(path) as fh:
        for no, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                return no, line.rstrip("\n")
            try:
                int(parts[0]), int(parts[1])
            except ValueError:
                return no, line.rstrip("\n")
    return None


def read_edge_list(path) -> tuple[Graph, LoadReport]:
    """Parse a SNAP edge list into a simple undirected graph plus counts of
    what normalization threw away."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        with _open_text(path) as fh, warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # empty input is handled below
            pairs = np.loadtxt(fh, dtype=INDEX, comments="#", ndmin=2)
    except ValueError:
        bad = _find_bad_line(path)
        if bad is None:
            raise
        raise EdgeListParseError(path, *bad) from None
    if pairs.size == 0:
        raise EmptyGraphError(f"{path}: no edges")
    if pairs.shape[1] != 2:
        bad = _find_bad_line(path)
        raise EdgeListParseError(path, *(bad or (0, "")))

    raw = len(pairs)
    loops = pairs[:, 0] == pairs[:, 1]
    pairs = pairs[~loops]
    if len(pairs) == 0:
        raise EmptyGraphError(f"{path}: only self-loops")
    ids, dense = np.unique(pairs, return_inverse=True)
    g = Graph.from_edges(dense.reshape(-1, 2), n=len(ids), original_ids=ids)
    report = LoadReport(
        path=str(path),
        raw_pairs=raw,
        nodes=g.node_count,
        edges=g.edge_count,
        dropped_self_loops=int(loops.sum()),
        dropped_duplicates=len(pairs) - g.edge_count,
    )
    return g, report


def load_edge_list(path) -> Graph:
    return read_edge_list(path)[0]


def write_edge_list(g: Graph, path) -> None:
    """One ``u v`` line per undirected edge, in original ids."""
    e = g.original_ids[g.edges()]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes: {g.node_count} edges: {g.edge_count}\n")
        np.savetxt(fh, e, fmt="%d", delimiter="\t")


def largest_connected_component(g: Graph) -> Graph:
    if g.node_count == 0:
        raise EmptyGraphError("graph has no nodes")
    ncomp, labels = connected_components(g.to_scipy(), directed=False)
    if ncomp == 1:
        return g
    sizes = np.bincount(labels)
    first = np.full(ncomp, g.node_count, dtype=INDEX)
    np.minimum.at(first, labels, np.arange(g.node_count, dtype=INDEX))
    # dense ids follow original-id order, so the smallest dense id breaks ties
    tied = np.flatnonzero(sizes == sizes.max())
    best = tied[np.argmin(first[tied])]
    return g.subgraph(np.flatnonzero(labels == best))


def load_report(path, lcc: bool = True) -> tuple[Graph, LoadReport]:
    g, report = read_edge_list(path)
    if lcc:
        g = largest_connected_component(g)
        report.lcc_nodes = g.node_count
        report.lcc_edges = g.edge_count
    return g, report


# ---------------------------------------------------------------- query views


@dataclass
class QueryLedger:
    """Counts neighborhood fetches against an optional budget."""

    budget: int | None = None
    queries_used: int = 0

    @property
    def remaining(self) -> int | None:
        return None if self.budget is None else self.budget - self.queries_used

    def charge(self, count: int = 1) -> None:
        if count < 0:
            raise ValueError("cannot refund queries")
        if self.budget is not None and self.queries_used + count > self.budget:
            raise BudgetExhausted(
                f"query budget {self.budget} exhausted ({self.queries_used} used)"
            )
        self.queries_used += count


@runtime_checkable
class GraphAccess(Protocol):
    def neighbors(self, v: int) -> np.ndarray: ...

    def degree(self, v: int) -> int: ...

    def node_count(self) -> int: ...


class LocalAccess:
    """Neighbor-query view over an in-memory graph.

    Every ``neighbors`` call costs one query. ``degree`` is free for the
    node fetched most recently and costs a fetch otherwise.
    """

    def __init__(self, graph: Graph, ledger: QueryLedger | None = None):
        self._graph = graph
        self.ledger = ledger if ledger is not None else QueryLedger()
        self._last: int | None = None
        self._last_nbrs: np.ndarray | None = None

    def node_count(self) -> int:
        return self._graph.node_count

    def neighbors(self, v: int) -> np.ndarray:
        self._graph._check(v)
        self.ledger.charge()
        self._last = int(v)
        self._last_nbrs = self._graph.neighbors(v)
        return self._last_nbrs

    def degree(self, v: int) -> int:
        if v == self._last:
            return len(self._last_nbrs)
        return len(self.neighbors(v))

    def peek(self, v: int) -> np.ndarray:
        """N(v) without a charge; only legal right after fetching v."""
        self._graph._check(v)
        if v != self._last:
            raise LookupError(f"neighborhood of {v} has not been fetched this step")
        return self._last_nbrs


class RestrictedAccess(LocalAccess):
    """What a social-network API offers: neighbor lists and |V|, nothing global."""


class FullAccess(LocalAccess):
    """Same query semantics as :class:`RestrictedAccess`, plus the graph itself."""

    @property
    def graph(self) -> Graph:
        return self._graph


def _slice(g, v: int) -> np.ndarray:
    if isinstance(g, Graph):
        return g.neighbors(v)
    if hasattr(g, "peek"):
        return g.peek(v)
    return g.neighbors(v)


def _sorted_contains(arr: np.ndarray, u: int) -> bool:
    i = int(np.searchsorted(arr, u))
    return i < len(arr) and arr[i] == u


def contains_neighbor(g, v: int, u: int) -> bool:
    """u in N(v) by binary search over v's sorted slice."""
    nbrs = _slice(g, v)
    n = g.node_count if isinstance(g, Graph) else g.node_count()
    if not 0 <= u < n:
        raise NodeIndexError(f"node {u} outside 0..{n - 1}")
    return _sorted_contains(nbrs, u)


def common_neighbor_count(g, u: int, v: int, nbrs_u=None, nbrs_v=None) -> int:
    """|N(u) & N(v)|. Pass cached neighborhoods to avoid fetching."""
    a = nbrs_u if nbrs_u is not None else _slice(g, u)
    b = nbrs_v if nbrs_v is not None else _slice(g, v)
    if u == v:
        return len(a)
    if len(a) > len(b):
        a, b = b, a
    idx = np.searchsorted(b, a)
    idx[idx == len(b)] = 0
    return int(np.count_nonzero(b[idx] == a)) if len(b) else 0


def report_json(report: LoadReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True)
