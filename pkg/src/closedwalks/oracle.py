"""Exact reference computations: closed-walk counts, dense spectra, and
sparse power iteration for the top eigenvalues of large graphs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError
from .graphio import Graph

DENSE_CAP = 2000
BRUTE_CAP = 14


@dataclass
class Spectrum:
    """Eigenvalues sorted descending (algebraic order).

    For ``power-deflation`` only the leading entries are present;
    ``magnitudes`` gives |lambda| of each and ``residuals`` the
    ||Av - lambda v|| of each returned pair.
    """

    eigenvalues: np.ndarray
    method: str
    residual: float = 0.0
    residuals: list = field(default_factory=list)
    iterations: list = field(default_factory=list)
    converged: list = field(default_factory=list)
    vectors: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda2(self) -> float:
        return float(self.eigenvalues[1])

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.eigenvalues)

    def to_dict(self) -> dict:
        ev = [float(x) for x in self.eigenvalues]
        d = {
            "lambda1": ev[0],
            "lambda2": ev[1] if len(ev) > 1 else None,
            "abs_lambda2": abs(ev[1]) if len(ev) > 1 else None,
            "residuals": [float(r) for r in self.residuals] or [float(self.residual)],
            "iterations": list(self.iterations),
            "converged": list(self.converged),
            "method": self.method,
        }
        if len(ev) > 2:
            d["lambda3"] = ev[2]
        if self.method == "dense":
            d["eigenvalues"] = ev
        return d


def _cap(g: Graph, cap: int, what: str) -> None:
    if g.node_count > cap:
        raise ConfigError(f"{what} is limited to {cap} nodes, graph has {g.node_count}")


def brute_force_closed_walks(g: Graph, k: int, max_nodes: int = BRUTE_CAP,
                             max_steps: int = 10**10) -> int:
    """Count length-k closed walks by enumerating every walk from every node."""
    if k < 1:
        raise ConfigError("k must be at least 1")
    if g.node_count > max_nodes and g.max_degree ** k * g.node_count > max_steps:
        raise ConfigError(
            f"brute force refused: {g.node_count} nodes > {max_nodes} and "
            f"step bound {g.max_degree}^{k} too large; use dense_trace_power")
    return int(_kernels.count_closed_walks_dfs(g.offsets, g.neighbors_flat, k))


def dense_trace_power(g: Graph, k: int) -> int | float:
    """tr(A^k) by repeated squaring. Exact integers while the largest
    possible entry fits in int64, float64 beyond that."""
    _cap(g, DENSE_CAP, "dense_trace_power")
    if k < 0:
        raise ConfigError("k must be non-negative")
    n = g.node_count
    exact = k * math.log2(max(g.max_degree, 1)) + math.log2(max(n, 1)) < 62
    A = g.to_dense(np.int64 if exact else np.float64)
    result = np.eye(n, dtype=A.dtype)
    base = A
    e = k
    while e:
        if e & 1:
            result = result @ base
        e >>= 1
        if e:
            base = base @ base
    tr = np.trace(result)
    return int(tr) if exact else float(tr)


def dense_spectrum(g: Graph, tol: float = 1e-12, max_sweeps: int = 100) -> Spectrum:
    """Full spectrum by cyclic Jacobi rotations."""
    _cap(g, DENSE_CAP, "dense_spectrum")
    a = g.to_dense(np.float64).copy()
    diag, off, sweeps = _kernels.jacobi_eigenvalues(a, tol, max_sweeps)
    norm = math.sqrt(g.degree_sum)
    return Spectrum(np.sort(diag)[::-1].copy(), "dense", residual=float(off),
                    residuals=[float(off)], iterations=[int(sweeps)],
                    converged=[bool(off < 1e-10 * max(norm, 1.0))])


def _start_vector(n: int, seed: int) -> np.ndarray:
    v = np.random.default_rng(seed).random(n) + 0.5
    return v / np.linalg.norm(v)


def _rayleigh_ritz(A, v, Av, project=None):
    """Best pair in span{v, Av}; returns (theta, unit vector)."""
    w = Av - (v @ Av) * v
    if project is not None:
        w = project(w)
    nw = np.linalg.norm(w)
    if nw < 1e-14:
        return float(v @ Av), v
    w /= nw
    Aw = A @ w
    H = np.array([[v @ Av, v @ Aw], [w @ Av, w @ Aw]])
    vals, vecs = np.linalg.eigh(0.5 * (H + H.T))
    y = vecs[0, 1] * v + vecs[1, 1] * w
    return float(vals[1]), y / np.linalg.norm(y)


def _power(A, v, tol, max_iters, shift=0.0, project=None):
    """Power iteration on A + shift*I; returns (lambda of A, v, iters, converged)."""
    lam_prev = math.inf
    lam = 0.0
    it = 0
    converged = False
    for it in range(1, max_iters + 1):
        w = A @ v + shift * v
        if project is not None:
            w = project(w)
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        v = w / nw
        Av = A @ v
        lam = float(v @ Av)
        if abs(lam - lam_prev) < tol:
            converged = True
            break
        lam_prev = lam
    return lam, v, it, converged


def power_iteration_top(g: Graph, n_eigs: int = 2, tol: float = 1e-10,
                        max_iters: int = 100_000, seed: int = 0) -> Spectrum:
    """Top ``n_eigs`` algebraic eigenvalues by power iteration with deflation.

    The first pair comes from plain power iteration followed by a
    Rayleigh-Ritz step on span{v, Av}, which separates lambda1 from a
    mirror -lambda1 on bipartite graphs. Later pairs iterate on
    A + lambda1*I (all eigenvalues shifted non-negative, so the largest
    algebraic one dominates) with the vector re-orthogonalized against all
    earlier ones on every iteration.
    """
    if n_eigs < 1:
        raise ConfigError("n_eigs must be at least 1")
    if g.node_count < n_eigs:
        raise ConfigError(f"graph has fewer than {n_eigs} nodes")
    A = g.to_scipy().astype(np.float64)
    n = g.node_count
    found: list[np.ndarray] = []

    def project(w):
        for u in found:
            w = w - (u @ w) * u
        return w

    vals, res, its, conv = [], [], [], []
    shift = 0.0
    for level in range(n_eigs):
        v = project(_start_vector(n, seed + level))
        v /= np.linalg.norm(v)
        lam, v, it, ok = _power(A, v, tol, max_iters, shift=shift,
                                project=project if found else None)
        lam, v = _rayleigh_ritz(A, v, A @ v, project=project if found else None)
        v = project(v)
        v /= np.linalg.norm(v)
        lam = float(v @ (A @ v))
        r = float(np.linalg.norm(A @ v - lam * v))
        if level == 0:
            shift = abs(lam)
        vals.append(lam)
        res.append(r)
        its.append(it)
        conv.append(bool(ok))
        found.append(v)
    order = np.argsort(vals)[::-1]
    return Spectrum(np.array(vals)[order], "power-deflation", residual=max(res),
                    residuals=[res[i] for i in order], iterations=[its[i] for i in order],
                    converged=[conv[i] for i in order],
                    vectors=np.column_stack([found[i] for i in order]))


def power_iteration_top2(g: Graph, tol: float = 1e-10, max_iters: int = 100_000,
                         seed: int = 0) -> Spectrum:
    return power_iteration_top(g, 2, tol, max_iters, seed)


def exact(g: Graph, n_eigs: int = 2, dense_limit: int = 500, **kw) -> Spectrum:
    """Dense solve for small graphs, power iteration otherwise."""
    if g.node_count <= dense_limit:
        return dense_spectrum(g)
    return power_iteration_top(g, n_eigs, **kw)
