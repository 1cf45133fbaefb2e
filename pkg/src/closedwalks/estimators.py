"""Closed-walk estimators of the top adjacency eigenvalues.

Every estimator follows the same shape: walk, accumulate importance-weighted
closed-walk observations per length k, scale by the degree-sum estimate to
get tr(A^k), and take k-th roots.

=========  ==========================================================
naive      closure seen only when the walk itself returns (r_{i-k} == r_i)
a          closure via r_{i-k} in N(r_{i-1}); fixed k
b          as ``a`` for every k in [2, K], k chosen from the alpha scan
c          common neighbors of r_{i-k+1} and r_{i-1}; also returns lambda2
=========  ==========================================================
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError, EstimationError, IndeterminateEstimate
from .walker import Walk, WalkConfig, estimate_D, random_walk

ALPHA_INIT = 0.99
ALPHA_FLOOR = 1e-6
ALPHA_CEIL = 0.999
MIN_K = 5
Z95 = 1.96


# ----------------------------------------------------------------- diagnostics


@dataclass
class Diagnostics:
    estimate: float
    variance: float
    ci_low: float
    ci_high: float
    n_samples: int

    @property
    def half_width(self) -> float:
        return Z95 * math.sqrt(self.variance / self.n_samples)


def variance_and_ci(c_samples, D_est: float) -> Diagnostics:
    """95% interval for the closed-walk count from per-step increments.

    Each sample is ``D_est * increment``; the point estimate is their mean.
    Samples along one walk are correlated, so coverage of this interval is
    only nominal.
    """
    x = D_est * np.asarray(c_samples, dtype=np.float64)
    n = len(x)
    if n < 2:
        raise ConfigError("need at least two samples for a variance")
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    hw = Z95 * math.sqrt(var / n)
    return Diagnostics(mean, var, mean - hw, mean + hw, n)


def _diagnostics_from_sums(s1, s2, n, D_est, log_mode) -> Diagnostics | None:
    if n < 2:
        return None
    if log_mode:
        with np.errstate(over="ignore"):
            s1, s2 = math.exp(s1) if s1 > -np.inf else 0.0, math.exp(s2) if s2 > -np.inf else 0.0
    mean = s1 / n
    with np.errstate(over="ignore", invalid="ignore"):
        var = max((s2 - n * mean * mean) / (n - 1), 0.0) * D_est * D_est
    est = mean * D_est
    hw = Z95 * math.sqrt(var / n) if math.isfinite(var) else math.inf
    return Diagnostics(est, var, est - hw, est + hw, int(n))


# -------------------------------------------------------------------- counters


@dataclass
class ClosedWalkCounters:
    """Weighted closed-walk observations c[k] for k <= K.

    In log space ``c`` and ``sumsq`` hold natural logs of the sums.
    """

    c: np.ndarray
    sumsq: np.ndarray
    samples: np.ndarray
    K: int
    log_space: bool = False

    def log_c(self, k: int) -> float:
        v = self.c[k]
        if self.log_space:
            return float(v)
        return math.log(v) if v > 0 else -math.inf

    def trace_estimate(self, k: int, D_est: float) -> float | None:
        """tr(A^k) estimate, or None when nothing was observed."""
        lc = self.log_c(k)
        if lc == -math.inf or self.samples[k] == 0:
            return None
        return math.exp(lc + math.log(D_est) - math.log(self.samples[k]))

    def lambda1(self, k: int, D_est: float) -> float | None:
        lc = self.log_c(k)
        if lc == -math.inf or self.samples[k] == 0:
            return None
        return math.exp((lc + math.log(D_est) - math.log(self.samples[k])) / k)

    def diagnostics(self, k: int, D_est: float) -> Diagnostics | None:
        return _diagnostics_from_sums(self.c[k], self.sumsq[k], self.samples[k], D_est,
                                      self.log_space)


def count_closed_walks(walk: Walk, kind: str, K: int, log_space: bool | None = None,
                       trace_k: int = 0):
    """Run a counter over a recorded walk.

    With ``log_space=None`` plain doubles are tried first and the run is
    repeated in log space if any sum overflowed. Returns the counters and
    the per-step increments for ``trace_k`` (linear scale).
    """
    L = walk.steps_taken
    args = (kind, walk.nodes, walk.rows, walk.degs, walk.offsets, walk.nbrs,
            walk.burn_in, L, K)
    use_log = bool(log_space)
    s1, s2, ns, inc = _kernels.count_closed_walks(*args, log_mode=use_log, trace_k=trace_k)
    if log_space is None and not (np.isfinite(s1).all() and np.isfinite(s2).all()):
        use_log = True
        s1, s2, ns, inc = _kernels.count_closed_walks(*args, log_mode=True, trace_k=trace_k)
    if use_log and trace_k:
        inc = np.exp(inc)
    return ClosedWalkCounters(s1, s2, ns, K, use_log), inc


# ------------------------------------------------------------------ k choice


def _choose_k(alpha_by_k, beta: float, K: int) -> tuple[int, float | None, list[str]]:
    if not 0 < beta < 1:
        raise ConfigError(f"beta must lie in (0, 1), got {beta}")
    vals = [a for a in alpha_by_k if a is not None and not (isinstance(a, float) and math.isnan(a))]
    if not vals:
        return K, None, ["no_alpha"]
    a = min(max(min(vals), ALPHA_FLOOR), ALPHA_CEIL)
    raw = math.ceil(math.log(beta) / math.log(a) - 1e-12)
    return max(min(raw, K), MIN_K), raw, []


def choose_k(alpha_by_k, beta: float, K: int) -> int:
    """Smallest k with min(alpha)^k <= beta, clamped to [5, K].

    ``alpha_by_k`` may contain None/NaN for lengths that could not be
    evaluated; those are ignored. With no usable entry the answer is K.
    """
    return _choose_k(alpha_by_k, beta, K)[0]


def lambda2_from_traces(trace_km2: float, trace_k: float, k: int) -> float:
    """Second eigenvalue from tr(A^(k-2)) and tr(A^k), assuming lambda1^k
    alone dominates tr(A^k)."""
    if k < 3:
        raise ConfigError("k must be at least 3")
    if trace_km2 <= 0 or trace_k <= 0:
        raise IndeterminateEstimate("traces must be positive")
    diff = trace_km2 - trace_k ** ((k - 2) / k)
    if diff <= 0:
        raise IndeterminateEstimate(f"trace difference {diff:g} <= 0 at k={k}")
    return diff ** (1.0 / (k - 2))


def _alpha_scan(lam: dict[int, float | None], k_lo: int, K: int):
    """alpha[k] = lambda2/lambda1[k] for k in [k_lo, K]; None where either
    lambda1[k] or lambda1[k-2] is undefined."""
    alpha: dict[int, float | None] = {}
    for k in range(k_lo, K + 1):
        a, b = lam.get(k), lam.get(k - 2)
        if a is None or b is None:
            alpha[k] = None
            continue
        if a < b:
            l2 = (b ** (k - 2) - a ** (k - 2)) ** (1.0 / (k - 2))
        else:
            l2 = a
        alpha[k] = l2 / a
    return alpha


def _snap_to_defined(k: int, lam: dict[int, float | None], K: int) -> int | None:
    """Nearest k' in [5, K] with lambda1[k'] defined; ties go to the larger."""
    for delta in range(0, K):
        for cand in (k + delta, k - delta):
            if MIN_K <= cand <= K and lam.get(cand) is not None:
                return cand
    return None


def _parity_oscillates(lam: dict[int, float | None]) -> bool:
    ks = sorted(k for k, v in lam.items() if v is not None)
    if not ks:
        return False
    odd = [k for k in lam if k % 2 == 1 and k >= 3]
    even = [k for k in lam if k % 2 == 0]
    if odd and all(lam[k] is None for k in odd) and any(lam[k] is not None for k in even):
        return True
    hits = total = 0
    for k in ks:
        lo, hi = lam.get(k - 1), lam.get(k + 1)
        if lo is None or hi is None:
            continue
        s = lam[k] - 0.5 * (lo + hi)
        total += 1
        hits += (s > 0) == (k % 2 == 0)
    return total >= 4 and hits >= 0.8 * total


# --------------------------------------------------------------------- report


@dataclass
class EstimateReport:
    algorithm: str
    lambda1_by_k: list
    alpha_by_k: list
    k_prime: int
    lambda1: float
    lambda2: float | None
    D_est: float
    queries_used: int
    walk_steps: int
    seed: int
    beta: float | None
    K: int
    t: int
    m: int
    complete: bool = True
    missing_k: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    log_space: bool = False
    diagnostics: dict = field(default_factory=dict)
    eigenvalues: list | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["diagnostics"] = {str(k): asdict(v) for k, v in self.diagnostics.items()}
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def _as_list(by_k: dict, K: int) -> list:
    return [by_k.get(k) for k in range(K + 1)]


def _walk_and_count(g, n, K, cfg, kind, window):
    walk = random_walk(g, cfg, window=window)
    if walk.steps_counted < 1:
        raise EstimationError("budget ran out before the burn-in finished")
    D_est = estimate_D(walk.d_accumulator(), n)
    counters, _ = count_closed_walks(walk, kind, K)
    return walk, D_est, counters


def _report(algorithm, walk, D_est, counters, lam, alpha, k_prime, lambda1, lambda2,
            beta, K, flags, missing):
    if not walk.complete:
        flags = flags + ["incomplete"]
    if _parity_oscillates(lam):
        flags = flags + ["parity_oscillation"]
    diags = {}
    for k in sorted(lam):
        dg = counters.diagnostics(k, D_est)
        if dg is not None:
            diags[k] = dg
    return EstimateReport(
        algorithm=algorithm,
        lambda1_by_k=_as_list(lam, K),
        alpha_by_k=_as_list(alpha, K),
        k_prime=k_prime,
        lambda1=lambda1,
        lambda2=lambda2,
        D_est=D_est,
        queries_used=walk.queries_used,
        walk_steps=walk.steps_counted,
        seed=walk.seed,
        beta=beta,
        K=K,
        t=walk.burn_in,
        m=walk.walk_length,
        complete=walk.complete,
        missing_k=missing,
        flags=flags,
        log_space=counters.log_space,
        diagnostics=diags,
    )


# ------------------------------------------------------------------ estimators


def _fixed_k(algorithm, kind, g, n, k, cfg, k_min):
    if k < k_min:
        raise ConfigError(f"k must be at least {k_min}")
    walk, D_est, counters = _walk_and_count(g, n, k, cfg, kind, window=k)
    lam1 = counters.lambda1(k, D_est)
    if lam1 is None:
        raise EstimationError(f"no closed walks of length {k} observed")
    return _report(algorithm, walk, D_est, counters, {k: lam1}, {}, k, lam1, None,
                   None, k, [], [])


def naive_lambda1(g, n: int, k: int, cfg: WalkConfig) -> EstimateReport:
    """lambda1 from closures the walk actually traverses."""
    return _fixed_k("naive", "naive", g, n, k, cfg, k_min=1)


def cwalker_a(g, n: int, k: int, cfg: WalkConfig) -> EstimateReport:
    """lambda1 from closures detected through the current node's neighbor
    list; needs no queries beyond the walk itself."""
    return _fixed_k("a", "phi", g, n, k, cfg, k_min=2)


def _check_bc(K, beta):
    if K < MIN_K:
        raise ConfigError(f"K must be at least {MIN_K}")
    if not 0 < beta < 1:
        raise ConfigError(f"beta must lie in (0, 1), got {beta}")


def _select(lam, alpha, beta, K):
    missing = [k for k, v in alpha.items() if v is None]
    k_raw, unclamped, flags = _choose_k(list(alpha.values()), beta, K)
    if unclamped is not None and unclamped > K:
        flags.append("high_alpha")
    k_prime = _snap_to_defined(k_raw, lam, K)
    if k_prime is None:
        raise EstimationError(f"no closed walks observed for any k in [{MIN_K}, {K}]")
    if k_prime != k_raw:
        flags.append(f"k_moved_from_{k_raw}")
    return k_prime, missing, flags


def cwalker_b(g, n: int, K: int, cfg: WalkConfig, beta: float) -> EstimateReport:
    """lambda1 with the closed-walk length picked so that the estimated
    (lambda2/lambda1)^k stays under ``beta``."""
    _check_bc(K, beta)
    walk, D_est, counters = _walk_and_count(g, n, K, cfg, "phi", window=K)
    lam = {k: counters.lambda1(k, D_est) for k in range(2, K + 1)}
    if all(v is None for v in lam.values()):
        raise EstimationError("no closed walks observed for any k")
    alpha = _alpha_scan(lam, 3, K)
    k_prime, missing, flags = _select(lam, alpha, beta, K)
    return _report("b", walk, D_est, counters, lam, alpha, k_prime, lam[k_prime], None,
                   beta, K, flags, missing)


def cwalker_c(g, n: int, K: int, cfg: WalkConfig, beta: float) -> EstimateReport:
    """lambda1 and lambda2 from common-neighbor closures."""
    _check_bc(K, beta)
    walk, D_est, counters = _walk_and_count(g, n, K, cfg, "common", window=K)
    lam = {k: counters.lambda1(k, D_est) for k in range(3, K + 1)}
    if all(v is None for v in lam.values()):
        raise EstimationError("no closed walks observed for any k")
    alpha = _alpha_scan(lam, 4, K)
    k_prime, missing, flags = _select(lam, alpha, beta, K)
    l1, l0 = lam[k_prime], lam.get(k_prime - 2)
    if l0 is None:
        lambda2 = None
        flags.append("lambda2_undefined")
    elif l0 >= l1:
        lambda2 = (l0 ** (k_prime - 2) - l1 ** (k_prime - 2)) ** (1.0 / (k_prime - 2))
    else:
        lambda2 = l1
        flags.append("lambda2_fallback")
    return _report("c", walk, D_est, counters, lam, alpha, k_prime, l1, lambda2,
                   beta, K, flags, missing)


# ----------------------------------------------------------------------- top n


@dataclass
class TopNLevel:
    value: float
    k: int
    alpha_min: float | None
    note: str


def _top_n_levels(traces, n_eigs: int, beta: float = 0.05, K: int | None = None):
    tr = {}
    for k, v in (traces.items() if isinstance(traces, dict) else enumerate(traces)):
        if v is not None and not (isinstance(v, float) and math.isnan(v)):
            tr[int(k)] = float(v)
    if K is None:
        K = max(tr) if tr else 0
    if n_eigs < 1:
        raise ConfigError("n_eigs must be at least 1")
    known: list[float] = []
    levels: list[TopNLevel] = []
    for _ in range(n_eigs):
        lam = {}
        for k, v in tr.items():
            if k < 1 or k > K:
                continue
            r = v - sum(x ** k for x in known)
            lam[k] = r ** (1.0 / k) if r > 0 else None
        alpha = _alpha_scan(lam, 3, K)
        k_raw, _, _ = _choose_k(list(alpha.values()), beta, K)
        k_sel = _snap_to_defined(k_raw, lam, K)
        if k_sel is None:
            break
        if known and lam[k_sel] > known[-1]:
            break
        usable = [a for a in alpha.values() if a is not None]
        note = "exact recursion" if not known else (
            f"uses {len(known)} earlier estimate(s); their error propagates")
        levels.append(TopNLevel(lam[k_sel], k_sel, min(usable) if usable else None, note))
        known.append(lam[k_sel])
    return levels


def top_n_iterative(traces, n_eigs: int, beta: float = 0.05, K: int | None = None) -> np.ndarray:
    """Top eigenvalue magnitudes peeled off one level at a time.

    ``traces`` maps k to tr(A^k) (a dict or a sequence indexed by k; None or
    NaN marks missing lengths). Level c removes the c-1 values already found
    from every trace and repeats the single-eigenvalue rule on what is left.
    The list is cut short at the first level where no residual is positive
    or where the value would exceed the one before it (the residual is then
    still dominated by error left over from earlier levels).
    """
    return np.array([lv.value for lv in _top_n_levels(traces, n_eigs, beta, K)])


def topn_estimate(g, n: int, K: int, cfg: WalkConfig, beta: float, n_eigs: int) -> EstimateReport:
    """Sample traces with common-neighbor counters, then peel ``n_eigs``."""
    _check_bc(K, beta)
    walk, D_est, counters = _walk_and_count(g, n, K, cfg, "common", window=K)
    traces = {k: counters.trace_estimate(k, D_est) for k in range(3, K + 1)}
    levels = _top_n_levels(traces, n_eigs, beta, K)
    if not levels:
        raise EstimationError("no closed walks observed for any k")
    lam = {k: counters.lambda1(k, D_est) for k in range(3, K + 1)}
    flags = [] if len(levels) == n_eigs else [f"truncated_at_{len(levels)}"]
    rep = _report("topn", walk, D_est, counters, lam, _alpha_scan(lam, 4, K), levels[0].k,
                  levels[0].value, levels[1].value if len(levels) > 1 else None,
                  beta, K, flags, [])
    rep.eigenvalues = [lv.value for lv in levels]
    return rep


ALGORITHMS = {"naive", "a", "b", "c", "topn"}


def estimate(algorithm: str, g, n: int, cfg: WalkConfig, *, k: int | None = None,
             K: int = 30, beta: float = 0.05, n_eigs: int = 3) -> EstimateReport:
    """Dispatch by algorithm name, as the CLI and bench harness do."""
    if algorithm == "naive":
        return naive_lambda1(g, n, k if k is not None else 3, cfg)
    if algorithm == "a":
        return cwalker_a(g, n, k if k is not None else 3, cfg)
    if algorithm == "b":
        return cwalker_b(g, n, K, cfg, beta)
    if algorithm == "c":
        return cwalker_c(g, n, K, cfg, beta)
    if algorithm == "topn":
        return topn_estimate(g, n, K, cfg, beta, n_eigs)
    raise ConfigError(f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}")
