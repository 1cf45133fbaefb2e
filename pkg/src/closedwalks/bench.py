"""Repeated seeded runs at fixed query budgets, summarized per budget."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ClosedWalksError, ConfigError, DataError, EstimationError
from .estimators import ALGORITHMS, estimate
from .graphio import FullAccess, Graph, QueryLedger, load_report
from .walker import WalkConfig

CSV_HEADER = ["graph", "algorithm", "Q", "runs", "mean_estimate", "truth", "rel_error",
              "nrmse", "ci_low", "ci_high", "mean_runtime_s", "missing_runs"]


@dataclass
class ExperimentPlan:
    graph: str
    algorithm: str
    budgets: list
    runs: int = 100
    beta: float = 0.05
    K: int = 30
    k: int | None = None
    burn_in: int | None = None
    seed_base: int = 0
    workers: int = 1
    lcc: bool = True
    n_eigs: int = 3
    truth: dict | None = None
    label: str | None = None

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if not self.budgets:
            raise ConfigError("budgets must not be empty")
        if any(b <= a for a, b in zip(self.budgets, self.budgets[1:])):
            raise ConfigError("budgets must be strictly increasing")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentPlan":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown plan fields: {sorted(extra)}")
        plan = cls(**d)
        plan.budgets = [int(b) for b in plan.budgets]
        plan.validate()
        return plan

    @classmethod
    def from_json(cls, path) -> "ExperimentPlan":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except FileNotFoundError as e:
            raise DataError(f"plan file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"plan is not valid JSON: {e}") from e


@dataclass
class MetricRow:
    graph: str
    algorithm: str
    target: str
    Q: int
    runs: int
    mean_estimate: float
    truth: float
    rel_error: float
    nrmse: float
    ci_low: float
    ci_high: float
    mean_runtime_s: float
    missing_runs: int
    bias2: float = 0.0
    variance: float = 0.0
    mean_steps_counted: float = 0.0

    def csv_values(self, timing: bool = True) -> list:
        def f(x):
            return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))
        return [self.graph, self.algorithm if self.target == "lambda1" else
                f"{self.algorithm}:{self.target}", self.Q, self.runs,
                f(self.mean_estimate), f(self.truth), f(self.rel_error), f(self.nrmse),
                f(self.ci_low), f(self.ci_high),
                f(self.mean_runtime_s) if timing else "", self.missing_runs]


@dataclass
class RunResult:
    run_index: int
    seed: int
    lambda1: float | None
    lambda2: float | None
    runtime_s: float
    steps_counted: int = 0
    error: str | None = None


def summarize(estimates, truth: float) -> dict:
    """Relative error, NRMSE and its bias/variance split, plus a 95% CI of
    the mean across runs. Population variance is used so that
    nrmse^2 == bias^2 + variance holds exactly."""
    x = np.asarray(estimates, dtype=np.float64)
    n = len(x)
    if n == 0:
        nan = float("nan")
        return dict(mean_estimate=nan, rel_error=nan, nrmse=nan, ci_low=nan, ci_high=nan,
                    bias2=nan, variance=nan)
    mean = float(x.mean())
    bias2 = ((mean - truth) / truth) ** 2
    var = float(((x - mean) ** 2).mean()) / truth ** 2
    sd = float(x.std(ddof=1)) if n > 1 else 0.0
    hw = 1.96 * sd / math.sqrt(n)
    return dict(mean_estimate=mean, rel_error=(mean - truth) / truth,
                nrmse=math.sqrt(bias2 + var), ci_low=mean - hw, ci_high=mean + hw,
                bias2=bias2, variance=var)


def _one_run(g: Graph, plan: ExperimentPlan, Q: int, run_index: int) -> RunResult:
    seed = plan.seed_base + run_index
    access = FullAccess(g, QueryLedger(budget=Q))
    cfg = WalkConfig(walk_length=Q, burn_in=plan.burn_in, seed=seed)
    t0 = time.perf_counter()
    try:
        rep = estimate(plan.algorithm, access, g.node_count, cfg, k=plan.k, K=plan.K,
                       beta=plan.beta, n_eigs=plan.n_eigs)
    except EstimationError as e:
        return RunResult(run_index, seed, None, None, time.perf_counter() - t0, error=str(e))
    dt = time.perf_counter() - t0
    return RunResult(run_index, seed, rep.lambda1, rep.lambda2, dt, rep.walk_steps)


def _truth_values(plan: ExperimentPlan, truth) -> dict:
    if truth is None:
        truth = plan.truth
    if truth is None:
        raise ConfigError("no truth supplied; pass a Spectrum or set plan.truth")
    if isinstance(truth, dict):
        return {k: float(v) for k, v in truth.items() if v is not None}
    out = {"lambda1": truth.lambda1}
    if len(truth.eigenvalues) > 1:
        out["lambda2"] = truth.lambda2
    return out


def run_plan(plan: ExperimentPlan, truth=None, graph: Graph | None = None,
             keep_runs: bool = False):
    """Execute every (budget, run) pair and return MetricRows ordered by
    budget then target. ``truth`` is a Spectrum or a dict with lambda1
    (and optionally lambda2); it falls back to ``plan.truth``.

    With ``keep_runs=True`` returns ``(rows, runs_by_budget)``.
    """
    plan.validate()
    truths = _truth_values(plan, truth)
    if graph is None:
        graph, _ = load_report(plan.graph, lcc=plan.lcc)
    label = plan.label or Path(plan.graph).name
    rows: list[MetricRow] = []
    all_runs = {}
    for Q in plan.budgets:
        if plan.workers == 1:
            results = [_one_run(graph, plan, Q, r) for r in range(plan.runs)]
        else:
            with ThreadPoolExecutor(max_workers=plan.workers) as ex:
                results = list(ex.map(lambda r: _one_run(graph, plan, Q, r), range(plan.runs)))
        results.sort(key=lambda r: r.run_index)
        all_runs[Q] = results
        ok = [r for r in results if r.error is None]
        targets = ["lambda1"] + (["lambda2"] if plan.algorithm in ("c", "topn") else [])
        for target in targets:
            if target not in truths:
                continue
            vals = [getattr(r, target) for r in ok if getattr(r, target) is not None]
            s = summarize(vals, truths[target])
            rt = float(np.mean([r.runtime_s for r in results])) if results else float("nan")
            steps = float(np.mean([r.steps_counted for r in ok])) if ok else 0.0
            rows.append(MetricRow(label, plan.algorithm, target, Q, plan.runs,
                                  s["mean_estimate"], truths[target], s["rel_error"], s["nrmse"],
                                  s["ci_low"], s["ci_high"], rt, plan.runs - len(vals),
                                  s["bias2"], s["variance"], steps))
    return (rows, all_runs) if keep_runs else rows


def format_csv(rows, timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_values(timing))
    return buf.getvalue()


def emit_results(rows, path, timing: bool = True, extra: dict | None = None) -> tuple[Path, Path]:
    """Write ``<path>`` as CSV and ``<path stem>.json`` as its mirror."""
    if not rows:
        raise ConfigError("nothing to write: empty results table")
    path = Path(path)
    json_path = path.with_suffix(".json")
    records = []
    for r in rows:
        d = {k: None if isinstance(v, float) and math.isnan(v) else v
             for k, v in asdict(r).items()}
        if not timing:
            d["mean_runtime_s"] = None
        records.append(d)
    doc = {"rows": records}
    if extra:
        doc.update(extra)
    try:
        path.write_text(format_csv(rows, timing))
        json_path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_plain) + "\n")
    except OSError as e:
        raise ClosedWalksError(f"cannot write results to {path}: {e}") from e
    return path, json_path


def _plain(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)
