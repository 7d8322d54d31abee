"""Seeded batches of simulations / CA runs and their summary statistics."""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from skiorder import lambda_ca, swarmsim
from skiorder.errors import SkiOrderError
from skiorder.metrics import METRIC_KEYS, MetricsReport, compute_all
from skiorder.trajmat import preprocess

# most disordered to most ordered
DEFAULT_MODELS = (
    ("pure_noise", False),
    ("position_walk", False),
    ("kinematic_noise", False),
    ("velocity_walk", False),
    ("acceleration_noise", False),
    ("cucker_smale", True),
    ("vicsek", True),
    ("spiral_in", True),
    ("cucker_smale", False),
    ("vicsek", False),
    ("spiral_in", False),
)
DEFAULT_TRIALS = 25

SUMMARY_METRICS = METRIC_KEYS[:8]


def model_label(model: str, noisy: bool) -> str:
    return f"{model}+noise" if noisy else model


def trial_seed(base_seed: int, group: int, trial: int) -> int:
    """64-bit seed for one trial; depends only on its coordinates, not on scheduling."""
    ss = np.random.SeedSequence([base_seed, group, trial])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class EnsembleSpec:
    model_list: tuple = DEFAULT_MODELS
    trials_per_model: int = DEFAULT_TRIALS
    base_seed: int = 0
    sim_defaults: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials_per_model < 1:
            raise ValueError("trials_per_model must be >= 1")
        object.__setattr__(self, "model_list", tuple((m, bool(n)) for m, n in self.model_list))


@dataclass(frozen=True)
class TrialResult:
    model: str
    trial: int
    seed: int
    report: MetricsReport | None = None
    error: str | None = None
    extra: tuple = ()

    def row(self) -> dict:
        out = {"model": self.model, "trial": self.trial, "seed": self.seed}
        out.update(dict(self.extra))
        values = self.report.to_dict() if self.report is not None else {}
        for key in METRIC_KEYS:
            out[key] = values.get(key)
        out["error"] = self.error or ""
        return out


def _analyze(matrix) -> MetricsReport:
    return compute_all(preprocess(matrix))


def _swarm_trial(job) -> TrialResult:
    label, cfg, trial = job
    try:
        report = _analyze(swarmsim.simulate(cfg))
    except SkiOrderError as exc:
        return TrialResult(label, trial, cfg.seed, error=f"{type(exc).__name__}: {exc}")
    return TrialResult(label, trial, cfg.seed, report=report)


def _ca_trial(job) -> TrialResult:
    cfg, trial, seed = job
    extra = (("lambda", cfg.lam),)
    try:
        report = _analyze(lambda_ca.run(cfg).to_signal_matrix())
    except SkiOrderError as exc:
        return TrialResult("ca", trial, seed, error=f"{type(exc).__name__}: {exc}", extra=extra)
    return TrialResult("ca", trial, seed, report=report, extra=extra)


def default_workers() -> int:
    env = os.environ.get("SKIORDER_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _map(fn, jobs: list, workers: int | None) -> list:
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def swarm_jobs(spec: EnsembleSpec) -> list:
    jobs = []
    for g, (model, noisy) in enumerate(spec.model_list):
        for t in range(spec.trials_per_model):
            params = dict(spec.sim_defaults)
            params.update(model=model, measurement_noise=noisy, seed=trial_seed(spec.base_seed, g, t))
            jobs.append((model_label(model, noisy), swarmsim.SimConfig(**params), t))
    return jobs


def run_ensemble(spec: EnsembleSpec, workers: int | None = None) -> list[TrialResult]:
    """One row per (model, trial), in model-list order; failures are recorded, not raised."""
    return _map(_swarm_trial, swarm_jobs(spec), workers)


def run_ca_ensemble(
    lambdas: Sequence[float] = lambda_ca.LAMBDA_GRID,
    trials_per_lambda: int = 5,
    base_seed: int = 0,
    ca_defaults: dict | None = None,
    workers: int | None = None,
) -> list[TrialResult]:
    """CA runs over a lambda grid; each trial draws its own rule table and initial world."""
    jobs = []
    for g, lam in enumerate(lambdas):
        for t in range(trials_per_lambda):
            seed = trial_seed(base_seed, g, t)
            params = dict(ca_defaults or {})
            params.update(lam=float(lam), rule_seed=seed, world_seed=trial_seed(seed, 1, 0))
            jobs.append((lambda_ca.CAConfig(**params), t, seed))
    return _map(_ca_trial, jobs, workers)


@dataclass(frozen=True)
class StatSummary:
    mean: float
    median: float
    std_sample: float
    q1: float
    q3: float
    iqr: float
    n: int


def summarize(values: Iterable[float]) -> StatSummary:
    """Mean, median, sample std and type-7 quartiles."""
    x = np.asarray(list(values), dtype=float)
    if x.size == 0:
        raise ValueError("cannot summarize an empty sequence")
    q1, median, q3 = np.percentile(x, [25, 50, 75], method="linear")
    std = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return StatSummary(
        mean=float(np.mean(x)),
        median=float(median),
        std_sample=std,
        q1=float(q1),
        q3=float(q3),
        iqr=float(q3 - q1),
        n=int(x.size),
    )


def metric_values(results: Iterable[TrialResult], metric: str, model: str | None = None) -> list[float]:
    """Finite values of ``metric`` over results with a defined knee, optionally for one model."""
    out = []
    for r in results:
        if model is not None and r.model != model:
            continue
        if r.report is None:
            continue
        v = r.report.to_dict()[metric]
        if v is not None and math.isfinite(v):
            out.append(float(v))
    return out


def summary_table(results: Sequence[TrialResult], group_key=lambda r: r.model) -> list[dict]:
    """One row per (group, metric) with StatSummary fields; empty groups get n = 0."""
    groups: dict = {}
    for r in results:
        groups.setdefault(group_key(r), []).append(r)
    rows = []
    for name, members in groups.items():
        for metric in SUMMARY_METRICS:
            vals = metric_values(members, metric)
            row = {"model": name, "metric": metric}
            if vals:
                row.update(dataclasses.asdict(summarize(vals)))
            else:
                row.update({k: None for k in ("mean", "median", "std_sample", "q1", "q3", "iqr")}, n=0)
            rows.append(row)
    return rows
