"""
Seeded experiments over prevalence and sample size: the loss of rules built
for a misjudged prevalence, and Monte Carlo error statistics with the
prevalence either known or estimated adaptively.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import groupby, product
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.random import default_rng

from seroclass.classification.losses import domain_masses, loss_binary
from seroclass.classification.rules import ClassificationRule, Label
from seroclass.core.metrics import TrialMetric, TrialOutcome, failure_counts, metric_from_failure, metric_from_value
from seroclass.core.params import QuadratureSpec
from seroclass.core.preconditions import require_shared_domain
from seroclass.estimation.prevalence import PrevalenceEstimate, adaptive_classify, estimate_from_masses
from seroclass.models.density import TruncatedDensity
from seroclass.utils.exceptions import InvalidConfigException, InvalidPrevalenceException, SeroclassException
from seroclass.validation.synthetic import draw_labeled_sample, trial_seed

_logger = logging.getLogger(__name__)

FLAT_TOLERANCE = 1e-12


def default_q_grid(points: int = 90, lo: float = 0.01, hi: float = 0.9) -> List[float]:
    return [float(q) for q in np.round(np.linspace(lo, hi, points), 10)]


@dataclass(frozen=True)
class SweepRow:
    q: float
    false_pos: float
    false_neg: float
    total: float


@dataclass(frozen=True)
class SweepReport:
    true_p: float
    rows: Tuple[SweepRow, ...]
    argmin_q: float
    flat: bool

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(row) for row in self.rows], columns=["q", "false_pos", "false_neg", "total"])

    def to_dict(self) -> Dict[str, Any]:
        return {"true_p": self.true_p, "argmin_q": self.argmin_q, "flat": self.flat, "rows": len(self.rows)}


def sweep_loss_vs_q(
    true_p: float,
    q_grid: Sequence[float],
    densities: Tuple[TruncatedDensity, TruncatedDensity],
    quad: QuadratureSpec = QuadratureSpec(),
) -> SweepReport:
    """
    Loss at the true prevalence of binary rules built for each presumed
    prevalence ``q``. ``false_pos`` and ``false_neg`` are the prevalence-weighted
    error masses, so they add up to ``total``.
    """
    if not q_grid:
        raise InvalidConfigException("q grid must not be empty")
    if any(not 0.0 < q < 1.0 for q in q_grid):
        raise InvalidPrevalenceException("q grid values must lie strictly between 0 and 1")
    pos, neg = densities
    rows = []
    for q in q_grid:
        report = loss_binary(ClassificationRule.binary(pos, neg, q), quad, prevalence=true_p)
        false_pos = (1.0 - true_p) * report.false_pos_mass
        false_neg = true_p * report.false_neg_mass
        rows.append(SweepRow(float(q), false_pos, false_neg, false_pos + false_neg))
    totals = np.array([row.total for row in rows])
    flat = bool(totals.max() - totals.min() <= FLAT_TOLERANCE)
    if flat:
        _logger.info("Loss is flat in q for true prevalence %g; the minimizer is arbitrary", true_p)
    return SweepReport(float(true_p), tuple(rows), rows[int(np.argmin(totals))].q, flat)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """
    Parameters
    ----------
    prevalence_grid:
        True prevalences, each in (0, 1).
    sample_sizes:
        Samples per trial.
    trials:
        Trials per (prevalence, sample size) cell.
    base_seed:
        Root of every trial's random stream.
    quad:
        Quadrature used for region masses.
    densities:
        (positive, negative) densities the samples are drawn from and classified with.
    """
    prevalence_grid: Tuple[float, ...]
    sample_sizes: Tuple[int, ...]
    trials: int
    base_seed: int
    quad: QuadratureSpec
    densities: Tuple[TruncatedDensity, TruncatedDensity]
    stratified: bool = True
    threads: int = 1
    p_init: float = 0.5
    tol: float = 1e-4
    max_iter: int = 20

    def __post_init__(self):
        if not self.prevalence_grid or not self.sample_sizes:
            raise InvalidConfigException("Prevalence grid and sample sizes must not be empty")
        if any(not 0.0 < p < 1.0 for p in self.prevalence_grid):
            raise InvalidPrevalenceException("Prevalence grid values must lie strictly between 0 and 1")
        if any(int(s) != s or s < 1 for s in self.sample_sizes):
            raise InvalidConfigException("Sample sizes must be positive integers")
        if self.trials < 1 or self.threads < 1:
            raise InvalidConfigException("Need at least one trial and one thread")
        require_shared_domain(self.densities[0].domain, self.densities[1].domain)

    def describe(self) -> Dict[str, Any]:
        return {
            "prevalence_grid": list(self.prevalence_grid),
            "sample_sizes": list(self.sample_sizes),
            "trials": self.trials,
            "base_seed": self.base_seed,
            "quadrature": self.quad.asdict(),
            "stratified": self.stratified,
            "p_init": self.p_init,
            "tol": self.tol,
            "max_iter": self.max_iter,
        }


def run_trial(cfg: ExperimentConfig, i_p: int, i_s: int, trial: int, known_prevalence: bool) -> TrialOutcome:
    pos, neg = cfg.densities
    p, size = cfg.prevalence_grid[i_p], int(cfg.sample_sizes[i_s])
    rng = default_rng(trial_seed(cfg.base_seed, (i_p, i_s, trial)))
    points, truth = draw_labeled_sample(pos, neg, p, size, rng, cfg.stratified)
    if known_prevalence:
        codes, p_hat, iterations = ClassificationRule.binary(pos, neg, p).label_codes(points), None, 0
    else:
        result = adaptive_classify(points, pos, neg, cfg.p_init, cfg.tol, cfg.max_iter, cfg.quad)
        codes, p_hat, iterations = result.label_codes, result.p_hat, len(result.estimates)
    positive = codes == Label.POSITIVE.value
    false_positives = int(np.sum(positive & ~truth))
    false_negatives = int(np.sum(~positive & truth))
    return TrialOutcome(
        error_rate=(false_positives + false_negatives) / size,
        false_positives=false_positives,
        false_negatives=false_negatives,
        sample_count=size,
        p_hat=p_hat,
        iterations=iterations,
    )


def _run_metric(cfg: ExperimentConfig, key: Tuple[int, int, int], known_prevalence: bool) -> TrialMetric:
    try:
        return metric_from_value(*key, run_trial(cfg, *key, known_prevalence))
    except SeroclassException as e:
        return metric_from_failure(*key, e)


def _mean_std(values: np.ndarray) -> Tuple[float, float]:
    if len(values) == 0:
        return math.nan, math.nan
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return float(np.mean(values)), std


@dataclass(frozen=True)
class McErrorCell:
    p: float
    sample_size: int
    trials: int
    failures: int
    mean_error: float
    std_error: float
    mean_plus_3sigma: float
    mean_prevalence_error: Optional[float] = None
    std_prevalence_error: Optional[float] = None
    prevalence_error_plus_3sigma: Optional[float] = None


@dataclass(frozen=True)
class McErrorReport:
    known_prevalence: bool
    cells: Tuple[McErrorCell, ...]
    exponents: Dict[float, float]
    failure_counts: Dict[str, int] = field(default_factory=dict)

    def cell(self, p: float, sample_size: int) -> McErrorCell:
        for cell in self.cells:
            if cell.p == p and cell.sample_size == sample_size:
                return cell
        raise KeyError((p, sample_size))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(cell) for cell in self.cells])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "known_prevalence": self.known_prevalence,
            "exponents": {repr(p): e for p, e in self.exponents.items()},
            "failure_counts": self.failure_counts,
            "cells": len(self.cells),
        }


def power_law_exponent(sample_sizes: Sequence[int], stds: Sequence[float]) -> float:
    """Least-squares slope of log std against log sample size."""
    sizes = np.asarray(sample_sizes, dtype=float)
    stds = np.asarray(stds, dtype=float)
    usable = np.isfinite(stds) & (stds > 0)
    if np.sum(usable) < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(sizes[usable]), np.log(stds[usable]), 1)
    return float(slope)


def _summarize(cfg: ExperimentConfig, i_p: int, i_s: int, metrics: List[TrialMetric], known: bool) -> McErrorCell:
    p = cfg.prevalence_grid[i_p]
    outcomes = [m.value.get() for m in sorted(metrics, key=lambda m: m.key) if m.succeeded]
    errors = np.array([o.error_rate for o in outcomes])
    mean, std = _mean_std(errors)
    cell = dict(
        p=p,
        sample_size=int(cfg.sample_sizes[i_s]),
        trials=len(outcomes),
        failures=len(metrics) - len(outcomes),
        mean_error=mean,
        std_error=std,
        mean_plus_3sigma=mean + 3.0 * std,
    )
    if not known:
        relative = np.array([abs(o.p_hat - p) / p for o in outcomes])
        p_mean, p_std = _mean_std(relative)
        cell.update(
            mean_prevalence_error=p_mean, std_prevalence_error=p_std, prevalence_error_plus_3sigma=p_mean + 3.0 * p_std
        )
    return McErrorCell(**cell)


def run_trials(cfg: ExperimentConfig, known_prevalence: bool) -> List[TrialMetric]:
    """Every trial of every cell, in (prevalence, size, trial) order."""
    keys = list(product(range(len(cfg.prevalence_grid)), range(len(cfg.sample_sizes)), range(cfg.trials)))
    with ThreadPoolExecutor(max_workers=cfg.threads) as executor:
        return list(executor.map(lambda key: _run_metric(cfg, key, known_prevalence), keys))


def mc_error_stats(cfg: ExperimentConfig, known_prevalence: bool) -> McErrorReport:
    """
    Total classification error rate per (prevalence, sample size) cell, either
    with the optimal rule for the true prevalence or with adaptively estimated
    prevalence. Trials that fail are counted and left out of the statistics.
    """
    metrics = run_trials(cfg, known_prevalence)
    by_cell: Dict[Tuple[int, int], List[TrialMetric]] = {}
    for metric in metrics:
        by_cell.setdefault((metric.prevalence_index, metric.size_index), []).append(metric)

    cells = [_summarize(cfg, i_p, i_s, by_cell[(i_p, i_s)], known_prevalence) for i_p, i_s in sorted(by_cell)]
    exponents = {}
    for p in cfg.prevalence_grid:
        row = [c for c in cells if c.p == p]
        exponents[p] = power_law_exponent([c.sample_size for c in row], [c.std_error for c in row])
    failures = failure_counts(metrics)
    if failures:
        _logger.warning("%d trial(s) failed: %s", sum(failures.values()), failures)
    return McErrorReport(known_prevalence, tuple(cells), exponents, failures)


@dataclass(frozen=True)
class EstimatorCell:
    p: float
    sample_size: int
    trials: int
    mean_p_hat: float
    std_p_hat: float
    standard_error: float
    clamped: int


@dataclass(frozen=True)
class EstimatorReport:
    rule_prevalence: float
    cells: Tuple[EstimatorCell, ...]
    exponents: Dict[float, float]

    def cell(self, p: float, sample_size: int) -> EstimatorCell:
        for cell in self.cells:
            if cell.p == p and cell.sample_size == sample_size:
                return cell
        raise KeyError((p, sample_size))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(cell) for cell in self.cells])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rule_prevalence": self.rule_prevalence,
            "exponents": {repr(p): e for p, e in self.exponents.items()},
            "cells": len(self.cells),
        }


def estimator_stats(cfg: ExperimentConfig, rule_prevalence: float = 0.5) -> EstimatorReport:
    """
    Spread of the prevalence estimate when every trial uses one fixed binary rule,
    here deliberately not the optimal one.
    """
    pos, neg = cfg.densities
    rule = ClassificationRule.binary(pos, neg, rule_prevalence)
    masses = domain_masses(rule, cfg.quad)

    def estimate(key: Tuple[int, int, int]) -> PrevalenceEstimate:
        i_p, i_s, trial = key
        rng = default_rng(trial_seed(cfg.base_seed, key))
        p, size = cfg.prevalence_grid[i_p], int(cfg.sample_sizes[i_s])
        points, _ = draw_labeled_sample(pos, neg, p, size, rng, cfg.stratified)
        q_bar_p = float(np.mean(rule.label_codes(points) == Label.POSITIVE.value))
        return estimate_from_masses(q_bar_p, len(points), masses.P_P, masses.N_P, rule_prevalence)

    keys = list(product(range(len(cfg.prevalence_grid)), range(len(cfg.sample_sizes)), range(cfg.trials)))
    with ThreadPoolExecutor(max_workers=cfg.threads) as executor:
        estimates = list(executor.map(estimate, keys))

    cells = []
    for (i_p, i_s), group in groupby(zip(keys, estimates), key=lambda item: item[0][:2]):
        group = list(group)
        p_hats = np.array([e.p_hat for _, e in group])
        mean, std = _mean_std(p_hats)
        cells.append(EstimatorCell(
            p=cfg.prevalence_grid[i_p],
            sample_size=int(cfg.sample_sizes[i_s]),
            trials=len(group),
            mean_p_hat=mean,
            std_p_hat=std,
            standard_error=std / math.sqrt(len(group)),
            clamped=sum(e.clamped for _, e in group),
        ))
    exponents = {
        p: power_law_exponent([c.sample_size for c in cells if c.p == p], [c.std_p_hat for c in cells if c.p == p])
        for p in cfg.prevalence_grid
    }
    return EstimatorReport(rule_prevalence, tuple(cells), exponents)
