"""Error and power metrics aggregated over simulation replicates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .procedures import RejectionResult
from .simulate import TruthLabels

__all__ = [
    "MetricsRecord",
    "false_discoveries",
    "tpr",
    "false_discovery_proportion",
    "post_filter_null_proportion",
    "aggregate",
]


@dataclass(frozen=True)
class MetricsRecord:
    """One row of a results table: method x parameter setting."""

    method: str
    u: int
    k: int
    alpha: float
    pi1: float
    rho: float
    theta: float
    gamma: float
    reps: int
    kfwer: float
    kfwer_se: float
    tpr: float
    tpr_se: float
    fdx: float
    fdx_se: float
    fdr: float
    fdr_se: float
    mean_pi0_at_threshold: float  # NaN for methods without a filtering stage

    def __post_init__(self):
        for name in ("kfwer", "tpr", "fdx", "fdr"):
            v = getattr(self, name)
            if not math.isnan(v) and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


def false_discoveries(result: RejectionResult, truth: TruthLabels) -> int:
    """Number of rejected features whose partial conjunction null is true."""
    if result.rejected.size and result.rejected[-1] >= truth.is_false_pc_null.size:
        raise ValueError("rejected index out of range for the given truth labels")
    return int(np.count_nonzero(~truth.is_false_pc_null[result.rejected]))


def tpr(result: RejectionResult, truth: TruthLabels) -> float:
    """Fraction of false nulls rejected, with a 1-floor on the denominator."""
    n_false = truth.n_false
    hits = int(np.count_nonzero(truth.is_false_pc_null[result.rejected]))
    return hits / max(1, n_false)


def false_discovery_proportion(result: RejectionResult, truth: TruthLabels) -> float:
    """V / max(1, |R|)."""
    return false_discoveries(result, truth) / max(1, result.n_rejected)


def post_filter_null_proportion(result: RejectionResult, truth: TruthLabels) -> float:
    """True null fraction among filter survivors; 0 with no survivors,
    NaN when the procedure has no filtering stage."""
    survivors = result.diagnostics.get("survivor_index")
    if survivors is None:
        return math.nan
    if survivors.size == 0:
        return 0.0
    return float(np.count_nonzero(~truth.is_false_pc_null[survivors]) / survivors.size)


def _binomial_se(p_hat: float, reps: int) -> float:
    return math.sqrt(p_hat * (1.0 - p_hat) / reps) if reps > 0 else math.nan


def _mean_se(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(values.size))


def aggregate(
    results,
    truths,
    k: int,
    gamma: float,
    *,
    method: str = "",
    u: int = 0,
    alpha: float = math.nan,
    pi1: float = math.nan,
    rho: float = math.nan,
    theta: float = math.nan,
) -> MetricsRecord:
    """Aggregate per-replicate results into one metrics row.

    kfwer = fraction of replicates with V >= k, fdx = fraction with
    FDP >= gamma, fdr = mean FDP, tpr = mean per-replicate TPR, and
    mean_pi0_at_threshold = mean true post-filter null proportion.
    """
    results = list(results)
    truths = list(truths)
    if len(results) != len(truths):
        raise ValueError(f"stream length mismatch: {len(results)} results vs {len(truths)} truths")
    reps = len(results)
    v = np.array([false_discoveries(res, tr) for res, tr in zip(results, truths)])
    fdp = np.array([false_discovery_proportion(res, tr) for res, tr in zip(results, truths)])
    tprs = np.array([tpr(res, tr) for res, tr in zip(results, truths)])
    pi0s = np.array([post_filter_null_proportion(res, tr) for res, tr in zip(results, truths)])
    kfwer_hat = float(np.mean(v >= k)) if reps else math.nan
    fdx_hat = float(np.mean(fdp >= gamma)) if reps else math.nan
    return MetricsRecord(
        method=method, u=u, k=k, alpha=alpha, pi1=pi1, rho=rho, theta=theta, gamma=gamma,
        reps=reps,
        kfwer=kfwer_hat,
        kfwer_se=_binomial_se(kfwer_hat, reps),
        tpr=float(np.mean(tprs)) if reps else math.nan,
        tpr_se=_mean_se(tprs),
        fdx=fdx_hat,
        fdx_se=_binomial_se(fdx_hat, reps),
        fdr=float(np.mean(fdp)) if reps else math.nan,
        fdr_se=_mean_se(fdp),
        mean_pi0_at_threshold=float(np.mean(pi0s)) if reps else math.nan,
    )
