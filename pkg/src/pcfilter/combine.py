"""Combined p-values for partial conjunction nulls.

A feature observed in ``n`` studies carries per-study p-values
``p_1, ..., p_n``.  The partial conjunction null at replicability level ``u``
states that fewer than ``u`` of the individual nulls are false; a single
valid p-value for it is built from the order statistics of the row.  Two
combiners are provided:

* Bonferroni combination ``(n - u + 1) * p_(u)``, where ``p_(1) <= ... <=
  p_(n)`` are the sorted row values.
* Fisher combination ``1 - W(-2 * sum_{j>=u} log p_(j))`` with ``W`` the
  chi-squared cdf on ``2 * (n - u + 1)`` degrees of freedom.

The adaptive-filter procedures consume *paired scores*: the Bonferroni
combined value ``s_i`` at level ``u`` together with the filtering value
``f_i = (n - u + 1) * p_(u-1)``, which never exceeds ``s_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dist import chi2_sf_even

__all__ = [
    "as_pvalue_matrix",
    "order_statistics",
    "combine_bonferroni",
    "combine_fisher",
    "bonferroni_pc_pvalues",
    "fisher_pc_pvalues",
    "FisherCombined",
    "PairedScores",
    "build_paired_scores",
]


def _check_unit_interval(arr, what):
    if arr.size and (np.min(arr) < 0.0 or np.max(arr) > 1.0 or not np.all(np.isfinite(arr))):
        bad = np.argwhere(~((arr >= 0.0) & (arr <= 1.0)))
        raise ValueError(f"{what} must lie in [0, 1]; first offender at index {tuple(bad[0])}")


def as_pvalue_matrix(values) -> np.ndarray:
    """Validate and freeze an m x n matrix of per-study p-values.

    Requires m >= 1 features (rows) and n >= 2 studies (columns), every entry
    in [0, 1].  Returns a read-only float array so shape and contents cannot
    change behind a procedure's back.
    """
    arr = np.array(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"p-value matrix must be 2-dimensional, got shape {arr.shape}")
    m, n = arr.shape
    if m < 1:
        raise ValueError("p-value matrix needs at least one feature row")
    if n < 2:
        raise ValueError(f"p-value matrix needs at least two study columns, got {n}")
    _check_unit_interval(arr, "p-values")
    arr.setflags(write=False)
    return arr


def order_statistics(row) -> np.ndarray:
    """Ascending order statistics of one row of per-study p-values."""
    row = np.asarray(row, dtype=float)
    if row.ndim != 1 or row.size < 1:
        raise ValueError("row must be a non-empty 1-d vector")
    _check_unit_interval(row, "p-values")
    return np.sort(row)


def combine_bonferroni(row, u: int) -> float:
    """Bonferroni-combined p-value min(1, (n - u + 1) * p_(u)).

    ``u`` may be as low as 1 so the same operation serves the filtering
    value, which uses order statistic ``u - 1``.
    """
    srt = order_statistics(row)
    n = srt.size
    if not 1 <= u <= n:
        raise ValueError(f"u must satisfy 1 <= u <= {n}, got {u}")
    return float(min(1.0, (n - u + 1) * srt[u - 1]))


def combine_fisher(row, u: int) -> float:
    """Fisher-combined p-value from the upper tail of the row.

    Evaluates 1 - W(-2 * sum_{j=u}^{n} log p_(j)) with W the chi-squared cdf
    on 2(n - u + 1) degrees of freedom (always even, so the exact closed form
    applies).  A zero among the summed order statistics drives the statistic
    to infinity; the combined value is then 0 by the continuity convention.
    """
    srt = order_statistics(row)
    n = srt.size
    if not 2 <= u <= n:
        raise ValueError(f"u must satisfy 2 <= u <= {n}, got {u}")
    tail = srt[u - 1:]
    if tail[0] == 0.0:
        return 0.0
    stat = -2.0 * float(np.sum(np.log(tail)))
    return float(chi2_sf_even(stat, n - u + 1))


def bonferroni_pc_pvalues(matrix, u: int) -> np.ndarray:
    """Row-wise Bonferroni combination of an m x n p-value matrix."""
    arr = as_pvalue_matrix(matrix)
    n = arr.shape[1]
    if not 1 <= u <= n:
        raise ValueError(f"u must satisfy 1 <= u <= {n}, got {u}")
    srt = np.sort(arr, axis=1)
    return np.minimum(1.0, (n - u + 1) * srt[:, u - 1])


class FisherCombined(NamedTuple):
    """Row-wise Fisher combination plus a flag for zero-driven rows."""

    values: np.ndarray
    zero_statistic: np.ndarray  # True where a zero entered the log sum


def fisher_pc_pvalues(matrix, u: int) -> FisherCombined:
    """Row-wise Fisher combination of an m x n p-value matrix.

    Rows whose u-th order statistic is zero get combined value 0 and are
    flagged in ``zero_statistic`` (the statistic overflowed to infinity).
    """
    arr = as_pvalue_matrix(matrix)
    n = arr.shape[1]
    if not 2 <= u <= n:
        raise ValueError(f"u must satisfy 2 <= u <= {n}, got {u}")
    srt = np.sort(arr, axis=1)
    tail = srt[:, u - 1:]
    zero = tail[:, 0] == 0.0
    with np.errstate(divide="ignore"):
        stat = -2.0 * np.sum(np.log(np.where(zero[:, None], 1.0, tail)), axis=1)
    values = chi2_sf_even(stat, n - u + 1)
    values = np.where(zero, 0.0, values)
    return FisherCombined(values=values, zero_statistic=zero)


@dataclass(frozen=True)
class PairedScores:
    """Per-feature combined p-values ``s`` and filtering p-values ``f``.

    Invariants: both vectors live in [0, 1], have equal length and satisfy
    ``f <= s`` elementwise (the filtering value uses a smaller order
    statistic at the same scale).
    """

    s: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if s.ndim != 1 or f.ndim != 1 or s.shape != f.shape:
            raise ValueError("s and f must be 1-d vectors of equal length")
        _check_unit_interval(s, "combined p-values")
        _check_unit_interval(f, "filtering p-values")
        if np.any(f > s):
            i = int(np.argmax(f > s))
            raise ValueError(f"filtering value exceeds combined value at feature {i}")
        s.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "f", f)

    @property
    def m(self) -> int:
        return self.s.size


def build_paired_scores(matrix, u: int) -> PairedScores:
    """Paired scores for every feature of an m x n p-value matrix.

    ``s_i = min(1, (n - u + 1) * p_(u))`` and
    ``f_i = min(1, (n - u + 1) * p_(u-1))``; rows are independent and the
    feature order is preserved.
    """
    arr = as_pvalue_matrix(matrix)
    n = arr.shape[1]
    if not 2 <= u <= n:
        raise ValueError(f"u must satisfy 2 <= u <= {n}, got {u}")
    srt = np.sort(arr, axis=1)
    scale = n - u + 1
    s = np.minimum(1.0, scale * srt[:, u - 1])
    f = np.minimum(1.0, scale * srt[:, u - 2])
    return PairedScores(s=s, f=f)
