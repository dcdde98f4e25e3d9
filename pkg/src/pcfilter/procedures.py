"""Rejection procedures for partial conjunction testing.

The two adaptive-filter procedures consume :class:`~pcfilter.combine.PairedScores`
and reject feature ``i`` when its combined p-value ``s_i`` falls strictly
below a data-driven threshold:

* ``adafilter_bon_threshold`` solves
  ``t_hat = sup{ t in [0, k*alpha] : t * #{f_i < t} <= k*alpha }``.
* ``adabon_threshold`` additionally discounts by an adaptive estimate of the
  post-filter proportion of true nulls and solves
  ``sup{ t in [0, 1] : t * #{f_i < t, s_i >= theta*t} / (1 - theta*t) <= k*alpha }``.

Both suprema are computed exactly.  The survivor count is a step function
that only changes as ``t`` crosses one of finitely many breakpoints (the
``f_i`` and ``s_i/theta`` values), so on each interval between breakpoints
the constraint is a monotone function of ``t`` and its largest admissible
point has a closed form.  The passing set need not be an interval; the
global supremum is the maximum over the per-interval optima.  No grid search
is involved anywhere; dense grids exist only as independent test oracles.

A false-exceedance augmentation (``augment_fdx``) extends the adaptive
rejection set while keeping the false discovery proportion below ``gamma``,
and classical step-up baselines (generalized Bonferroni, k-FWER Hochberg,
adaptive Bonferroni, adaptive Hochberg) are included for comparison studies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .combine import PairedScores

__all__ = [
    "ProcedureContext",
    "RejectionResult",
    "Pi0Estimate",
    "UnsupportedConfigError",
    "UndefinedEstimateError",
    "adafilter_bon_threshold",
    "leave_one_out_threshold",
    "adabon_threshold",
    "estimate_pi0",
    "run_generalized_bonferroni",
    "run_adafilter_bon",
    "run_adafilter_adabon",
    "augment_fdx",
    "run_augmented_adabon",
    "run_hochberg_kfwer",
    "run_adaptive_bonferroni",
    "run_adaptive_hochberg",
]

# chunk length for the breakpoint sweep; keeps the working set cache-resident
# so the threshold scales O(m log m) up into the tens of millions of features
_SWEEP_CHUNK = 1 << 19


class UnsupportedConfigError(ValueError):
    """A procedure was invoked with a configuration it does not support."""


class UndefinedEstimateError(ValueError):
    """The requested estimate is undefined (no features survive the filter)."""


@dataclass(frozen=True)
class ProcedureContext:
    """Shared knobs: replicability level u, tolerance k, target alpha,
    tuning theta and exceedance tolerance gamma."""

    u: int
    k: int = 1
    alpha: float = 0.05
    theta: float = 0.5
    gamma: float = 0.1

    def __post_init__(self):
        if int(self.u) != self.u or self.u < 2:
            raise ValueError(f"u must be an integer >= 2, got {self.u}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")

    @property
    def k_alpha(self) -> float:
        return self.k * self.alpha


@dataclass
class RejectionResult:
    """Outcome of one procedure: operative threshold and rejected features.

    ``rejected`` holds sorted, unique 0-based feature indices.  ``threshold``
    is the method's operative cutoff (t_hat, t_hat_theta, tau_hat, or the
    critical scale of a baseline).  It can exceed 1 only in the degenerate
    regime k*alpha > 1, where the defining supremum ranges over [0, k*alpha].
    """

    method: str
    threshold: float
    rejected: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = np.asarray(self.rejected, dtype=np.intp)
        if idx.ndim != 1:
            raise ValueError("rejected must be a 1-d index vector")
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0):
            raise ValueError("rejected indices must be sorted, unique and non-negative")
        if not np.isfinite(self.threshold) or self.threshold < 0.0:
            raise ValueError(f"threshold must be finite and >= 0, got {self.threshold}")
        self.rejected = idx

    @property
    def n_rejected(self) -> int:
        return self.rejected.size


@dataclass(frozen=True)
class Pi0Estimate:
    """Adaptive estimate of the post-filter proportion of true nulls."""

    t: float
    theta: float
    value: float
    survivors: int

    def __post_init__(self):
        if self.value < 0.0:
            raise ValueError("pi0 estimate cannot be negative")
        if self.survivors < 1:
            raise ValueError("pi0 estimate requires at least one survivor")


def adafilter_bon_threshold(f, ctx: ProcedureContext) -> float:
    """Exact sup of { t in [0, k*alpha] : t * #{f_i < t} <= k*alpha }.

    Sort the filtering values.  On the interval between consecutive sorted
    values the survivor count is a constant ``j``, the constraint reads
    ``t * j <= k*alpha`` and the interval's admissible supremum is
    ``min(next value, k*alpha / j, k*alpha)``.  The answer is the maximum
    over intervals whose admissible supremum actually exceeds the interval's
    left end.  O(m log m).
    """
    f = np.asarray(f, dtype=float)
    if f.ndim != 1:
        raise ValueError("f must be a 1-d vector")
    ka = ctx.k_alpha
    fs = np.sort(f)
    uppers = np.concatenate([fs, [np.inf]])
    lowers = np.concatenate([[0.0], fs])
    counts = np.arange(f.size + 1, dtype=float)
    with np.errstate(divide="ignore"):
        cap = np.where(counts > 0, ka / np.maximum(counts, 1.0), np.inf)
    cand = np.minimum(np.minimum(uppers, cap), ka)
    ok = (counts == 0) | (cand > lowers)
    return float(cand[ok].max())


def leave_one_out_threshold(f, i: int, ctx: ProcedureContext) -> float:
    """Threshold recomputed with feature ``i``'s filtering value forced to 0.

    Zeroing ``f_i`` makes feature ``i`` count as a survivor at every t > 0,
    which realizes the "1 + sum over others" count used by the leave-one-out
    diagnostic.  Only needed for property checks of the threshold's
    stability; ``i`` is a 0-based index.
    """
    f = np.asarray(f, dtype=float)
    if not 0 <= i < f.size:
        raise IndexError(f"feature index {i} out of range for m={f.size}")
    g = f.copy()
    g[i] = 0.0
    return adafilter_bon_threshold(g, ctx)


def _first_of_run(a: np.ndarray) -> np.ndarray:
    """For sorted ``a``, the index of the first element of each equal run,
    i.e. #{x in a : x < a[i]} for every i."""
    n = a.size
    if n == 0:
        return np.empty(0, dtype=np.intp)
    idx = np.arange(n)
    fresh = np.empty(n, dtype=bool)
    fresh[0] = True
    np.not_equal(a[1:], a[:-1], out=fresh[1:])
    return np.maximum.accumulate(np.where(fresh, idx, 0))


def _prev_value(a: np.ndarray) -> np.ndarray:
    """Predecessor of each element within sorted ``a`` (0 for the first)."""
    prev = np.empty_like(a)
    if a.size:
        prev[0] = 0.0
        prev[1:] = a[:-1]
    return prev


def _family_max(v, own_rank, other, other_is_fs, fs, ka, ka_theta):
    """Largest admissible point over the pieces that end at the breakpoints
    ``v`` (one of the two breakpoint families), swept in cache-sized chunks.

    For a piece ending at v the survivor count is
    c(v) = #{f_i < v} - #{s_i/theta < v}; the constraint t * c <= ka * (1 -
    theta * t) caps the piece at ka / (c + ka * theta), and the piece
    contributes only if that admissible point exceeds the piece's left end
    (the predecessor breakpoint across both families).
    """
    best = 0.0
    prev_own = _prev_value(v)
    for a in range(0, v.size, _SWEEP_CHUNK):
        b = min(a + _SWEEP_CHUNK, v.size)
        chunk = v[a:b]
        n_other = np.searchsorted(other, chunk, side="left")
        if other_is_fs:
            c = n_other - own_rank[a:b]
        else:
            c = own_rank[a:b] - n_other
        if other.size:
            prev_other = np.where(n_other > 0, other[np.maximum(n_other - 1, 0)], 0.0)
            lo = np.maximum(prev_own[a:b], prev_other)
        else:
            lo = prev_own[a:b]
        cap = ka / (c + ka_theta)
        cand = np.minimum(chunk, cap)
        ok = cand > lo
        if ok.any():
            val = float(cand[ok].max())
            if val > best:
                best = val
    return best


def adabon_threshold(scores: PairedScores, ctx: ProcedureContext) -> float:
    """Exact sup of { t in [0,1] : t * C(t) / (1 - theta*t) <= k*alpha }
    where C(t) = #{ f_i < t and s_i >= theta*t }.

    Feature ``i`` contributes to C exactly on the window
    ``f_i < t <= s_i / theta``, so C changes only at the ``f_i`` and
    ``s_i/theta`` breakpoints.  On the interval between consecutive
    breakpoints, C is a constant ``c`` and the constraint is equivalent to
    ``t <= k*alpha / (c + k*alpha*theta)``.  The product form makes an empty
    survivor set yield 0, so t = 0 always passes and the supremum exists.

    The candidate for each piece is evaluated at the piece's right-end
    breakpoint; the two breakpoint families are swept separately (plus the
    terminal piece ending at 1), which avoids materializing a merged grid
    and keeps the per-chunk working set cache-resident.  Total cost is
    O(m log m), dominated by two sorts.
    """
    ka = ctx.k_alpha
    theta = ctx.theta
    ka_theta = ka * theta
    s_open = scores.s / theta
    s_open = s_open[s_open <= 1.0]  # windows reaching past 1 never close
    fs = np.sort(scores.f)
    ss = np.sort(s_open)
    best = max(
        _family_max(fs, _first_of_run(fs), ss, False, fs, ka, ka_theta),
        _family_max(ss, _first_of_run(ss), fs, True, fs, ka, ka_theta),
    )
    # terminal piece (largest breakpoint, 1]
    c_top = int(np.searchsorted(fs, 1.0, side="left")) - int(np.searchsorted(ss, 1.0, side="left"))
    lo_top = max(fs[-1] if fs.size else 0.0, ss[-1] if ss.size else 0.0)
    cand_top = min(1.0, ka / (c_top + ka_theta))
    if cand_top > lo_top and cand_top > best:
        best = cand_top
    return best


def estimate_pi0(scores: PairedScores, t: float, theta: float) -> Pi0Estimate:
    """Post-filter null proportion estimate at evaluation point ``t``.

    value = #{f_i < t, s_i >= theta*t} / ((1 - theta*t) * #{f_i < t}).
    Survivors with a large combined p-value are mostly true nulls; the
    1/(1 - theta*t) factor undoes the truncation at theta*t.  The estimate
    may exceed 1.  Undefined (raises) when nothing survives the filter.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError(f"t must lie in (0, 1], got {t}")
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    survive = scores.f < t
    survivors = int(np.count_nonzero(survive))
    if survivors == 0:
        raise UndefinedEstimateError(f"no features survive the filter at t={t}")
    big = int(np.count_nonzero(survive & (scores.s >= theta * t)))
    value = big / ((1.0 - theta * t) * survivors)
    return Pi0Estimate(t=float(t), theta=float(theta), value=float(value), survivors=survivors)


def _filter_diagnostics(scores: PairedScores, t: float, theta: float | None) -> dict:
    survivor_index = np.flatnonzero(scores.f < t)
    diag = {"survivors": int(survivor_index.size), "survivor_index": survivor_index}
    if theta is not None and survivor_index.size and 0.0 < t <= 1.0:
        diag["pi0_hat"] = estimate_pi0(scores, t, theta).value
    return diag


def run_adafilter_bon(scores: PairedScores, ctx: ProcedureContext) -> RejectionResult:
    """Adaptive-filter Bonferroni procedure: reject where s_i < t_hat."""
    t_hat = adafilter_bon_threshold(scores.f, ctx)
    rejected = np.flatnonzero(scores.s < t_hat)
    return RejectionResult(
        method="adafilter-bon",
        threshold=t_hat,
        rejected=rejected,
        diagnostics=_filter_diagnostics(scores, t_hat, None),
    )


def run_adafilter_adabon(scores: PairedScores, ctx: ProcedureContext) -> RejectionResult:
    """Adaptive-filter procedure with the post-filter null proportion folded
    into the threshold: reject where s_i < t_hat_theta."""
    t_theta = adabon_threshold(scores, ctx)
    rejected = np.flatnonzero(scores.s < t_theta)
    return RejectionResult(
        method="adafilter-adabon",
        threshold=t_theta,
        rejected=rejected,
        diagnostics=_filter_diagnostics(scores, t_theta, ctx.theta),
    )


def augment_fdx(s, t_theta: float, ctx: ProcedureContext) -> RejectionResult:
    """Augment the adaptive rejection set under a false-exceedance budget.

    Solves ``tau_hat = sup{ tau in [0,1] :
    (#{t_theta <= s_i <= tau} + k) / max(1, #{s_i <= tau}) <= gamma }`` and
    rejects ``s_i <= tau_hat`` (non-strict).  The ratio is piecewise constant
    with jumps at the distinct s values, so the supremum is the right
    endpoint of the last maximal passing interval; that endpoint itself need
    not satisfy the condition.  If nothing passes, ``tau_hat = 0`` and only
    exact-zero scores are rejected.

    ``t_theta`` must be the threshold produced by :func:`run_adafilter_adabon`
    on the same score vector.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 1:
        raise ValueError("s must be a 1-d vector")
    k = ctx.k
    gamma = ctx.gamma
    ssort = np.sort(s)
    bps = np.unique(np.concatenate([[0.0, 1.0], ssort]))
    in_band = np.sort(s[s >= t_theta])
    above = np.searchsorted(in_band, bps, side="right")  # #{t_theta <= s_i <= tau}
    total = np.searchsorted(ssort, bps, side="right")  # #{s_i <= tau}
    ratio = (above + k) / np.maximum(total, 1)
    ok = ratio <= gamma
    if ok[-1]:
        tau = 1.0
    else:
        passing = np.flatnonzero(ok[:-1])
        tau = float(bps[passing.max() + 1]) if passing.size else 0.0
    rejected = np.flatnonzero(s <= tau)
    return RejectionResult(
        method="adafilter-adabon-fdx",
        threshold=tau,
        rejected=rejected,
        diagnostics={"t_theta": float(t_theta)},
    )


def run_augmented_adabon(scores: PairedScores, ctx: ProcedureContext) -> RejectionResult:
    """Adaptive-filter procedure followed by the false-exceedance augmentation."""
    t_theta = adabon_threshold(scores, ctx)
    result = augment_fdx(scores.s, t_theta, ctx)
    result.diagnostics.update(_filter_diagnostics(scores, t_theta, ctx.theta))
    return result


def run_generalized_bonferroni(pc_pvalues, ctx: ProcedureContext) -> RejectionResult:
    """Generalized Bonferroni: reject where p_i <= k * alpha / m."""
    p = np.asarray(pc_pvalues, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("pc_pvalues must be a non-empty 1-d vector")
    thresh = min(1.0, ctx.k_alpha / p.size)
    return RejectionResult(
        method="bonferroni",
        threshold=thresh,
        rejected=np.flatnonzero(p <= thresh),
    )


def _step_up(p: np.ndarray, crit: np.ndarray, method: str, diagnostics=None) -> RejectionResult:
    """Step-up rule: find the largest j with p_(j) <= crit_j, reject all
    p-values at or below that order statistic."""
    ps = np.sort(p)
    hits = np.flatnonzero(ps <= crit)
    if hits.size == 0:
        return RejectionResult(method=method, threshold=0.0,
                               rejected=np.empty(0, dtype=np.intp),
                               diagnostics=diagnostics or {})
    cut = ps[hits.max()]
    return RejectionResult(method=method, threshold=float(cut),
                           rejected=np.flatnonzero(p <= cut),
                           diagnostics=diagnostics or {})


def run_hochberg_kfwer(pc_pvalues, ctx: ProcedureContext) -> RejectionResult:
    """Step-up k-FWER Hochberg with critical values k*alpha/m for j <= k and
    k*alpha/(m + k - j) for j > k."""
    p = np.asarray(pc_pvalues, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("pc_pvalues must be a non-empty 1-d vector")
    m, k = p.size, ctx.k
    j = np.arange(1, m + 1)
    crit = np.where(j <= k, ctx.k_alpha / m, ctx.k_alpha / (m + k - j))
    crit = np.minimum(1.0, crit)
    return _step_up(p, crit, "hochberg")


def run_adaptive_bonferroni(pc_pvalues, ctx: ProcedureContext, lam: float = 0.5) -> RejectionResult:
    """Bonferroni with a plug-in null count (m0_hat = (#{p > lam} + 1)/(1 - lam)).

    FWER-only: raises for k > 1.
    """
    if ctx.k != 1:
        raise UnsupportedConfigError("adaptive Bonferroni is defined for k = 1 only")
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    p = np.asarray(pc_pvalues, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("pc_pvalues must be a non-empty 1-d vector")
    m0_hat = (np.count_nonzero(p > lam) + 1) / (1.0 - lam)
    thresh = min(1.0, ctx.alpha / m0_hat)
    return RejectionResult(
        method="adaptive-bonferroni",
        threshold=thresh,
        rejected=np.flatnonzero(p <= thresh),
        diagnostics={"m0_hat": float(m0_hat)},
    )


def run_adaptive_hochberg(pc_pvalues, ctx: ProcedureContext, kappa: int) -> RejectionResult:
    """Hochberg step-up with a quantile plug-in null count.

    The null count n_hat = (m - kappa + 1) / (1 - p_(kappa)), capped into
    [1, m], replaces m in the Hochberg constants:
    crit_j = alpha / max(1, n_hat - j + 1).  FWER-only: raises for k > 1.
    """
    if ctx.k != 1:
        raise UnsupportedConfigError("adaptive Hochberg is defined for k = 1 only")
    p = np.asarray(pc_pvalues, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("pc_pvalues must be a non-empty 1-d vector")
    m = p.size
    if not 1 <= kappa <= m:
        raise ValueError(f"kappa must satisfy 1 <= kappa <= {m}, got {kappa}")
    ps = np.sort(p)
    p_kappa = ps[kappa - 1]
    n_hat = np.inf if p_kappa >= 1.0 else (m - kappa + 1) / (1.0 - p_kappa)
    n_hat = float(min(max(n_hat, 1.0), m))
    j = np.arange(1, m + 1)
    crit = ctx.alpha / np.maximum(1.0, n_hat - j + 1)
    return _step_up(p, crit, "adaptive-hochberg", diagnostics={"n_hat": n_hat})
