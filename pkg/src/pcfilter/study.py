"""Parameter sweeps over the simulation grid, with a stable CSV schema.

A sweep runs every (pi1, rho) cell of the grid for ``reps`` replicates,
computes paired scores and combined p-values once per replicate and
replicability level, applies the requested procedures for every tolerance
``k``, and aggregates one :class:`~pcfilter.metrics.MetricsRecord` per
(method, u, k, pi1, rho).

Replicate data depend only on (master_seed, replicate, pi1, rho), never on
which methods or k values are requested, so sweeps with a shared seed see
common random numbers.  Worker count (config field or the PCFILTER_WORKERS
environment variable) changes scheduling only, never results.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .combine import build_paired_scores, fisher_pc_pvalues
from .metrics import MetricsRecord, _binomial_se, _mean_se
from .procedures import (
    ProcedureContext,
    run_adafilter_adabon,
    run_adafilter_bon,
    run_adaptive_bonferroni,
    run_adaptive_hochberg,
    run_augmented_adabon,
    run_generalized_bonferroni,
    run_hochberg_kfwer,
)
from .simulate import RNG_KIND, SimulationConfig, generate_replicate
from .metrics import false_discoveries as _V
from .metrics import false_discovery_proportion as _fdp
from .metrics import post_filter_null_proportion as _pi0
from .metrics import tpr as _tpr
from .simulate import TruthLabels, false_pc_null_labels

__all__ = [
    "SCORE_METHODS",
    "PC_METHODS",
    "FWER_ONLY_METHODS",
    "DEFAULT_METHODS",
    "SweepConfig",
    "run_sweep",
    "sweep_config_from_json",
    "write_metrics_csv",
    "read_metrics_csv",
    "resolve_workers",
    "WORKERS_ENV_VAR",
]

SCORE_METHODS = ("adafilter-adabon", "adafilter-bon", "adafilter-adabon-fdx")
PC_METHODS = ("bonferroni", "hochberg", "adaptive-bonferroni", "adaptive-hochberg")
FWER_ONLY_METHODS = ("adaptive-bonferroni", "adaptive-hochberg")
DEFAULT_METHODS = (
    "adafilter-adabon",
    "adafilter-bon",
    "bonferroni",
    "hochberg",
    "adaptive-bonferroni",
    "adaptive-hochberg",
    "adafilter-adabon-fdx",
)

WORKERS_ENV_VAR = "PCFILTER_WORKERS"
SCHEMA_VERSION = 1

CSV_COLUMNS = (
    "method", "u", "k", "alpha", "pi1", "rho", "theta", "gamma", "reps",
    "kfwer", "kfwer_se", "tpr", "tpr_se", "fdx", "fdx_se", "fdr", "fdr_se",
    "mean_pi0_at_threshold",
)

# per-replicate scalar slots collected for aggregation
_STAT_V, _STAT_NREJ, _STAT_TPR, _STAT_FDP, _STAT_PI0 = range(5)


@dataclass(frozen=True)
class SweepConfig:
    """Grid and procedure settings for one sweep."""

    pi1_values: tuple = (0.025, 0.05, 0.075, 0.10, 0.125, 0.15)
    rho_values: tuple = (-0.8, -0.2, 0.2, 0.8)
    u_values: tuple = (2, 3, 4)
    k_values: tuple = (1,)
    methods: tuple = DEFAULT_METHODS
    m: int = 500
    n: int = 4
    reps: int = 1000
    master_seed: int = 0
    alpha: float = 0.05
    theta: float = 0.5
    gamma: float = 0.1
    mu_magnitude: float = 4.0
    adaptive_lambda: float = 0.5
    adaptive_kappa: int | None = None  # default m - 10, capped into [1, m]
    workers: int = 1

    def __post_init__(self):
        unknown = set(self.methods) - set(SCORE_METHODS) - set(PC_METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if not self.pi1_values or not self.rho_values or not self.u_values or not self.k_values:
            raise ValueError("grid dimensions must be non-empty")
        if any(int(k) != k or k < 1 for k in self.k_values):
            raise ValueError("k values must be positive integers")
        if max(self.u_values) > self.n or min(self.u_values) < 2:
            raise ValueError(f"u values must lie in [2, n={self.n}]")

    @property
    def kappa(self) -> int:
        if self.adaptive_kappa is not None:
            return self.adaptive_kappa
        return max(1, min(self.m, self.m - 10))


def resolve_workers(cfg: SweepConfig) -> int:
    """Worker count: the environment variable wins over the config value."""
    env = os.environ.get(WORKERS_ENV_VAR)
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ValueError(f"{WORKERS_ENV_VAR} must be an integer, got {env!r}") from exc
    return max(1, cfg.workers)


def _active_pairs(cfg: SweepConfig):
    """(method, k) combinations actually run; FWER-only baselines skip k > 1."""
    pairs = []
    for method in cfg.methods:
        for k in cfg.k_values:
            if k > 1 and method in FWER_ONLY_METHODS:
                continue
            pairs.append((method, int(k)))
    return pairs


def _run_block(args) -> dict:
    """Replicate range [start, stop) of one (pi1, rho) cell.

    Returns {(u, k, method): array of shape (stop-start, 5)} with per
    replicate V, |R|, TPR, FDP and true post-filter null proportion.
    """
    cfg, pi1, rho, start, stop = args
    sim = SimulationConfig(
        pi1=pi1, rho=rho, m=cfg.m, n=cfg.n, mu_magnitude=cfg.mu_magnitude,
        u=min(cfg.u_values), reps=cfg.reps, master_seed=cfg.master_seed,
    )
    pairs = _active_pairs(cfg)
    out = {
        (u, k, method): np.empty((stop - start, 5))
        for u in cfg.u_values for (method, k) in pairs
    }
    for r in range(start, stop):
        pvalues, truth = generate_replicate(sim, r)
        for u in cfg.u_values:
            labels = TruthLabels(
                mu=truth.mu, is_false_pc_null=false_pc_null_labels(truth.mu, u)
            )
            scores = None
            fisher = None
            for method, k in pairs:
                ctx = ProcedureContext(
                    u=u, k=k, alpha=cfg.alpha, theta=cfg.theta, gamma=cfg.gamma
                )
                if method in SCORE_METHODS:
                    if scores is None:
                        scores = build_paired_scores(pvalues, u)
                    if method == "adafilter-adabon":
                        res = run_adafilter_adabon(scores, ctx)
                    elif method == "adafilter-bon":
                        res = run_adafilter_bon(scores, ctx)
                    else:
                        res = run_augmented_adabon(scores, ctx)
                else:
                    if fisher is None:
                        fisher = fisher_pc_pvalues(pvalues, u).values
                    if method == "bonferroni":
                        res = run_generalized_bonferroni(fisher, ctx)
                    elif method == "hochberg":
                        res = run_hochberg_kfwer(fisher, ctx)
                    elif method == "adaptive-bonferroni":
                        res = run_adaptive_bonferroni(fisher, ctx, lam=cfg.adaptive_lambda)
                    else:
                        res = run_adaptive_hochberg(fisher, ctx, kappa=cfg.kappa)
                row = out[(u, k, method)][r - start]
                row[_STAT_V] = _V(res, labels)
                row[_STAT_NREJ] = res.n_rejected
                row[_STAT_TPR] = _tpr(res, labels)
                row[_STAT_FDP] = _fdp(res, labels)
                row[_STAT_PI0] = _pi0(res, labels)
    return out


def _aggregate_cell(cfg: SweepConfig, pi1, rho, stats: dict) -> list[MetricsRecord]:
    records = []
    for (u, k, method), arr in stats.items():
        v = arr[:, _STAT_V]
        fdp = arr[:, _STAT_FDP]
        tprs = arr[:, _STAT_TPR]
        pi0s = arr[:, _STAT_PI0]
        reps = arr.shape[0]
        kfwer_hat = float(np.mean(v >= k))
        fdx_hat = float(np.mean(fdp >= cfg.gamma))
        records.append(MetricsRecord(
            method=method, u=u, k=k, alpha=cfg.alpha, pi1=pi1, rho=rho,
            theta=cfg.theta, gamma=cfg.gamma, reps=reps,
            kfwer=kfwer_hat, kfwer_se=_binomial_se(kfwer_hat, reps),
            tpr=float(np.mean(tprs)), tpr_se=_mean_se(tprs),
            fdx=fdx_hat, fdx_se=_binomial_se(fdx_hat, reps),
            fdr=float(np.mean(fdp)), fdr_se=_mean_se(fdp),
            mean_pi0_at_threshold=float(np.mean(pi0s)),
        ))
    return records


def _merge_blocks(blocks: list[dict]) -> dict:
    merged = {}
    for key in blocks[0]:
        merged[key] = np.concatenate([b[key] for b in blocks], axis=0)
    return merged


def run_sweep(cfg: SweepConfig, workers: int | None = None) -> list[MetricsRecord]:
    """Run the full grid and return one record per method x setting.

    Record order is deterministic: (pi1, rho) in grid order, then u, then
    (method, k) in configuration order.
    """
    workers = resolve_workers(cfg) if workers is None else max(1, workers)
    chunk = 64
    records: list[MetricsRecord] = []
    with _pool(workers) as submit:
        for pi1 in cfg.pi1_values:
            for rho in cfg.rho_values:
                spans = [
                    (cfg, pi1, rho, a, min(a + chunk, cfg.reps))
                    for a in range(0, cfg.reps, chunk)
                ]
                blocks = submit(spans)
                stats = _merge_blocks(blocks)
                records.extend(_aggregate_cell(cfg, pi1, rho, stats))
    return records


class _pool:
    """Map helper: sequential for one worker, process pool otherwise."""

    def __init__(self, workers: int):
        self.workers = workers
        self._executor = None

    def __enter__(self):
        if self.workers > 1:
            self._executor = ProcessPoolExecutor(max_workers=self.workers)
            executor = self._executor

            def submit(spans):
                return list(executor.map(_run_block, spans))

            return submit
        return lambda spans: [_run_block(span) for span in spans]

    def __exit__(self, *exc):
        if self._executor is not None:
            self._executor.shutdown()
        return False


def sweep_config_from_json(source) -> SweepConfig:
    """Build a :class:`SweepConfig` from a JSON file path or parsed dict.

    Recognized keys mirror the dataclass fields; ``pi1``, ``rho``, ``u`` and
    ``k`` accept scalars or lists.  Unknown keys are rejected.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            data = json.load(fh)
    else:
        data = dict(source)
    if not isinstance(data, dict):
        raise ValueError("sweep configuration must be a JSON object")

    def as_tuple(value):
        if isinstance(value, (list, tuple)):
            return tuple(value)
        return (value,)

    aliases = {"pi1": "pi1_values", "rho": "rho_values", "u": "u_values", "k": "k_values"}
    kwargs = {}
    for key, value in data.items():
        key = aliases.get(key, key)
        if key in ("pi1_values", "rho_values", "u_values", "k_values", "methods"):
            kwargs[key] = as_tuple(value)
        elif key in ("m", "n", "reps", "master_seed", "workers"):
            kwargs[key] = int(value)
        elif key in ("alpha", "theta", "gamma", "mu_magnitude", "adaptive_lambda"):
            kwargs[key] = float(value)
        elif key == "adaptive_kappa":
            kwargs[key] = None if value is None else int(value)
        else:
            raise ValueError(f"unknown configuration key: {key!r}")
    kwargs.setdefault("u_values", tuple(int(u) for u in kwargs.get("u_values", (2, 3, 4))))
    cfg = SweepConfig(**kwargs)
    return replace(
        cfg,
        u_values=tuple(int(u) for u in cfg.u_values),
        k_values=tuple(int(k) for k in cfg.k_values),
    )


def _format_rate(x: float) -> str:
    return "" if math.isnan(x) else format(x, ".6g")


def write_metrics_csv(records, path, cfg: SweepConfig | None = None) -> None:
    """Write records with a versioned header comment line."""
    meta = f"# pcfilter-metrics schema={SCHEMA_VERSION} rng={RNG_KIND}"
    if cfg is not None:
        meta += (
            f" master_seed={cfg.master_seed} m={cfg.m} n={cfg.n}"
            f" reps={cfg.reps} mu={cfg.mu_magnitude:g}"
        )
    lines = [meta, ",".join(CSV_COLUMNS)]
    for rec in records:
        lines.append(",".join([
            rec.method, str(rec.u), str(rec.k),
            format(rec.alpha, ".6g"), format(rec.pi1, ".6g"), format(rec.rho, ".6g"),
            format(rec.theta, ".6g"), format(rec.gamma, ".6g"), str(rec.reps),
            _format_rate(rec.kfwer), _format_rate(rec.kfwer_se),
            _format_rate(rec.tpr), _format_rate(rec.tpr_se),
            _format_rate(rec.fdx), _format_rate(rec.fdx_se),
            _format_rate(rec.fdr), _format_rate(rec.fdr_se),
            _format_rate(rec.mean_pi0_at_threshold),
        ]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_metrics_csv(path) -> list[MetricsRecord]:
    """Parse a metrics CSV back into records (header comments are skipped)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    body = [ln for ln in lines if not ln.startswith("#")]
    if not body:
        raise ValueError("metrics CSV has no header row")
    header = body[0].split(",")
    if header != list(CSV_COLUMNS):
        missing = set(CSV_COLUMNS) - set(header)
        raise ValueError(f"metrics CSV columns do not match schema (missing {sorted(missing)})")
    records = []
    for ln in body[1:]:
        parts = ln.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(f"malformed metrics row: {ln!r}")
        get = dict(zip(CSV_COLUMNS, parts))

        def num(name):
            return math.nan if get[name] == "" else float(get[name])

        records.append(MetricsRecord(
            method=get["method"], u=int(get["u"]), k=int(get["k"]),
            alpha=num("alpha"), pi1=num("pi1"), rho=num("rho"),
            theta=num("theta"), gamma=num("gamma"), reps=int(get["reps"]),
            kfwer=num("kfwer"), kfwer_se=num("kfwer_se"),
            tpr=num("tpr"), tpr_se=num("tpr_se"),
            fdx=num("fdx"), fdx_se=num("fdx_se"),
            fdr=num("fdr"), fdr_se=num("fdr_se"),
            mean_pi0_at_threshold=num("mean_pi0_at_threshold"),
        ))
    return records
