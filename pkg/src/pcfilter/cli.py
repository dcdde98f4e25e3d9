"""Command line interface: analyze a p-value matrix, run a simulation sweep,
or plot a metrics table.

Exit status 0 on success, 2 on malformed input or invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .combine import as_pvalue_matrix, build_paired_scores, bonferroni_pc_pvalues, fisher_pc_pvalues
from .procedures import (
    ProcedureContext,
    RejectionResult,
    UnsupportedConfigError,
    run_adafilter_adabon,
    run_adafilter_bon,
    run_adaptive_bonferroni,
    run_adaptive_hochberg,
    run_augmented_adabon,
    run_generalized_bonferroni,
    run_hochberg_kfwer,
)
from .plotting import plot_metrics
from .study import (
    WORKERS_ENV_VAR,
    read_metrics_csv,
    run_sweep,
    sweep_config_from_json,
    write_metrics_csv,
)

ADAFILTER_METHODS = ("adafilter-adabon", "adafilter-bon")
BASELINE_METHODS = ("bonferroni", "hochberg", "adaptive-bonferroni", "adaptive-hochberg")
ANALYZE_SCHEMA = 1


class InputError(Exception):
    """Invalid user input; reported on stderr with exit status 2."""


def _read_pvalue_csv(path):
    """Parse an input CSV: header of study names, one feature row per line."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise InputError(f"{path}: need a header row and at least one feature row")
    header = [cell.strip() for cell in rows[0]]
    n = len(header)
    if n < 2:
        raise InputError(f"{path}: need at least two study columns, found {n}")
    values = np.empty((len(rows) - 1, n))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != n:
            raise InputError(f"{path}: row {i} has {len(row)} fields, expected {n}")
        for j, cell in enumerate(row):
            cell = cell.strip()
            if not cell:
                raise InputError(f"{path}: row {i}, column {j + 1} is empty "
                                 "(missing values are not permitted)")
            try:
                values[i - 2, j] = float(cell)
            except ValueError:
                raise InputError(f"{path}: row {i}, column {j + 1}: "
                                 f"{cell!r} is not a number") from None
            if not 0.0 <= values[i - 2, j] <= 1.0:
                raise InputError(f"{path}: row {i}, column {j + 1}: "
                                 f"{cell} is outside [0, 1]")
    return header, values


def _float17(x: float) -> str:
    return repr(float(x))


def cmd_analyze(args) -> int:
    header, values = _read_pvalue_csv(args.input)
    matrix = as_pvalue_matrix(values)
    n = matrix.shape[1]
    if not 2 <= args.u <= n:
        raise InputError(f"u={args.u} must satisfy 2 <= u <= n={n}")
    ctx = ProcedureContext(u=args.u, k=args.k, alpha=args.alpha,
                           theta=args.theta, gamma=args.gamma)

    method = args.method
    if args.augment and method != "adafilter-adabon":
        raise InputError("--augment applies to the adafilter-adabon method only")
    if method in ADAFILTER_METHODS and args.combiner is not None:
        raise InputError("adafilter methods always use Bonferroni-combined scores; "
                         "--combiner only applies to baseline methods")
    combiner = args.combiner or "fisher"

    scores = build_paired_scores(matrix, args.u)
    comments = [f"# pcfilter-analyze schema={ANALYZE_SCHEMA}",
                f"# method={method + ('-fdx' if args.augment else '')}",
                f"# u={args.u} k={args.k} alpha={_float17(args.alpha)}"
                f" theta={_float17(args.theta)} gamma={_float17(args.gamma)}"]

    if method in ADAFILTER_METHODS:
        pc = scores.s
        if method == "adafilter-adabon":
            result = run_augmented_adabon(scores, ctx) if args.augment \
                else run_adafilter_adabon(scores, ctx)
        else:
            result = run_adafilter_bon(scores, ctx)
        if "t_theta" in result.diagnostics:
            comments.append(f"# t_theta={_float17(result.diagnostics['t_theta'])}")
        if "pi0_hat" in result.diagnostics:
            comments.append(f"# pi0_hat={_float17(result.diagnostics['pi0_hat'])}")
        if "survivors" in result.diagnostics:
            comments.append(f"# survivors={result.diagnostics['survivors']}")
    else:
        if combiner == "fisher":
            combined = fisher_pc_pvalues(matrix, args.u)
            pc = combined.values
            zero_rows = int(np.count_nonzero(combined.zero_statistic))
            if zero_rows:
                comments.append(f"# fisher_zero_rows={zero_rows}")
        else:
            pc = bonferroni_pc_pvalues(matrix, args.u)
        comments.append(f"# combiner={combiner}")
        if method == "bonferroni":
            result = run_generalized_bonferroni(pc, ctx)
        elif method == "hochberg":
            result = run_hochberg_kfwer(pc, ctx)
        elif method == "adaptive-bonferroni":
            result = run_adaptive_bonferroni(pc, ctx, lam=args.adaptive_lambda)
        else:
            kappa = args.kappa if args.kappa is not None else max(1, matrix.shape[0] - 10)
            result = run_adaptive_hochberg(pc, ctx, kappa=kappa)

    comments.append(f"# threshold={_float17(result.threshold)}")
    flags = np.zeros(matrix.shape[0], dtype=int)
    flags[result.rejected] = 1
    with open(args.output, "w") as fh:
        fh.write("\n".join(comments) + "\n")
        fh.write("feature,s,f,pc_pvalue,rejected\n")
        for i in range(matrix.shape[0]):
            fh.write(f"{i},{_float17(scores.s[i])},{_float17(scores.f[i])},"
                     f"{_float17(pc[i])},{flags[i]}\n")
    return 0


def read_analyze_output(path):
    """Re-parse an analyze output file into (RejectionResult, header dict).

    The reconstructed result carries the scalar diagnostics only; it is the
    round-trip counterpart of :func:`cmd_analyze`.
    """
    meta = {}
    flags = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].strip().split():
                    if "=" in token:
                        key, value = token.split("=", 1)
                        meta[key] = value
            elif not line.startswith("feature,"):
                parts = line.split(",")
                flags.append(int(parts[4]))
    rejected = np.flatnonzero(np.asarray(flags, dtype=int))
    diagnostics = {}
    for key in ("t_theta", "pi0_hat"):
        if key in meta:
            diagnostics[key] = float(meta[key])
    if "survivors" in meta:
        diagnostics["survivors"] = int(meta["survivors"])
    result = RejectionResult(
        method=meta["method"],
        threshold=float(meta["threshold"]),
        rejected=rejected,
        diagnostics=diagnostics,
    )
    return result, meta


def cmd_simulate(args) -> int:
    try:
        cfg = sweep_config_from_json(args.config)
    except (OSError, ValueError) as exc:
        raise InputError(f"invalid simulation config: {exc}") from exc
    records = run_sweep(cfg)
    write_metrics_csv(records, args.output, cfg)
    return 0


def cmd_plot(args) -> int:
    try:
        records = read_metrics_csv(args.input)
    except (OSError, ValueError) as exc:
        raise InputError(f"invalid metrics CSV: {exc}") from exc
    if not records:
        raise InputError("metrics CSV contains no data rows")
    plot_metrics(records, args.output)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcfilter",
        description="Partial conjunction multiple testing with adaptive filtering.",
        epilog=f"The {WORKERS_ENV_VAR} environment variable overrides the sweep "
               "worker count; it never affects numeric results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="apply one procedure to a p-value matrix CSV")
    pa.add_argument("--input", required=True, help="CSV: header of study names, one row per feature")
    pa.add_argument("--method", required=True,
                    choices=ADAFILTER_METHODS + BASELINE_METHODS)
    pa.add_argument("--u", type=int, required=True, help="replicability level (2..n)")
    pa.add_argument("--k", type=int, default=1, help="error tolerance (default 1 = FWER)")
    pa.add_argument("--alpha", type=float, default=0.05)
    pa.add_argument("--theta", type=float, default=0.5)
    pa.add_argument("--gamma", type=float, default=0.1)
    pa.add_argument("--combiner", choices=("bonferroni", "fisher"), default=None,
                    help="combined p-value for baseline methods (default fisher)")
    pa.add_argument("--augment", action="store_true",
                    help="extend adafilter-adabon rejections under the gamma exceedance budget")
    pa.add_argument("--adaptive-lambda", type=float, default=0.5)
    pa.add_argument("--kappa", type=int, default=None,
                    help="order statistic for the adaptive Hochberg null count (default m-10)")
    pa.add_argument("--output", required=True)
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("simulate", help="run a simulation sweep from a JSON config")
    ps.add_argument("--config", required=True)
    ps.add_argument("--output", required=True)
    ps.set_defaults(func=cmd_simulate)

    pp = sub.add_parser("plot", help="render SVG summaries of a metrics CSV")
    pp.add_argument("--input", required=True)
    pp.add_argument("--output", required=True, help="output directory")
    pp.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, UnsupportedConfigError, ValueError) as exc:
        print(f"pcfilter: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
