"""Partial conjunction multiple testing with adaptive filtering.

Library layout:

* :mod:`pcfilter.combine` -- order statistics and combined p-values.
* :mod:`pcfilter.procedures` -- rejection procedures (adaptive-filter
  thresholds, false-exceedance augmentation, step-up baselines).
* :mod:`pcfilter.simulate` -- deterministic synthetic meta-analysis data.
* :mod:`pcfilter.metrics` -- error and power aggregation over replicates.
* :mod:`pcfilter.study` -- parameter sweeps and the metrics CSV schema.
* :mod:`pcfilter.cli` -- the ``pcfilter`` command (analyze / simulate / plot).
"""

from .combine import (
    FisherCombined,
    PairedScores,
    as_pvalue_matrix,
    bonferroni_pc_pvalues,
    build_paired_scores,
    combine_bonferroni,
    combine_fisher,
    fisher_pc_pvalues,
    order_statistics,
)
from .metrics import (
    MetricsRecord,
    aggregate,
    false_discoveries,
    false_discovery_proportion,
    post_filter_null_proportion,
    tpr,
)
from .procedures import (
    Pi0Estimate,
    ProcedureContext,
    RejectionResult,
    UndefinedEstimateError,
    UnsupportedConfigError,
    adabon_threshold,
    adafilter_bon_threshold,
    augment_fdx,
    estimate_pi0,
    leave_one_out_threshold,
    run_adafilter_adabon,
    run_adafilter_bon,
    run_adaptive_bonferroni,
    run_adaptive_hochberg,
    run_augmented_adabon,
    run_generalized_bonferroni,
    run_hochberg_kfwer,
)
from .simulate import (
    SimulationConfig,
    TruthLabels,
    false_pc_null_labels,
    generate_effects,
    generate_noise,
    generate_pvalues,
    generate_replicate,
    replicate_rng,
    run_replicates,
)
from .study import (
    DEFAULT_METHODS,
    SweepConfig,
    read_metrics_csv,
    run_sweep,
    sweep_config_from_json,
    write_metrics_csv,
)

__version__ = "0.1.0"
