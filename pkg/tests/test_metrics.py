"""Counting metrics and replicate aggregation."""

import math

import numpy as np
import pytest

from pcfilter.metrics import (
    MetricsRecord,
    aggregate,
    false_discoveries,
    false_discovery_proportion,
    post_filter_null_proportion,
    tpr,
)
from pcfilter.procedures import RejectionResult
from pcfilter.simulate import TruthLabels


def truth_from_false(flags):
    flags = np.asarray(flags, dtype=bool)
    mu = np.zeros((flags.size, 4))
    mu[flags] = 4.0  # all four studies carry signal: false at any u <= 4
    return TruthLabels(mu=mu, is_false_pc_null=flags)


def result(rejected, m=None, survivors=None):
    diag = {}
    if survivors is not None:
        diag["survivor_index"] = np.asarray(survivors, dtype=int)
    return RejectionResult(method="t", threshold=0.1,
                           rejected=np.asarray(rejected, dtype=int), diagnostics=diag)


class TestCounting:
    def test_false_discoveries(self):
        truth = truth_from_false([False, True, True, False])
        # true nulls are features 0 and 3
        assert false_discoveries(result([0, 1]), truth) == 1
        assert false_discoveries(result([]), truth) == 0
        all_null = truth_from_false([False] * 3)
        assert false_discoveries(result([0, 1, 2]), all_null) == 3

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            false_discoveries(result([5]), truth_from_false([True, False]))

    def test_tpr(self):
        truth = truth_from_false([True, True, True, True, False])
        assert tpr(result([0, 1, 4]), truth) == pytest.approx(0.5)
        assert tpr(result([]), truth_from_false([False, False])) == 0.0
        assert tpr(result([0, 1]), truth_from_false([True, True])) == 1.0

    def test_fdp_guard(self):
        truth = truth_from_false([False, True])
        assert false_discovery_proportion(result([]), truth) == 0.0
        assert false_discovery_proportion(result([0]), truth) == 1.0

    def test_post_filter_null_proportion(self):
        truth = truth_from_false([False, True, False])
        assert post_filter_null_proportion(result([], survivors=[0, 1]), truth) == 0.5
        assert post_filter_null_proportion(result([], survivors=[]), truth) == 0.0
        assert math.isnan(post_filter_null_proportion(result([]), truth))


class TestAggregate:
    def test_all_clean_replicates(self):
        truth = truth_from_false([False, True])
        rec = aggregate([result([1]), result([1])], [truth, truth], k=1, gamma=0.1,
                        method="m", u=2)
        assert rec.kfwer == 0.0
        assert rec.tpr == 1.0

    def test_single_replicate_at_k(self):
        truth = truth_from_false([False, True])
        rec = aggregate([result([0])], [truth], k=1, gamma=0.1)
        assert rec.kfwer == 1.0

    def test_fdx_fdr_hand_example(self):
        # two replicates with FDP 0.0 and 0.5 at gamma = 0.4
        truth = truth_from_false([False, True])
        clean = result([1])
        dirty = result([0, 1])
        rec = aggregate([clean, dirty], [truth, truth], k=1, gamma=0.4)
        assert rec.fdx == pytest.approx(0.5)
        assert rec.fdr == pytest.approx(0.25)

    def test_fdr_bounded_by_fdx_plus_gamma(self):
        rng = np.random.default_rng(0)
        truth = truth_from_false(rng.random(30) < 0.5)
        results = [result(np.flatnonzero(rng.random(30) < 0.3)) for _ in range(50)]
        for gamma in (0.05, 0.1, 0.3):
            rec = aggregate(results, [truth] * 50, k=1, gamma=gamma)
            assert rec.fdr <= rec.fdx + gamma + 1e-12

    def test_kfwer_k1_is_any_false_discovery(self):
        rng = np.random.default_rng(1)
        truth = truth_from_false(rng.random(20) < 0.5)
        results = [result(np.flatnonzero(rng.random(20) < 0.2)) for _ in range(40)]
        rec = aggregate(results, [truth] * 40, k=1, gamma=0.1)
        frac_any = np.mean([false_discoveries(r, truth) >= 1 for r in results])
        assert rec.kfwer == pytest.approx(frac_any)

    def test_mean_pi0_in_unit_interval(self):
        rng = np.random.default_rng(2)
        truth = truth_from_false(rng.random(20) < 0.5)
        results = [result([], survivors=np.flatnonzero(rng.random(20) < 0.4))
                   for _ in range(30)]
        rec = aggregate(results, [truth] * 30, k=1, gamma=0.1)
        assert 0.0 <= rec.mean_pi0_at_threshold <= 1.0

    def test_length_mismatch(self):
        truth = truth_from_false([True])
        with pytest.raises(ValueError):
            aggregate([result([])], [truth, truth], k=1, gamma=0.1)

    def test_record_validation(self):
        with pytest.raises(ValueError):
            MetricsRecord(method="x", u=2, k=1, alpha=0.05, pi1=0.1, rho=0.2,
                          theta=0.5, gamma=0.1, reps=10, kfwer=1.5, kfwer_se=0.0,
                          tpr=0.0, tpr_se=0.0, fdx=0.0, fdx_se=0.0, fdr=0.0,
                          fdr_se=0.0, mean_pi0_at_threshold=0.5)
