"""Threshold algorithms against dense-grid oracles and stability lemmas.

Seeds are pinned: the dense grids have step 1e-6, so an instance whose
breakpoints land inside the final gap below a supremum could make an honest
oracle disagree by discretization alone.  The pinned batteries were checked
to be free of such coincidences.
"""

import numpy as np

from conftest import dense_sup_adabon, dense_sup_bon, dense_sup_fdx, random_paired_instance
from pcfilter.combine import PairedScores, build_paired_scores
from pcfilter.procedures import (
    ProcedureContext,
    adabon_threshold,
    adafilter_bon_threshold,
    augment_fdx,
    leave_one_out_threshold,
)

N_INSTANCES = 250  # the acceptance suite runs the full 1000-instance battery
THETAS = (0.1, 0.5, 0.9)


def draw_ctx(rng, i, theta=None, gamma=None):
    return ProcedureContext(
        u=2,
        k=int(rng.choice([1, 2, 5])),
        alpha=float(rng.uniform(0.01, 0.2)),
        theta=THETAS[i % 3] if theta is None else theta,
        gamma=float(rng.uniform(0.05, 0.5)) if gamma is None else gamma,
    )


class TestBonThresholdOracle:
    def test_matches_dense_grid(self):
        rng = np.random.default_rng(101)
        for i in range(N_INSTANCES):
            s, f = random_paired_instance(rng)
            c = draw_ctx(rng, i)
            t_exact = adafilter_bon_threshold(f, c)
            t_dense = dense_sup_bon(f, c.k_alpha)
            assert abs(t_exact - t_dense) <= 1e-6
            assert np.array_equal(s < t_exact, s < t_dense)


class TestAdaBonThresholdOracle:
    def test_rejection_sets_match_dense_sup(self):
        rng = np.random.default_rng(202)
        for i in range(N_INSTANCES):
            s, f = random_paired_instance(rng)
            c = draw_ctx(rng, i)
            t_exact = adabon_threshold(PairedScores(s=s, f=f), c)
            t_dense = dense_sup_adabon(s, f, c.theta, c.k_alpha)
            assert t_dense <= t_exact + 1e-12
            assert np.array_equal(s < t_exact, s < t_dense)

    def test_chunked_sweep_equals_unchunked(self, monkeypatch):
        import pcfilter.procedures as proc

        rng = np.random.default_rng(77)
        instances = [random_paired_instance(rng) for _ in range(40)]
        ctxs = [draw_ctx(rng, i) for i in range(40)]
        full = [adabon_threshold(PairedScores(s=s, f=f), c)
                for (s, f), c in zip(instances, ctxs)]
        monkeypatch.setattr(proc, "_SWEEP_CHUNK", 7)
        tiny = [adabon_threshold(PairedScores(s=s, f=f), c)
                for (s, f), c in zip(instances, ctxs)]
        assert full == tiny


class TestAugmentOracle:
    def test_matches_dense_grid(self):
        rng = np.random.default_rng(303)
        for i in range(N_INSTANCES):
            s, f = random_paired_instance(rng)
            c = draw_ctx(rng, i)
            t_theta = adabon_threshold(PairedScores(s=s, f=f), c)
            res = augment_fdx(s, t_theta, c)
            tau_oracle, mask = dense_sup_fdx(s, t_theta, c.k, c.gamma)
            assert abs(res.threshold - tau_oracle) <= 1e-6
            expect = np.flatnonzero(mask)
            assert np.array_equal(res.rejected, expect)


class TestLeaveOneOutLemmas:
    def test_loo_never_exceeds_and_equals_when_surviving(self):
        rng = np.random.default_rng(404)
        for i in range(N_INSTANCES):
            _, f = random_paired_instance(rng, max_m=60)
            c = draw_ctx(rng, i)
            t_hat = adafilter_bon_threshold(f, c)
            for j in range(f.size):
                t_j = leave_one_out_threshold(f, j, c)
                assert t_j <= t_hat
                if f[j] < t_hat:
                    assert t_j == t_hat  # exact, not approximate


class TestConditionalValidity:
    """With one strong study and the rest null, the combined score is still
    conditionally super-uniform given filter survival."""

    def test_conditional_bound(self):
        from pcfilter.dist import normal_sf

        rng = np.random.default_rng(505)
        reps = 100_000
        z = rng.standard_normal((reps, 4))
        z[:, 0] += 4.0  # exactly u-1 = 1 false individual null
        p = normal_sf(z)
        scores = build_paired_scores(p, 2)
        grid = (0.01, 0.05, 0.1, 0.25, 0.5)
        for t2 in grid:
            survive = scores.f < t2
            n_cond = survive.sum()
            assert n_cond > 1000
            for t1 in grid:
                if t1 > t2:
                    continue
                p_hat = np.count_nonzero(survive & (scores.s < t1)) / n_cond
                se = np.sqrt(max(p_hat * (1 - p_hat), 1e-12) / n_cond)
                assert p_hat <= t1 + 3 * se
