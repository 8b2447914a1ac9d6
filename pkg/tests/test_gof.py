import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mocop.copulas import Gaussian, Gumbel, MarshallOlkin
from mocop.estimation import classify_complete, fit_family, fit_mo_complete, fit_numeric
from mocop.gof import (
    aicc,
    bootstrap_pvalue,
    cvm_statistic,
    empirical_copula,
    rank_pseudo_observations,
)


def test_aicc_available_here_too():
    assert_allclose(aicc(10.0, 1, 100), -17.9592, atol=1e-4)


# ---------------------------------------------------------------------------
# empirical copula and statistic
# ---------------------------------------------------------------------------

THREE = classify_complete([(0.25, 0.25), (0.5, 0.75), (0.75, 0.5)])


def test_empirical_copula_corners():
    assert empirical_copula(THREE, 1.0, 1.0) == 1.0
    assert empirical_copula(THREE, 0.0, 0.0) == 0.0


def test_empirical_copula_hand_count():
    assert_allclose(empirical_copula(THREE, 0.5, 0.75), 2.0 / 3.0)


def test_empirical_copula_vectorised():
    vals = empirical_copula(THREE, np.array([0.0, 0.5, 1.0]), np.array([0.0, 0.75, 1.0]))
    assert_allclose(vals, [0.0, 2.0 / 3.0, 1.0])


def test_cvm_zero_when_fitted_equals_empirical():
    class Interpolant:
        def cdf(self, u, v):
            return empirical_copula(THREE, u, v)

    assert cvm_statistic(THREE, Interpolant()) == 0.0


def test_cvm_single_pair_hand_value():
    sample = classify_complete([(0.5, 0.5)])
    assert_allclose(cvm_statistic(sample, MarshallOlkin(0.0)), 0.5625)


def test_cvm_nonnegative_and_order_invariant(rng):
    uv = MarshallOlkin(0.5).sample(150, rng)
    sample = classify_complete(uv)
    stat = cvm_statistic(sample, MarshallOlkin(0.5))
    shuffled = classify_complete(uv[rng.permutation(150)])
    assert stat >= 0.0
    assert_allclose(cvm_statistic(shuffled, MarshallOlkin(0.5)), stat, atol=1e-12)


def test_cvm_smaller_under_true_family():
    wins = 0
    for seed in range(30):
        uv = MarshallOlkin(0.6).sample(300, seed)
        sample = classify_complete(uv)
        s_true = cvm_statistic(sample, fit_mo_complete(sample).copula)
        s_wrong = cvm_statistic(sample, fit_numeric("gaussian", sample, seed=0).copula)
        wins += s_true < s_wrong
    assert wins >= 25


# ---------------------------------------------------------------------------
# bootstrap
# ---------------------------------------------------------------------------


def test_bootstrap_requires_100_replicates():
    with pytest.raises(ValueError, match="100"):
        bootstrap_pvalue(THREE, "mo", replicates=50)


def test_bootstrap_deterministic_and_in_range():
    uv = MarshallOlkin(0.5).sample(120, 31)
    sample = classify_complete(uv)
    a = bootstrap_pvalue(sample, "mo", replicates=100, seed=5)
    b = bootstrap_pvalue(sample, "mo", replicates=100, seed=5)
    assert a.p_value == b.p_value and a.statistic == b.statistic
    assert 0.0 < a.p_value <= 1.0
    assert a.p_value >= 1.0 / 101.0  # continuity correction: never exactly zero
    assert a.seed == 5 and a.replicates == 100


def test_bootstrap_order_invariant(rng):
    uv = Gaussian(0.4).sample(120, 17)
    ranked = rank_pseudo_observations(uv)
    a = bootstrap_pvalue(classify_complete(ranked), "gaussian", replicates=100, seed=2)
    b = bootstrap_pvalue(classify_complete(ranked[rng.permutation(120)]), "gaussian", replicates=100, seed=2)
    assert a.p_value == b.p_value


@pytest.mark.parametrize("seed,data_seed", [(0, 100), (2, 102), (4, 104)])
def test_bootstrap_size_smoke_gaussian(seed, data_seed):
    # data simulated from the fitted family: p should not be small
    uv = rank_pseudo_observations(Gaussian(0.35).sample(200, data_seed))
    rep = bootstrap_pvalue(classify_complete(uv), "gaussian", replicates=100, seed=seed)
    assert rep.p_value > 0.05


def test_bootstrap_size_smoke_gumbel():
    uv = rank_pseudo_observations(Gumbel(1.5).sample(200, 202))
    rep = bootstrap_pvalue(classify_complete(uv), "gumbel", replicates=100, seed=2)
    assert rep.p_value > 0.05


def test_bootstrap_power_mo_against_gaussian():
    uv = MarshallOlkin(0.7).sample(500, 42)
    sample = classify_complete(uv)
    rep = bootstrap_pvalue(sample, "gaussian", replicates=100, seed=0)
    assert rep.p_value < 0.05


def test_bootstrap_mo_fit_is_closed_form_inside():
    uv = MarshallOlkin(0.6).sample(200, 7)
    rep = bootstrap_pvalue(classify_complete(uv), "mo", replicates=100, seed=1)
    assert rep.fitted.method == "closed-form"
    assert rep.fitted.family == "mo"


def test_bootstrap_failed_replicate_counts_as_exceedance(monkeypatch, caplog):
    from mocop import gof

    uv = MarshallOlkin(0.5).sample(80, 3)
    sample = classify_complete(uv)
    real_fit = fit_family
    calls = {"n": 0}

    def flaky(family, ps, seed=0):
        calls["n"] += 1
        if calls["n"] > 1:  # fail every refit inside the bootstrap
            raise RuntimeError("synthetic failure")
        return real_fit(family, ps, seed=seed)

    monkeypatch.setattr(gof, "fit_family", flaky)
    with caplog.at_level(logging.WARNING):
        rep = gof.bootstrap_pvalue(sample, "mo", replicates=100, seed=0)
    assert rep.failed_replicates == 100
    assert rep.p_value == 1.0  # all replicates conservative exceedances
    assert any("counted as exceedance" in r.message for r in caplog.records)


def test_rank_pseudo_observations_convention():
    uv = np.array([[0.9, 0.1], [0.5, 0.2], [0.7, 0.3]])
    ranked = rank_pseudo_observations(uv)
    assert_allclose(ranked[:, 0], np.array([3, 1, 2]) / 4.0)
    assert_allclose(ranked[:, 1], np.array([1, 2, 3]) / 4.0)
