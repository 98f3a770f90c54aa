"""Monte Carlo driver: terminal sampling, payoffs, and rate fitting."""

import math
import warnings

import numpy as np
import pytest

from emcel.models import folded_normal_mean, make_model
from emcel.montecarlo import (
    empirical_cdf,
    estimate_functional,
    prepare_chain,
    rate_fit,
    resolve_steps,
    simulate_terminal,
)


# -- step resolution -----------------------------------------------------------


def test_resolve_steps_exact_multiples():
    assert resolve_steps(1.0, 2.0**-6) == (64, 1.0)
    n, t_eff = resolve_steps(0.5, 0.1)
    assert n == 5 and t_eff == pytest.approx(0.5)


def test_resolve_steps_warns_and_floors_otherwise():
    with pytest.warns(RuntimeWarning):
        n, t_eff = resolve_steps(1.0, 0.3)
    assert n == 3 and t_eff == pytest.approx(0.9)


def test_resolve_steps_validation():
    with pytest.raises(ValueError):
        resolve_steps(-1.0, 0.1)
    with pytest.raises(ValueError):
        resolve_steps(1.0, 0.0)


# -- empirical distribution -------------------------------------------------------


def test_empirical_cdf_hand_values():
    samples = np.array([1.0, 2.0, 2.0, 3.0])
    assert empirical_cdf(samples, 0.0) == 0.0
    assert empirical_cdf(samples, 1.0) == 0.25
    assert empirical_cdf(samples, 2.0) == 0.75
    assert empirical_cdf(samples, 2.5) == 0.75
    assert empirical_cdf(samples, 3.0) == 1.0
    grid = empirical_cdf(samples, np.array([0.0, 2.0, 9.0]))
    assert np.allclose(grid, [0.0, 0.75, 1.0])
    with pytest.raises(ValueError):
        empirical_cdf(np.array([]), 0.0)


# -- rate fitting ------------------------------------------------------------------


def test_rate_fit_recovers_pure_power_laws():
    hs = [2.0**-k for k in range(2, 7)]
    lin = rate_fit(hs, hs)
    assert lin.slope == pytest.approx(-1.0, abs=1e-12)
    half = rate_fit(hs, [math.sqrt(h) for h in hs])
    assert half.slope == pytest.approx(-0.5, abs=1e-12)
    const = rate_fit(hs, [0.37] * len(hs))
    assert const.slope == pytest.approx(0.0, abs=1e-12)
    # prefactors land in the intercept
    tripled = rate_fit(hs, [3.0 * h for h in hs])
    assert tripled.slope == pytest.approx(-1.0, abs=1e-12)
    assert 2.0**tripled.intercept == pytest.approx(3.0, rel=1e-10)


def test_rate_fit_predictions_interpolate_the_errors():
    hs = [0.1, 0.05, 0.025]
    errs = [math.sqrt(h) for h in hs]
    fit = rate_fit(hs, errs)
    assert np.allclose(fit.predicted(), errs, rtol=1e-10)


def test_rate_fit_validation_and_zero_handling():
    with pytest.raises(ValueError):
        rate_fit([0.1], [0.1])  # need at least two points
    with pytest.raises(ValueError):
        rate_fit([0.1, 0.2], [0.1])
    with pytest.raises(ValueError):
        rate_fit([0.1, -0.2], [0.1, 0.2])
    with pytest.raises(ValueError):
        rate_fit([0.1, 0.05], [0.1, -0.1])
    with pytest.warns(RuntimeWarning):
        fit = rate_fit([0.1, 0.05], [0.1, 0.0])
    assert math.isfinite(fit.slope)


# -- terminal sampling ---------------------------------------------------------------


def test_terminal_sampling_is_deterministic_and_chunk_stable():
    model = make_model("brownian")
    a = simulate_terminal(model, h=0.25, t=1.0, n_paths=300, seed=9)
    b = simulate_terminal(model, h=0.25, t=1.0, n_paths=300, seed=9)
    assert np.array_equal(a, b)
    c = simulate_terminal(model, h=0.25, t=1.0, n_paths=300, seed=10)
    assert not np.array_equal(a, c)
    # the first paths do not depend on how many paths follow
    d = simulate_terminal(model, h=0.25, t=1.0, n_paths=120, seed=9)
    assert np.array_equal(a[:120], d)


def test_worker_count_does_not_change_the_samples():
    model = make_model("brownian")
    n = 4096 * 2 + 17  # forces several chunks
    one = simulate_terminal(model, h=0.25, t=1.0, n_paths=n, seed=4, workers=1)
    several = simulate_terminal(model, h=0.25, t=1.0, n_paths=n, seed=4, workers=3)
    assert np.array_equal(one, several)


def test_brownian_terminal_moments():
    model = make_model("brownian")
    samples = simulate_terminal(model, h=2.0**-6, t=1.0, n_paths=20000, seed=0)
    # the lattice walk has mean 0 and variance exactly t
    assert abs(float(np.mean(samples))) < 4.0 / math.sqrt(20000)
    assert float(np.var(samples)) == pytest.approx(1.0, abs=0.05)


def test_reflected_model_folds_by_default():
    model = make_model("reflected-sticky", theta=0.5)
    folded = simulate_terminal(model, h=2.0**-4, t=1.0, n_paths=500, seed=1)
    raw = simulate_terminal(model, h=2.0**-4, t=1.0, n_paths=500, seed=1, fold=False)
    assert np.all(folded >= 0.0)
    assert np.any(raw < 0.0)
    assert np.allclose(folded, np.abs(raw))


def test_prepare_chain_only_extends_reflecting_models():
    model = make_model("brownian")
    _, fold = prepare_chain(model, 0.25)
    assert fold is None
    refl = make_model("reflected-sticky")
    _, fold = prepare_chain(refl, 0.25)
    assert fold is not None


# -- functionals -----------------------------------------------------------------------


def test_mean_abs_estimate_matches_the_reference_law():
    model = make_model("brownian")
    est = estimate_functional(model, h=2.0**-6, t=1.0, payoff="mean-abs", n_paths=20000, seed=0)
    want = folded_normal_mean(0.0, 1.0)
    assert est.value == pytest.approx(want, abs=0.02)
    assert est.n_paths == 20000
    assert est.payoff == "mean-abs"
    assert est.t == pytest.approx(1.0)


def test_indicator_and_zone_payoffs():
    model = make_model("brownian")
    ind = estimate_functional(
        model, h=2.0**-6, t=1.0, payoff="indicator", z=0.33, n_paths=8000, seed=2
    )
    assert 0.0 < ind.value < 1.0
    zone = estimate_functional(
        model, h=2.0**-6, t=1.0, payoff="zone", z=0.33, n_paths=8000, seed=2
    )
    assert 0.0 < zone.value < 1.0
    with pytest.raises(ValueError):
        estimate_functional(model, h=0.25, t=1.0, payoff="indicator", n_paths=10)
    with pytest.raises(ValueError):
        estimate_functional(model, h=0.25, t=1.0, payoff="median", n_paths=10)


def test_callable_payoff_gets_the_samples():
    model = make_model("brownian")
    second_moment = lambda x: x * x
    est = estimate_functional(model, h=2.0**-5, t=1.0, payoff=second_moment, n_paths=20000, seed=0)
    assert est.value == pytest.approx(1.0, abs=0.05)
    assert est.payoff == "<lambda>"


def test_standard_error_shrinks_like_root_n():
    model = make_model("brownian")
    ratios = []
    for seed in (0, 1, 2):
        small = estimate_functional(model, h=0.25, t=1.0, payoff="mean", n_paths=2000, seed=seed)
        large = estimate_functional(model, h=0.25, t=1.0, payoff="mean", n_paths=8000, seed=seed)
        ratios.append(small.std_error / large.std_error)
    for r in ratios:
        assert 2.0 / 1.5 <= r <= 2.0 * 1.5


def test_estimates_are_reproducible():
    model = make_model("sticky", theta=0.5)
    e1 = estimate_functional(model, h=2.0**-5, t=1.0, payoff="zone", z=0.1, n_paths=3000, seed=7)
    e2 = estimate_functional(model, h=2.0**-5, t=1.0, payoff="zone", z=0.1, n_paths=3000, seed=7)
    assert e1.value == e2.value and e1.std_error == e2.std_error


def test_thread_env_var_is_default_and_cap(monkeypatch):
    from emcel.montecarlo import _resolve_workers

    monkeypatch.delenv("EMCEL_THREADS", raising=False)
    assert _resolve_workers(None) == 1
    assert _resolve_workers(5) == 5

    monkeypatch.setenv("EMCEL_THREADS", "2")
    assert _resolve_workers(None) == 2
    assert _resolve_workers(1) == 1
    assert _resolve_workers(8) == 2  # capped

    monkeypatch.setenv("EMCEL_THREADS", "zero")
    with pytest.raises(ValueError, match="EMCEL_THREADS"):
        _resolve_workers(None)
    monkeypatch.setenv("EMCEL_THREADS", "0")
    with pytest.raises(ValueError, match="EMCEL_THREADS"):
        _resolve_workers(4)


def test_thread_env_var_does_not_change_results(monkeypatch):
    model = make_model("brownian")
    monkeypatch.delenv("EMCEL_THREADS", raising=False)
    base = simulate_terminal(model, h=0.25, t=1.0, n_paths=4096 * 2 + 17, seed=3)
    monkeypatch.setenv("EMCEL_THREADS", "3")
    capped = simulate_terminal(model, h=0.25, t=1.0, n_paths=4096 * 2 + 17, seed=3)
    assert np.array_equal(base, capped)
