import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhlab import interferometer as ifm
from nhlab import noise, optics
from nhlab.sampling import rng_for

I2 = np.eye(2)


def bench_pair():
    pair = optics.real_pair()
    return pair.a, pair.b, optics.polarization_state(0)


def identity_scan():
    return ifm.scan_fringe(ifm.SagnacConfig(I2, I2, [1, 0]))


def test_model_validation():
    with pytest.raises(ValueError):
        noise.CountingModel(0)
    with pytest.raises(ValueError):
        noise.CountingModel(1e4, visibility_factor=0)
    with pytest.raises(ValueError):
        noise.CountingModel(1e4, visibility_factor=1.2)
    with pytest.raises(ValueError):
        noise.ErrorBudget(1.0, -0.1, "propagation")


def test_vanishing_rate_gives_no_counts():
    counts = noise.sample_counts(identity_scan(), noise.CountingModel(1e-12))
    assert counts.dtype.kind == "i"
    assert np.all(counts == 0)


def test_counts_are_seeded():
    scan = identity_scan()
    model = noise.CountingModel(1e4, seed=5)
    assert np.array_equal(noise.sample_counts(scan, model), noise.sample_counts(scan, model))
    other = noise.sample_counts(scan, noise.CountingModel(1e4, seed=6))
    assert not np.array_equal(noise.sample_counts(scan, model), other)


@pytest.mark.parametrize("v", [1.0, 0.9828])
def test_fitted_visibility_follows_model(v):
    scan = identity_scan()
    counts = noise.sample_counts(scan, noise.CountingModel(1e6, visibility_factor=v, seed=1))
    assert ifm.fit_fringe(scan.phases, counts).visibility == pytest.approx(v, abs=0.005)


def test_expected_rates_keep_dc_level():
    scan = identity_scan()
    rates = noise.expected_rates(scan, noise.CountingModel(100, visibility_factor=0.5))
    assert rates.mean() == pytest.approx(50, rel=1e-12)
    assert rates.max() == pytest.approx(75, rel=1e-12)


def test_propagate_variance_examples():
    assert noise.propagate_variance([1.0], [3.5]) == pytest.approx(3.5)
    x1, x2 = 100.0, 400.0
    partials = [1 / x2, -x1 / x2**2]
    assert noise.propagate_variance(partials, [100.0, 400.0]) == pytest.approx(7.8125e-4, rel=1e-15)
    cov = np.array([[100.0, 5.0], [5.0, 400.0]])
    up = noise.propagate_variance(partials, [100.0, 400.0], cov)
    down = noise.propagate_variance(partials, [100.0, 400.0], np.array([[100.0, -5.0], [-5.0, 400.0]]))
    assert up - 7.8125e-4 == pytest.approx(-(down - 7.8125e-4))
    assert up != pytest.approx(7.8125e-4)


def test_propagate_variance_validation():
    with pytest.raises(ValueError):
        noise.propagate_variance([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        noise.propagate_variance([1.0, 2.0], [1.0, 1.0], [[1.0, 0.3], [0.1, 1.0]])
    with pytest.raises(ValueError):
        noise.propagate_variance([1.0, 2.0], [1.0, 1.0], [[2.0, 0.0], [0.0, 1.0]])


floats = st.floats(min_value=-10, max_value=10, allow_nan=False)
positive = st.floats(min_value=0, max_value=10, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(floats, positive), min_size=2, max_size=4), positive, floats)
def test_propagate_variance_is_linear(entries, scale, c):
    partials = [p for p, _ in entries]
    s2 = [s for _, s in entries]
    base = noise.propagate_variance(partials, s2)
    bumped = list(s2)
    bumped[0] += scale
    assert noise.propagate_variance(partials, bumped) - base == pytest.approx(partials[0] ** 2 * scale, abs=1e-9)
    cov = np.diag(s2)
    cov[0, 1] = cov[1, 0] = c
    with_cov = noise.propagate_variance(partials, s2, cov)
    assert with_cov - base == pytest.approx(2 * partials[0] * partials[1] * c, abs=1e-9)


def test_ratio_error_examples():
    zero = noise.ratio_error(noise.Measured(3.0, 0.0), noise.Measured(4.0, 0.0))
    assert zero.sigma == 0 and zero.value == 0.75
    budget = noise.ratio_error(noise.Measured(100.0, 100.0), noise.Measured(400.0, 400.0))
    assert budget.value == 0.25
    assert budget.variance == 7.8125e-4
    assert budget.sigma == pytest.approx(0.027951, abs=1e-6)
    assert budget.method == "propagation"
    with pytest.raises(ZeroDivisionError):
        noise.ratio_error(noise.Measured(1.0, 1.0), noise.Measured(0.0, 1.0))


def test_ratio_variance_against_monte_carlo():
    rng = rng_for(42)
    x1 = rng.normal(100, 10, 10**6)
    x2 = rng.normal(400, 20, 10**6)
    # second-order terms shift the sampled variance by well under 2 %
    assert np.var(x1 / x2) == pytest.approx(7.8125e-4, rel=0.02)


def test_poisson_difference_variance():
    rng = rng_for(3)
    n_max, n_min = 900.0, 100.0
    diff = rng.poisson(n_max, 10**5) - rng.poisson(n_min, 10**5)
    assert np.var(diff) == pytest.approx(n_max + n_min, rel=0.02)
    grid = ifm.default_phase_grid(8)
    amp, total = noise.measure(grid, np.rint(500 + 400 * np.cos(grid)).astype(int))
    assert amp == (800, 1000) and total == (1000, 1000)


def test_measure_rejects_unknown_extraction():
    with pytest.raises(ValueError):
        noise.measure(ifm.default_phase_grid(), np.ones(256), "median")


def test_pipeline_requires_trials():
    with pytest.raises(ValueError):
        noise.errorbar_pipeline(*bench_pair(), noise.CountingModel(1e4), trials=50)


def test_pipeline_vanishing_noise():
    res = noise.errorbar_pipeline(*bench_pair(), noise.CountingModel(1e9), trials=100)
    for key, budget in res.monte_carlo.items():
        assert budget.sigma <= 1e-3
        assert res.propagation[key].sigma <= 1e-3


@pytest.mark.parametrize("extraction", noise.EXTRACTIONS)
def test_pipeline_propagation_matches_monte_carlo(extraction):
    res = noise.errorbar_pipeline(*bench_pair(), noise.CountingModel(1e4, seed=2), trials=400, extraction=extraction)
    for key in ifm.ARM_PLAN:
        mc = res.monte_carlo[key].sigma
        assert abs(res.mean_propagated_sigma[key] - mc) <= 0.15 * mc, key
        assert abs(res.propagation[key].sigma - mc) <= 0.15 * mc, key


def test_pipeline_rate_scaling():
    a, b, phi = bench_pair()
    lo = noise.errorbar_pipeline(a, b, phi, noise.CountingModel(1e4, seed=3), 400, keys=["T23"])
    hi = noise.errorbar_pipeline(a, b, phi, noise.CountingModel(2e4, seed=3), 400, keys=["T23"])
    ratio = hi.monte_carlo["T23"].sigma / lo.monte_carlo["T23"].sigma
    assert ratio == pytest.approx(1 / np.sqrt(2), rel=0.10)


@pytest.mark.parametrize("extraction", noise.EXTRACTIONS)
def test_pipeline_mean_converges(extraction):
    trials = 200
    res = noise.errorbar_pipeline(*bench_pair(), noise.CountingModel(1e6, seed=4), trials, extraction=extraction)
    for key, budget in res.monte_carlo.items():
        assert abs(budget.value - res.noiseless[key]) <= 3 * budget.sigma / np.sqrt(trials), key


def test_pipeline_is_deterministic():
    args = (*bench_pair(), noise.CountingModel(1e4, seed=9), 100)
    assert noise.errorbar_pipeline(*args).as_dict() == noise.errorbar_pipeline(*args).as_dict()


def test_keys_do_not_change_draws():
    a, b, phi = bench_pair()
    full = noise.errorbar_pipeline(a, b, phi, noise.CountingModel(1e4, seed=1), 100)
    one = noise.errorbar_pipeline(a, b, phi, noise.CountingModel(1e4, seed=1), 100, keys=["T23"])
    assert one.monte_carlo["T23"] == full.monte_carlo["T23"]
