import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nvqae.fitting import FitError, fit_exponential, initial_guess, jacobian, model


def test_exact_recovery_no_offset():
    x = np.linspace(0, 12, 8)
    fit = fit_exponential(x, 0.5 * np.exp(-x / 2.22))
    assert fit.converged
    assert fit.t == pytest.approx(2.22, rel=1e-6)


def test_exact_recovery_with_offset():
    x = np.arange(0, 6001, 500.0)
    fit = fit_exponential(x, model(x, 0.1, 0.4, 3030.0))
    assert fit.params == pytest.approx([0.1, 0.4, 3030.0], rel=1e-6)


def test_too_few_points():
    with pytest.raises(FitError):
        fit_exponential([0, 1, 2], [1, 0.5, 0.25])


def test_shape_mismatch():
    with pytest.raises(FitError):
        fit_exponential([0, 1, 2, 3], [1, 0.5, 0.25])


def test_weighted_uncertainty_matches_scatter():
    x = np.linspace(0, 12, 7)
    truth = model(x, 0.0, 0.5, 2.2)
    sigma = np.full_like(x, 0.004)
    rng = np.random.default_rng(7)
    fits = [fit_exponential(x, truth + rng.normal(0, sigma), sigma) for _ in range(200)]
    ts = np.array([f.t for f in fits])
    reported = np.median([f.sigma_t for f in fits])
    assert np.std(ts) == pytest.approx(reported, rel=0.2)
    assert abs(ts.mean() - 2.2) < 4 * reported / math.sqrt(200) + 0.01


def test_bootstrap_option():
    x = np.linspace(0, 12, 7)
    y = model(x, 0.0, 0.5, 2.2) + np.random.default_rng(1).normal(0, 0.004, x.size)
    fit = fit_exponential(x, y, np.full_like(x, 0.004), bootstrap=100, seed=3)
    assert fit.bootstrap_sigma_t == pytest.approx(fit.sigma_t, rel=0.35)


def test_initial_guess_reasonable():
    x = np.linspace(0, 10, 10)
    p0 = initial_guess(x, model(x, 0.0, 1.0, 3.0))
    assert 1.5 < p0[2] < 6


@given(st.floats(-1, 1), st.floats(0.05, 2), st.floats(0.5, 5e3), st.integers(0, 2**31))
def test_jacobian_matches_central_differences(y0, a0, t, seed):
    x = np.random.default_rng(seed).uniform(0, 3 * t, 6)
    jac = jacobian(x, y0, a0, t)
    p = np.array([y0, a0, t])
    for k in range(3):
        h = 1e-6 * max(abs(p[k]), 1.0)
        up, dn = p.copy(), p.copy()
        up[k] += h
        dn[k] -= h
        fd = (model(x, *up) - model(x, *dn)) / (2 * h)
        scale = np.max(np.abs(jac[:, k])) or 1.0
        assert np.max(np.abs(fd - jac[:, k])) <= 1e-6 * scale


@given(st.floats(-0.2, 0.2), st.floats(0.1, 1.0), st.floats(1.0, 5e3))
def test_noiseless_recovery(y0, a0, t):
    x = np.linspace(0, 3 * t, 9)
    fit = fit_exponential(x, model(x, y0, a0, t))
    assert fit.t == pytest.approx(t, rel=1e-5)
    assert fit.y0 == pytest.approx(y0, abs=1e-5 * a0)
