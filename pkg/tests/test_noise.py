import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from ddforge.noise import (
    OUNoiseParams,
    correlation,
    integrated_step_factor,
    sample_paths,
    spectral_density,
    spectral_matrix,
)


def test_table1_units(table1):
    assert table1.lam[0] == pytest.approx(2 * np.pi * 0.08)
    assert table1.gamma_phi[0] == pytest.approx((2 * np.pi * 0.08) ** 2 * 0.5)
    assert table1.rho == 0.8


@pytest.mark.parametrize("bad", [
    dict(sigma=(-1, 1), tau_c=1),
    dict(sigma=(1, 1), tau_c=0),
    dict(sigma=(1, 1), tau_c=1, r=[[1, 1.2], [1.2, 1]]),
    dict(sigma=(1, 1), tau_c=1, r=[[1, 0.2], [0.3, 1]]),
    dict(sigma=(1, np.nan), tau_c=1),
])
def test_invalid_params_rejected(bad):
    with pytest.raises(ValueError):
        OUNoiseParams(**bad)


def test_correlation_at_zero_lag_is_variance(table1):
    assert correlation(table1, 0, 0, 0.0) == pytest.approx(table1.sigma[0] ** 2)
    assert correlation(table1, 0, 1, 0.0) == pytest.approx(0.8 * table1.sigma[0] ** 2)


@given(st.floats(0.05, 5.0), st.floats(-0.99, 0.99))
@settings(max_examples=25, deadline=None)
def test_spectrum_is_fourier_transform_of_correlation(tau_c, rho):
    p = OUNoiseParams((0.7, 1.3), tau_c, [[1, rho], [rho, 1]])
    for w in (0.0, 1.0 / tau_c, 7.0):
        # S(w) = int C(tau) e^{-i w tau} dtau = 2 int_0^inf C(tau) cos(w tau) dtau
        num = 2 * quad(lambda t: correlation(p, 0, 1, t), 0, np.inf, weight="cos", wvar=w)[0] if w else \
            2 * quad(lambda t: correlation(p, 0, 1, t), 0, np.inf)[0]
        assert spectral_density(p, 0, 1, w) == pytest.approx(num, rel=1e-7, abs=1e-9 * 0.91 * tau_c)


def test_spectral_matrix_is_psd(table1):
    S = spectral_matrix(table1, np.linspace(0, 50, 101))
    for k in range(S.shape[-1]):
        assert np.linalg.eigvalsh(S[..., k]).min() >= -1e-15


def test_sampled_paths_have_ou_statistics(table1):
    dt, n = 0.01, 400_000
    x = sample_paths(table1, dt, n, seed=3)
    s = table1.sigma[0]
    assert x.var(axis=1) == pytest.approx([s**2, s**2], rel=0.05)
    cross = np.mean(x[0] * x[1])
    assert cross == pytest.approx(0.8 * s**2, rel=0.05)
    lag = int(round(table1.tau_c / dt))
    ac = np.mean(x[0, :-lag] * x[0, lag:]) / s**2
    assert ac == pytest.approx(np.exp(-1), abs=0.04)


def test_sample_paths_seeded():
    p = OUNoiseParams((1.0, 1.0), 1.0)
    assert np.array_equal(sample_paths(p, 0.1, 50, seed=9), sample_paths(p, 0.1, 50, seed=9))


@given(st.floats(1e-6, 50.0), st.floats(0.01, 10.0))
@settings(max_examples=60, deadline=None)
def test_integrated_step_moments(h, tau):
    """Unconditional moments of (x(h), int_0^h x) for a unit stationary OU process."""
    decay, lever, L = integrated_step_factor(h, tau)
    cov = L @ L.T
    x = h / tau
    var_i = lever**2 + cov[1, 1]
    cov_xi = decay * lever + cov[0, 1]
    var_x = decay**2 + cov[0, 0]
    assert var_x == pytest.approx(1.0, rel=1e-10)
    assert var_i == pytest.approx(2 * tau**2 * (x + np.expm1(-x)), rel=1e-8, abs=1e-300)
    assert cov_xi == pytest.approx(tau * -np.expm1(-x), rel=1e-8)
    assert lever == pytest.approx(tau * -np.expm1(-x), rel=1e-10)
