import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddforge import filters as F
from ddforge import sequences as S
from ddforge.noise import OUNoiseParams


def test_modulation_signs_and_area():
    y = F.modulation(S.cpmg(2, 1.0), 0)
    assert np.allclose(y([0.1, 0.5, 0.9]), [1, -1, 1])
    assert y.area() == pytest.approx(0.0)
    assert y.n_flips == 2


def test_window_transform_free_and_zero_frequency():
    y = F.modulation(S.free_evolution(2.0), 0)
    w = np.array([0.0, 0.7, 3.0])
    expect = np.where(w == 0, 2.0, (np.exp(1j * w * 2.0) - 1) / (1j * np.where(w == 0, 1, w)))
    assert np.allclose(F.window_transform(y, w), expect)
    assert np.isfinite(F.filter_matrix(S.cpmg(8, 1.0), np.array([0.0]))).all()


@given(st.lists(st.floats(0.02, 0.98), min_size=1, max_size=6, unique=True), st.floats(0.1, 40))
@settings(max_examples=40, deadline=None)
def test_window_transform_against_riemann_sum(ts, w):
    ts = sorted(ts)
    if np.min(np.diff(ts), initial=1) < 1e-3:
        return
    y = F.modulation(S.custom(ts, 1.0), 0)
    t = (np.arange(200_000) + 0.5) / 200_000
    num = np.sum(y(t) * np.exp(1j * w * t)) / t.size
    assert abs(F.window_transform(y, w) - num) < 2e-5  # midpoint error at a jump is O(1/n)


def test_time_domain_matches_closed_form_for_free_evolution(table1):
    for t in (0.01, 0.3, 1.0, 4.0, 30.0):
        chi1, bell = F.chi_closed_form_free(table1, t)
        assert F.chi_time_domain(table1, S.free_evolution(t)) == pytest.approx(bell, rel=1e-12)
        assert F.chi_time_domain(table1, S.free_evolution(t), F.SINGLE_QUBIT) == pytest.approx(chi1[0], rel=1e-12)


@pytest.mark.parametrize("seq", [S.cpmg(1, 1.0), S.cpmg(8, 1.0), S.udd(5, 1.0), S.heisenberg_weyl_cycle(1.0),
                                 S.custom(([0.2, 0.7], [0.45]), 1.0)])
def test_time_and_frequency_routes_agree(table1, seq):
    for pair in (F.BELL, F.SINGLE_QUBIT, F.CoherencePair((1, 1))):
        a = F.chi_time_domain(table1, seq, pair)
        b, err = F.chi_frequency_domain(table1, seq, pair, return_error=True)
        assert b == pytest.approx(a, rel=1e-7)
        assert abs(b - a) <= err < 1e-4 * a


def test_time_domain_against_brute_force_double_integral(table1):
    seq = S.custom(([0.2, 0.7], [0.45]), 1.0)
    n = 2000
    t = (np.arange(n) + 0.5) / n
    y = np.stack([F.modulation(seq, q)(t) for q in (0, 1)])
    s = F.BELL.vector
    sig = np.asarray(table1.sigma)
    K = np.exp(-np.abs(t[:, None] - t[None]) / table1.tau_c)
    val = sum(s[i] * s[j] * sig[i] * sig[j] * table1.r[i, j] * (y[i] @ K @ y[j]) for i in (0, 1) for j in (0, 1)) / n**2
    assert F.chi_time_domain(table1, seq) == pytest.approx(val, rel=1e-5)


def test_chi_independent_of_pulse_axes(table1):
    a = F.chi(table1, S.cpmg(8, 1.0))
    b = F.chi(table1, S.xy8(1.0))
    assert a == b


def test_perfectly_correlated_common_mode_is_protected():
    p = OUNoiseParams.symmetric(1.0, 0.5, 1.0)
    assert F.chi_time_domain(p, S.free_evolution(3.0)) == pytest.approx(0.0, abs=1e-14)
    assert F.chi_time_domain(p, S.free_evolution(3.0), F.CoherencePair((1, 1))) > 0


def test_zero_noise_gives_zero():
    p = OUNoiseParams((0.0, 0.0), 0.5)
    assert F.chi_frequency_domain(p, S.cpmg(4, 1.0)) == 0.0


def test_short_and_long_time_limits(table1):
    tc, lam2 = table1.tau_c, table1.lam[0] ** 2
    t = tc / 100
    chi1 = F.chi_closed_form_free(table1, t)[0][0]
    assert chi1 == pytest.approx(0.5 * lam2 * t**2, rel=0.01)
    t = 10 * tc
    slope = (F.chi_closed_form_free(table1, t + 1e-4)[0][0] - F.chi_closed_form_free(table1, t - 1e-4)[0][0]) / 2e-4
    assert slope == pytest.approx(lam2 * tc, rel=0.01)


def test_instantaneous_rate(table1):
    g = F.gamma_inst(table1, np.array([0.0, 1e3]))
    assert g[0] == 0.0
    assert g[1] == pytest.approx(2 * (1 - 0.8) * table1.lam[0] ** 2 * table1.tau_c, rel=1e-12)
    t = np.linspace(0.01, 3, 50)
    h = 1e-5
    num = (F.chi_closed_form_free(table1, t + h)[1] - F.chi_closed_form_free(table1, t - h)[1]) / (2 * h)
    assert np.allclose(num, F.gamma_inst(table1, t), rtol=1e-7)


def test_dephasing_curve_modes(table1):
    seq = S.cpmg(4, 2.0)
    scaled = F.dephasing_curve(table1, seq, [0.0, 1.0, 2.0])
    trunc = F.dephasing_curve(table1, seq, [0.0, 1.0, 2.0], mode="truncated")
    assert scaled.chi[0] == trunc.chi[0] == 0.0
    assert scaled.chi[2] == pytest.approx(trunc.chi[2])
    assert scaled.chi[1] == pytest.approx(F.chi(table1, S.cpmg(4, 1.0)))


def test_filter_table_columns():
    tab = F.filter_table(S.cpmg(2, 1.0), np.linspace(0, 10, 5))
    assert tab.shape == (5, 4)
    assert np.allclose(tab[:, 1], tab[:, 2])


def test_mismatched_window_rejected(table1):
    with pytest.raises(ValueError):
        F.chi_frequency_domain(table1, S.cpmg(2, 1.0), T=2.0)
