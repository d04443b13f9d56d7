import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddforge import metrics as M
from ddforge.errors import LifetimeError


def _random_state(rng, rank=4):
    a = rng.standard_normal((4, rank)) + 1j * rng.standard_normal((4, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_bell_states_have_unit_concurrence():
    for psi in (M.PSI_PLUS, M.PHI_PLUS):
        assert M.concurrence_general(np.outer(psi, psi.conj())) == pytest.approx(1.0)


def test_product_and_mixed_states():
    prod = np.zeros((4, 4)); prod[1, 1] = 1
    assert M.concurrence_general(prod) == pytest.approx(0.0, abs=1e-12)
    assert M.concurrence_general(np.eye(4) / 4) == pytest.approx(0.0, abs=1e-12)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(-np.pi, np.pi))
@settings(max_examples=80, deadline=None)
def test_x_state_formula_matches_wootters(a, b, c, d, frac, phase):
    p = np.array([a, b, c, d]) + 1e-3
    p = p / p.sum()
    x = M.XState(*p, frac * np.sqrt(p[1] * p[2]) * np.exp(1j * phase))
    assert M.xstate_concurrence(x) == pytest.approx(float(M.concurrence_general(x.matrix())), abs=1e-7)


@pytest.mark.parametrize("rank, tol", [(4, 1e-10), (2, 1e-7)])
def test_concurrence_is_local_unitary_invariant(rng, rank, tol):
    # rank-deficient states lose half the digits to square roots of ~0 eigenvalues
    rho = _random_state(rng, rank=rank)

    def u():
        q, _ = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        return q

    U = np.kron(u(), u())
    assert M.concurrence_general(U @ rho @ U.conj().T) == pytest.approx(float(M.concurrence_general(rho)), abs=tol)


def test_vectorized_concurrence(rng):
    stack = np.array([_random_state(rng, 1) for _ in range(6)])
    assert np.allclose(M.concurrence_general(stack), [M.concurrence_general(r) for r in stack])


def test_invalid_density_rejected():
    with pytest.raises(ValueError):
        M.concurrence_general(np.diag([1.2, -0.2, 0, 0]))
    with pytest.raises(ValueError):
        M.XState(0.5, 0.25, 0.25, 0.0, 0.4)


def test_bell_curve_formula():
    C, F = M.bell_concurrence_fidelity(np.array([0.0, 1.0, 50.0]))
    assert np.allclose(C, [1, np.exp(-1), np.exp(-50)])
    assert np.allclose(F, (1 + C) / 2)
    with pytest.raises(ValueError):
        M.bell_concurrence_fidelity(-0.1)


def test_first_crossing_exact_for_linear_data():
    t = np.linspace(0, 1, 11)
    assert M.first_crossing(t, 1 - t, 0.35) == pytest.approx(0.65, abs=1e-12)
    assert M.first_crossing(t, np.ones_like(t), 0.5) is None
    with pytest.raises(LifetimeError):
        M.first_crossing(t, np.full_like(t, np.nan), 0.5)


def test_lifetimes_of_exponential():
    t = np.linspace(0, 10, 2001)
    C = np.exp(-t / 2)
    rep = M.lifetimes(t, C, (1 + C) / 2)
    assert rep.tau_C == pytest.approx(2.0, rel=1e-6)
    assert rep.T_0999 == pytest.approx(-2 * np.log(0.998), rel=1e-6)
