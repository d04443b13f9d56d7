"""Concurrence, Bell fidelity and lifetime extraction for two-qubit states.

Basis order is |00>, |01>, |10>, |11> with the first qubit on the left.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import LifetimeError

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
YY = np.kron(SIGMA_Y, SIGMA_Y)
PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)

TAU_C_THRESHOLD = np.exp(-1.0)
FIDELITY_THRESHOLD = 0.999


def bell_concurrence_fidelity(chi):
    """C = exp(-chi) and F = (1 + C)/2 for the dephased |Psi+> state."""
    chi = np.asarray(chi, dtype=float)
    if np.any(chi < 0):
        raise ValueError("dephasing exponent must be non-negative")
    c = np.exp(-chi)
    return c, 0.5 * (1.0 + c)


@dataclass(frozen=True)
class XState:
    p00: float
    p01: float
    p10: float
    p11: float
    coherence: complex  # rho_{01,10}

    def __post_init__(self):
        p = np.array([self.p00, self.p01, self.p10, self.p11])
        if np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-9:
            raise ValueError("populations must be non-negative and sum to 1")
        if abs(self.coherence) > np.sqrt(max(self.p01 * self.p10, 0.0)) + 1e-12:
            raise ValueError("|rho_{01,10}| exceeds sqrt(p01 p10)")

    def matrix(self) -> np.ndarray:
        rho = np.diag([self.p00, self.p01, self.p10, self.p11]).astype(complex)
        rho[1, 2] = self.coherence
        rho[2, 1] = np.conj(self.coherence)
        return rho


def xstate_concurrence(x: XState) -> float:
    return max(0.0, 2 * abs(x.coherence) - 2 * np.sqrt(x.p00 * x.p11))


def _check_density(rho: np.ndarray, tol: float):
    if rho.shape[-2:] != (4, 4):
        raise ValueError("expected 4x4 density matrices")
    if not np.allclose(rho, np.conj(np.swapaxes(rho, -1, -2)), atol=1e-9):
        raise ValueError("density matrix is not Hermitian")
    w = np.linalg.eigvalsh(rho)
    if np.any(w < -tol):
        raise ValueError(f"density matrix is not positive semidefinite (min eigenvalue {w.min():.3g})")


def concurrence_general(rho, *, tol: float = 1e-9):
    """Wootters concurrence, vectorized over leading axes."""
    rho = np.asarray(rho, dtype=complex)
    _check_density(rho, tol)
    w, v = np.linalg.eigh(rho)
    sq = (v * np.sqrt(np.clip(w, 0, None))[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    tilde = YY @ np.conj(rho) @ YY
    m = sq @ tilde @ sq
    m = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    mu = np.sqrt(np.clip(np.linalg.eigvalsh(m), 0, None))[..., ::-1]
    c = mu[..., 0] - mu[..., 1] - mu[..., 2] - mu[..., 3]
    return np.clip(c, 0.0, None)


def bell_fidelity(rho, bell: np.ndarray = PSI_PLUS):
    rho = np.asarray(rho, dtype=complex)
    return np.real(np.einsum("i,...ij,j->...", np.conj(bell), rho, bell))


@dataclass(frozen=True)
class LifetimeReport:
    tau_C: float | None  # C(tau_C) = 1/e; None when not reached in the window
    T_0999: float | None  # F(T_0999) = 0.999; None when not reached
    window: float = float("nan")


def first_crossing(times, values, threshold: float) -> float | None:
    """First downward crossing of ``threshold`` by monotone cubic interpolation."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise LifetimeError("curve contains non-finite samples")
    below = np.nonzero(values < threshold)[0]
    if below.size == 0:
        return None
    k = int(below[0])
    if k == 0:
        return float(times[0])
    interp = PchipInterpolator(times, values)
    try:
        return float(brentq(lambda t: interp(t) - threshold, times[k - 1], times[k], xtol=1e-14))
    except ValueError as exc:
        raise LifetimeError(f"bisection failed on [{times[k - 1]}, {times[k]}]") from exc


def lifetimes(times, concurrence=None, fidelity=None) -> LifetimeReport:
    times = np.asarray(times, dtype=float)
    tc = first_crossing(times, concurrence, TAU_C_THRESHOLD) if concurrence is not None else None
    tf = first_crossing(times, fidelity, FIDELITY_THRESHOLD) if fidelity is not None else None
    return LifetimeReport(tc, tf, float(times[-1]))


def lifetimes_from_curve(curve) -> LifetimeReport:
    c, f = bell_concurrence_fidelity(curve.chi)
    return lifetimes(curve.times, c, f)
