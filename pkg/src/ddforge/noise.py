"""Correlated Ornstein-Uhlenbeck frequency noise acting on two qubits.

Units: time in microseconds, amplitudes in rad/us.  ``sigma`` is the
standard deviation of the OU process ``xi_i``; the qubit frequency
amplitude is ``lam = sqrt(2) * sigma``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class OUNoiseParams:
    sigma: tuple[float, float]
    tau_c: float
    r: np.ndarray = field(default_factory=lambda: np.eye(2))

    def __post_init__(self):
        sigma = tuple(float(s) for s in self.sigma)
        if len(sigma) != 2:
            raise ValueError("sigma must have two entries")
        if min(sigma) < 0 or not np.all(np.isfinite(sigma)):
            raise ValueError(f"sigma must be finite and non-negative, got {sigma}")
        if not (self.tau_c > 0 and np.isfinite(self.tau_c)):
            raise ValueError(f"tau_c must be positive, got {self.tau_c}")
        r = np.array(self.r, dtype=float)
        if r.shape != (2, 2):
            raise ValueError("r must be a 2x2 matrix")
        if not np.allclose(r, r.T, atol=1e-12):
            raise ValueError("r must be symmetric")
        if not np.allclose(np.diag(r), 1.0, atol=1e-12):
            raise ValueError("r must have unit diagonal")
        # for a unit-diagonal 2x2 matrix PSD <=> |r12| <= 1
        if abs(r[0, 1]) > 1.0 + 1e-12:
            raise ValueError(f"r is not positive semidefinite (r12={r[0, 1]})")
        r[0, 1] = r[1, 0] = float(np.clip(r[0, 1], -1.0, 1.0))
        r.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "tau_c", float(self.tau_c))
        object.__setattr__(self, "r", r)

    @classmethod
    def symmetric(cls, lam: float, tau_c: float, rho: float) -> "OUNoiseParams":
        """Equal amplitudes ``lam`` (rad/us, lam**2 = 2 sigma**2) and cross-correlation ``rho``."""
        s = lam / np.sqrt(2.0)
        return cls((s, s), tau_c, np.array([[1.0, rho], [rho, 1.0]]))

    @classmethod
    def from_khz(cls, lam_over_2pi_khz: float, tau_c_us: float, rho: float) -> "OUNoiseParams":
        return cls.symmetric(2 * np.pi * lam_over_2pi_khz * 1e-3, tau_c_us, rho)

    @property
    def lam(self) -> np.ndarray:
        return np.sqrt(2.0) * np.asarray(self.sigma)

    @property
    def rho(self) -> float:
        return float(self.r[0, 1])

    @property
    def gamma_phi(self) -> np.ndarray:
        """Per-qubit long-time dephasing rates lam_i**2 tau_c = S_ii(0)."""
        return self.lam**2 * self.tau_c

    def scaled(self, *, tau_c: float | None = None, keep_s0: bool = True) -> "OUNoiseParams":
        """Copy with a new correlation time; ``keep_s0`` holds S(0) = 2 sigma^2 tau_c fixed."""
        if tau_c is None:
            return self
        factor = np.sqrt(self.tau_c / tau_c) if keep_s0 else 1.0
        return OUNoiseParams(tuple(s * factor for s in self.sigma), tau_c, self.r)

    def mixing(self) -> np.ndarray:
        """Lower-triangular factor L with L L^T = r (valid also for |r12| = 1)."""
        c = self.rho
        return np.array([[1.0, 0.0], [c, np.sqrt(max(0.0, 1.0 - c * c))]])


def correlation(params: OUNoiseParams, i: int, j: int, tau):
    """C_ij(tau) = sigma_i sigma_j r_ij exp(-|tau|/tau_c)."""
    _check_index(i, j)
    s = params.sigma
    return s[i] * s[j] * params.r[i, j] * np.exp(-np.abs(tau) / params.tau_c)


def spectral_density(params: OUNoiseParams, i: int, j: int, omega):
    """S_ij(w) = 2 sigma_i sigma_j r_ij tau_c / (1 + w^2 tau_c^2)."""
    _check_index(i, j)
    s = params.sigma
    tc = params.tau_c
    omega = np.asarray(omega, dtype=float)
    return 2 * s[i] * s[j] * params.r[i, j] * tc / (1.0 + (omega * tc) ** 2)


def spectral_matrix(params: OUNoiseParams, omega) -> np.ndarray:
    """All four S_ij(omega), shape (2, 2, *omega.shape)."""
    omega = np.asarray(omega, dtype=float)
    s = np.asarray(params.sigma)
    amp = 2 * np.outer(s, s) * params.r * params.tau_c
    lor = 1.0 / (1.0 + (omega * params.tau_c) ** 2)
    return amp[(...,) + (None,) * omega.ndim] * lor


def _check_index(i, j):
    if i not in (0, 1) or j not in (0, 1):
        raise IndexError(f"qubit indices must be 0 or 1, got ({i}, {j})")


def sample_paths(params: OUNoiseParams, dt: float, n_steps: int, seed: int) -> np.ndarray:
    """Two correlated stationary OU paths on a uniform grid, shape (2, n_steps + 1).

    Uses the exact one-step transition, so the result has the OU law at
    every grid point regardless of ``dt``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    L = params.mixing()
    rng = np.random.default_rng(seed)
    a = np.exp(-dt / params.tau_c)
    b = np.sqrt(-np.expm1(-2 * dt / params.tau_c))
    z = rng.standard_normal((2, n_steps + 1))
    u = np.empty_like(z)
    u[:, 0] = z[:, 0]
    for k in range(1, n_steps + 1):
        u[:, k] = a * u[:, k - 1] + b * z[:, k]
    return np.asarray(params.sigma)[:, None] * (L @ u)


def integrated_step_factor(h: float, tau_c: float) -> tuple[float, float, np.ndarray]:
    """Exact transition of a unit-variance OU pair (x, int_0^h x dt).

    Returns ``(decay, lever, chol)`` such that, given x0 and two standard
    normals z, ``x1 = decay*x0 + chol[0] @ z`` and
    ``I = lever*x0 + chol[1] @ z``.
    """
    x = h / tau_c
    a = -np.expm1(-x)  # 1 - e^{-x}
    var_x = a * (2.0 - a)  # 1 - e^{-2x}
    if x < 1e-3:
        var_i = tau_c**2 * x**3 * (2.0 / 3.0 - x / 2.0 + 7.0 * x * x / 30.0)
    else:
        var_i = tau_c**2 * (2.0 * x - 2.0 * a - a * a)
    cov = tau_c * a * a
    l00 = np.sqrt(var_x)
    l10 = cov / l00 if l00 > 0 else 0.0
    l11 = np.sqrt(max(var_i - l10 * l10, 0.0))
    chol = np.array([[l00, 0.0], [l10, l11]])
    return 1.0 - a, tau_c * a, chol
