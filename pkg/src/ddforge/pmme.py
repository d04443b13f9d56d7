"""Post-Markovian master equation with correlated dephasing and an exponential kernel.

    d rho/dt = L int_0^t k(t - s) e^{L (t - s)} rho(s) ds,   k(t) = e^{-t/tau_c} / tau_c

with L the correlated dephasing Lindbladian
    L rho = gamma0/2 sum_ij R_ij (Z_i rho Z_j - 1/2 {Z_i Z_j, rho}).
L is diagonal on matrix units |m><n|, so every element evolves independently.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import StepSizeError
from .filters import DephasingCurve
from .noise import OUNoiseParams

log = logging.getLogger(__name__)

_Z = np.diag([1.0, -1.0])
Z_OPS = (np.kron(_Z, np.eye(2)), np.kron(np.eye(2), _Z))
# sigma_z eigenvalues of each qubit for basis states 00, 01, 10, 11
_ZVALS = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)


@dataclass(frozen=True)
class DephasingLindbladian:
    gamma0: float
    R: np.ndarray = field(default_factory=lambda: np.eye(2))

    def __post_init__(self):
        R = np.array(self.R, dtype=float)
        if self.gamma0 < 0:
            raise ValueError("gamma0 must be non-negative")
        if R.shape != (2, 2) or not np.allclose(R, R.T) or not np.allclose(np.diag(R), 1):
            raise ValueError("R must be symmetric 2x2 with unit diagonal")
        if np.linalg.eigvalsh(R).min() < -1e-12:
            raise ValueError("R must be positive semidefinite")
        object.__setattr__(self, "R", R)

    @classmethod
    def from_noise(cls, params: OUNoiseParams) -> "DephasingLindbladian":
        """Calibrate gamma0 to the OU long-time rate lam^2 tau_c (mean over qubits)."""
        return cls(float(np.mean(params.gamma_phi)), params.r)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho, dtype=complex)
        for i in range(2):
            for j in range(2):
                zi, zj = Z_OPS[i], Z_OPS[j]
                out += self.R[i, j] * (zi @ rho @ zj - 0.5 * (zi @ zj @ rho + rho @ zi @ zj))
        return 0.5 * self.gamma0 * out

    def superoperator(self) -> np.ndarray:
        """16x16 matrix acting on row-major vec(rho)."""
        cols = []
        for k in range(16):
            e = np.zeros(16, dtype=complex)
            e[k] = 1.0
            cols.append(self.apply(e.reshape(4, 4)).ravel())
        return np.array(cols).T


@dataclass(frozen=True)
class MemoryKernel:
    tau_c: float

    def __post_init__(self):
        if not self.tau_c > 0:
            raise ValueError("kernel tau_c must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, np.exp(-np.clip(t, 0, None) / self.tau_c) / self.tau_c, 0.0)


@dataclass
class PMMETrajectory:
    times: np.ndarray
    states: np.ndarray  # (n_t, 4, 4)
    method: str
    min_eigenvalue: float = float("nan")


def lindblad_eigenrates(L: DephasingLindbladian) -> np.ndarray:
    """Decay rate mu_mn of each matrix element |m><n|: gamma0 s^T R s with s = (z_m - z_n)/2."""
    s = 0.5 * (_ZVALS[:, None, :] - _ZVALS[None, :, :])
    return L.gamma0 * np.einsum("mni,ij,mnj->mn", s, L.R, s)


def coherence_factor(mu, tau_c: float, t):
    """x(t)/x(0) for x' = -mu int_0^t k(t-s) e^{-mu (t-s)} x(s) ds.

    The Laplace transform is (p + a) / (p^2 + a p + mu/tau_c) with
    a = mu + 1/tau_c; the roots are combined as
    e^{ct} [cosh(u) + (a/2) t sinh(u)/u], u = D t / 2, which reduces to the
    confluent form e^{-mu t}(1 + mu t) at a repeated root.
    """
    mu = np.asarray(mu, dtype=float)
    t = np.asarray(t, dtype=float)
    a = mu + 1.0 / tau_c
    disc = a * a - 4.0 * mu / tau_c
    D = np.sqrt(disc.astype(complex))
    c = -0.5 * a
    u = 0.5 * D * t
    small = np.abs(u) < 1.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        us = np.where(small, u, 1.0)
        shc = np.where(np.abs(us) < 1e-8, 1.0 + us * us / 6.0, np.sinh(us) / us)
        near = np.exp(c * t) * (np.cosh(us) + 0.5 * a * t * shc)
        r1, r2 = c + 0.5 * D, c - 0.5 * D
        Dsafe = np.where(small, 1.0, D)
        far = ((r1 + a) * np.exp(r1 * t) - (r2 + a) * np.exp(r2 * t)) / Dsafe
    x = np.where(small, near, far)
    return np.real(x)


def pmme_evolve_analytic(L: DephasingLindbladian, k: MemoryKernel, rho0, times) -> PMMETrajectory:
    rho0 = np.asarray(rho0, dtype=complex)
    times = np.asarray(times, dtype=float)
    mu = lindblad_eigenrates(L)
    fac = coherence_factor(mu[None], k.tau_c, times[:, None, None])
    states = fac * rho0[None]
    traj = PMMETrajectory(times, states, "analytic")
    _monitor_positivity(traj)
    return traj


def _history_weights(nu: np.ndarray, h: float, tau_c: float):
    """Product-trapezoid weights for int_0^h e^{-nu v} rho(t+h-v) dv / tau_c with rho linear."""
    z = nu * h
    with np.errstate(divide="ignore", invalid="ignore"):
        phi1 = np.where(z < 1e-4, 1 - z / 2 + z * z / 6, -np.expm1(-z) / z)
        psi = np.where(z < 1e-4, 0.5 - z / 3 + z * z / 8, (1 - np.exp(-z) * (1 + z)) / (z * z))
    i0 = h * phi1  # int_0^h e^{-nu v} dv
    i1 = h * h * psi  # int_0^h v e^{-nu v} dv
    w_old = i1 / (h * tau_c)
    w_new = (i0 - i1 / h) / tau_c
    return w_old, w_new


def pmme_evolve_volterra(
    L: DephasingLindbladian,
    k: MemoryKernel,
    rho0,
    dt: float,
    T: float,
    *,
    max_trace_drift: float = 1e-6,
) -> PMMETrajectory:
    """Time-stepping of the memory integral with an O(1) recursive history update.

    The history H(t) = int_0^t k(t-s) e^{L(t-s)} rho(s) ds obeys
    H(t+h) = e^{-h/tau_c} e^{L h} H(t) + local product-trapezoid term, and
    rho is advanced with the trapezoid rule on d rho/dt = L H (implicit in
    the new step, solved in closed form because L is diagonal).
    """
    if dt <= 0 or T <= 0:
        raise ValueError("dt and T must be positive")
    if dt > k.tau_c / 50:
        warnings.warn(f"dt={dt} exceeds tau_c/50={k.tau_c / 50}", stacklevel=2)
    sup = L.superoperator()
    off = sup - np.diag(np.diag(sup))
    if np.abs(off).max() > 1e-12:
        raise ValueError("generator is not diagonal on matrix units")
    lam = np.diag(sup).real.reshape(4, 4)  # eigenvalue -mu per element
    mu = -lam
    nu = mu + 1.0 / k.tau_c
    n = int(round(T / dt))
    h = T / n
    decay = np.exp(-nu * h)
    w_old, w_new = _history_weights(nu, h, k.tau_c)
    rho = np.asarray(rho0, dtype=complex).copy()
    H = np.zeros_like(rho)
    states = np.empty((n + 1, 4, 4), dtype=complex)
    states[0] = rho
    tr0 = np.trace(rho).real
    for step in range(1, n + 1):
        # rho1 = rho - (h mu / 2)(H + H1),  H1 = decay H + w_old rho + w_new rho1
        hm = 0.5 * h * mu
        rho1 = (rho * (1 - hm * w_old) - hm * (1 + decay) * H) / (1 + hm * w_new)
        H = decay * H + w_old * rho + w_new * rho1
        rho = rho1
        states[step] = rho
    drift = float(np.max(np.abs(np.trace(states, axis1=1, axis2=2).real - tr0)))
    if drift > max_trace_drift:
        raise StepSizeError(f"trace drift {drift:.3g} exceeds {max_trace_drift:g}; reduce dt")
    traj = PMMETrajectory(np.linspace(0.0, T, n + 1), states, "volterra")
    _monitor_positivity(traj)
    return traj


def _monitor_positivity(traj: PMMETrajectory, tol: float = -1e-8):
    herm = 0.5 * (traj.states + np.conj(np.swapaxes(traj.states, -1, -2)))
    wmin = float(np.linalg.eigvalsh(herm).min())
    traj.min_eigenvalue = wmin
    if wmin < tol:
        log.warning("PMME state lost positivity: min eigenvalue %.3g (%s)", wmin, traj.method)


def chi_pm(traj: PMMETrajectory, element: tuple[int, int] = (1, 2), floor: float = 1e-12):
    """chi_PM(t) = -ln|rho_mn(t)/rho_mn(0)| and its central-difference rate."""
    m, n = element
    c = traj.states[:, m, n]
    if abs(c[0]) == 0:
        raise ValueError("initial coherence is zero")
    keep = np.abs(c) >= floor
    if not keep.all():
        cut = int(np.argmin(keep))
        c = c[:cut]
    t = traj.times[: c.size]
    chi = -np.log(np.abs(c / c[0]))
    rate = np.gradient(chi, t) if c.size > 1 else np.zeros(1)
    return DephasingCurve(t, chi, f"pmme-{traj.method}"), rate
