"""Modulation functions, filter functions and dephasing exponents.

Conventions
-----------
The qubit frequency fluctuation has rms amplitude ``lam_i = sqrt(2) sigma_i``,
so the coherence between basis states alpha, beta decays as
``exp(-chi_ab(t))`` with

    chi = 1/2 int int s^T (C_lam(t1 - t2) o y(t1) y(t2)^T) s dt1 dt2
        = 1/pi int_0^inf s^T (S(w) o F(w, t)) s dw

where ``C_lam = 2 C`` and ``S`` is the OU spectrum of ``noise.spectral_density``.
``s`` is the vector of half-differences of sigma_z eigenvalues, e.g. (1, -1)
for the |01>, |10> coherence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import quadrature
from .noise import OUNoiseParams, spectral_matrix
from .sequences import PulseSequence


@dataclass(frozen=True)
class ModulationFunction:
    breakpoints: np.ndarray  # 0 = b_0 < ... < b_K = T
    signs: np.ndarray  # one +-1 per interval, first is +1

    @property
    def total_time(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def starts(self) -> np.ndarray:
        return self.breakpoints[:-1]

    @property
    def ends(self) -> np.ndarray:
        return self.breakpoints[1:]

    @property
    def n_flips(self) -> int:
        return int(np.count_nonzero(np.diff(self.signs)))

    def area(self) -> float:
        return float(np.sum(self.signs * np.diff(self.breakpoints)))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        idx = np.clip(idx, 0, self.signs.size - 1)
        return self.signs[idx]


@dataclass(frozen=True)
class CoherencePair:
    s: tuple[int, int]

    def __post_init__(self):
        s = tuple(int(v) for v in self.s)
        if len(s) != 2 or any(v not in (-2, -1, 0, 1, 2) for v in s):
            raise ValueError(f"coherence vector components must be in -2..2, got {self.s}")
        object.__setattr__(self, "s", s)

    @classmethod
    def from_states(cls, alpha: str, beta: str) -> "CoherencePair":
        """Coherence |alpha><beta| for bitstrings like '01', '10'."""
        z = lambda bits: np.array([1 - 2 * int(b) for b in bits])
        return cls(tuple((z(alpha) - z(beta)) // 2))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.s, dtype=float)


BELL = CoherencePair((1, -1))
SINGLE_QUBIT = CoherencePair((1, 0))


@dataclass(frozen=True)
class DephasingCurve:
    times: np.ndarray
    chi: np.ndarray
    method: str

    @property
    def coherence(self) -> np.ndarray:
        return np.exp(-self.chi)


def modulation(seq: PulseSequence, qubit: int) -> ModulationFunction:
    t = seq.times(qubit)
    bp = np.concatenate([[0.0], t, [seq.total_time]])
    signs = (-1.0) ** np.arange(t.size + 1)
    return ModulationFunction(bp, signs)


def window_transform(y: ModulationFunction, omega, T: float | None = None):
    """Y(w, T) = int_0^T y(t) e^{i w t} dt, exact per constant-sign interval."""
    if T is not None and not np.isclose(T, y.total_time, rtol=1e-12, atol=0):
        raise ValueError(f"T={T} does not match the modulation window {y.total_time}")
    omega = np.asarray(omega, dtype=float)
    a, b = y.starts, y.ends
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    w = omega[..., None]
    # int_a^b e^{iwt} dt = (b - a) e^{iw mid} sinc(w half)
    terms = y.signs * 2 * half * np.exp(1j * w * mid) * np.sinc(w * half / np.pi)
    return terms.sum(axis=-1)


def filter_matrix(seq: PulseSequence, omega) -> np.ndarray:
    """F_ij(w) = Y_i(w) Y_j(w)^*, shape (2, 2, *omega.shape)."""
    Y = np.stack([window_transform(modulation(seq, q), omega) for q in (0, 1)])
    return Y[:, None] * np.conj(Y[None, :])


def _check_T(seq: PulseSequence, T):
    if T is not None and not np.isclose(T, seq.total_time, rtol=1e-12, atol=0):
        raise ValueError(f"T={T} does not match sequence storage time {seq.total_time}")


def _weights(params: OUNoiseParams, pair: CoherencePair) -> np.ndarray:
    s = pair.vector
    sig = np.asarray(params.sigma)
    return np.outer(s, s) * np.outer(sig, sig) * params.r


def overlap_integrand(params: OUNoiseParams, seq: PulseSequence, pair: CoherencePair = BELL):
    """w -> s^T (S(w) o F(w)) s / pi as a vectorized callable."""
    s = pair.vector
    mods = [modulation(seq, q) for q in (0, 1)]

    def f(omega):
        Y = np.stack([window_transform(m, omega) for m in mods])
        S = spectral_matrix(params, omega)
        F = (Y[:, None] * np.conj(Y[None, :])).real
        return np.einsum("i,j,ij...->...", s, s, S * F) / np.pi

    return f


def _jump_weights(seq: PulseSequence) -> dict[float, np.ndarray]:
    """Coefficients c_i(t) of Y_i(w) = (1/iw) sum_t c_i(t) e^{iwt}."""
    out: dict[float, np.ndarray] = {}
    T = seq.total_time
    for q in (0, 1):
        y = modulation(seq, q)
        entries = [(0.0, -1.0)]
        entries += [(t, -2.0 * y.signs[k + 1]) for k, t in enumerate(seq.times(q))]
        entries.append((T, y.signs[-1]))
        for t, c in entries:
            key = round(t / T, 12)
            out.setdefault(key, np.zeros(2))[q] += c
    return out


def _tail(params: OUNoiseParams, seq: PulseSequence, pair: CoherencePair, w_max: float):
    """Mean-value tail of the overlap integral beyond w_max and a bound on the rest.

    Above w_max, |Y|^2 averages to sum_t c(t)^2 / w^2; the cross terms are
    oscillatory and bounded by sum_{t != t'} |c c'| / w^2.
    """
    tc = params.tau_c
    wts = _weights(params, pair) * 2 * tc
    # int_{w_max}^inf dw / ((1 + w^2 tc^2) w^2)
    k = 1.0 / w_max - tc * (0.5 * np.pi - np.arctan(w_max * tc))
    jumps = np.array(list(_jump_weights(seq).values()))
    diag = np.einsum("ti,tj->ij", jumps, jumps)
    absum = np.abs(jumps).sum(axis=0)
    cross = np.outer(absum, absum) - np.einsum("ti,tj->ij", np.abs(jumps), np.abs(jumps))
    mean = float(np.sum(wts * diag)) * k / np.pi
    bound = float(np.sum(np.abs(wts) * cross)) / (tc * tc * 3 * w_max**3) / np.pi
    return mean, bound


def chi_frequency_domain(
    params: OUNoiseParams,
    seq: PulseSequence,
    pair: CoherencePair = BELL,
    T: float | None = None,
    *,
    rtol: float = 1e-10,
    return_error: bool = False,
):
    """Dephasing exponent from the overlap of the noise spectrum with the filter."""
    _check_T(seq, T)
    T = seq.total_time
    tc = params.tau_c
    bp = np.unique(np.concatenate([[0.0, T], seq.times(0), seq.times(1)]))
    dmin = float(np.min(np.diff(bp)))
    w_max = max(200.0 / tc, 200.0 / dmin)
    width = np.pi / T
    edges = np.concatenate([
        np.arange(0.0, w_max, width),
        [1.0 / tc, seq.n_pulses * np.pi / T, w_max],
    ])
    edges = edges[edges <= w_max]
    f = overlap_integrand(params, seq, pair)
    res = quadrature.integrate(f, edges, rtol=rtol, atol=1e-300)
    tail, bound = _tail(params, seq, pair, w_max)
    value = res.value + tail
    if return_error:
        return value, res.error + bound
    return value


def _merged(seq: PulseSequence):
    bp = np.unique(np.concatenate([[0.0, seq.total_time], seq.times(0), seq.times(1)]))
    mid = 0.5 * (bp[:-1] + bp[1:])
    signs = np.stack([modulation(seq, q)(mid) for q in (0, 1)])
    return bp, signs


def _ou_box_kernel(bp: np.ndarray, tau: float) -> np.ndarray:
    """K_pq = int_{I_p} int_{I_q} exp(-|t1 - t2| / tau) for consecutive intervals."""
    a, b = bp[:-1], bp[1:]
    L = b - a
    x = L / tau
    self_term = 2 * tau * tau * (x + np.expm1(-x))
    g = -np.expm1(-x)  # 1 - e^{-L/tau}
    # p < q: tau^2 e^{-(a_q - b_p)/tau} g_p g_q
    gap = a[None, :] - b[:, None]
    K = tau * tau * np.exp(-np.clip(gap, 0, None) / tau) * np.outer(g, g)
    K = np.triu(K, 1)
    K = K + K.T
    K[np.diag_indices_from(K)] = self_term
    return K


def chi_time_domain(
    params: OUNoiseParams,
    seq: PulseSequence,
    pair: CoherencePair = BELL,
    T: float | None = None,
) -> float:
    """Dephasing exponent by exact integration of the OU kernel over sign boxes."""
    _check_T(seq, T)
    if seq.total_time == 0:
        return 0.0
    bp, signs = _merged(seq)
    K = _ou_box_kernel(bp, params.tau_c)
    M = signs @ K @ signs.T  # M_ij = int int y_i y_j e^{-|dt|/tau}
    # 1/2 * lam_i lam_j r_ij = sigma_i sigma_j r_ij
    return float(np.sum(_weights(params, pair) * M))


def _g(t, tau_c):
    """t - tau_c (1 - exp(-t/tau_c)), accurate for small t."""
    x = np.asarray(t, dtype=float) / tau_c
    return tau_c * (x + np.expm1(-x))


def chi_closed_form_free(params: OUNoiseParams, t):
    """Free-evolution exponents: per-qubit chi_i(t) (shape (2, ...)) and the Bell chi."""
    g = _g(t, params.tau_c)
    lam = params.lam
    chi1 = (lam**2 * params.tau_c)[(...,) + (None,) * np.ndim(g)] * g
    chi_bell = chi1[0] + chi1[1] - 2 * params.rho * np.sqrt(chi1[0] * chi1[1])
    return chi1, chi_bell


def gamma_inst(params: OUNoiseParams, t):
    """Instantaneous Bell dephasing rate d chi / dt for free evolution."""
    lam = params.lam
    k = lam[0] ** 2 + lam[1] ** 2 - 2 * params.rho * lam[0] * lam[1]
    return k * params.tau_c * -np.expm1(-np.asarray(t, dtype=float) / params.tau_c)


def chi(params, seq, pair=BELL, method: str = "time") -> float:
    if method == "time":
        return chi_time_domain(params, seq, pair)
    if method == "frequency":
        return chi_frequency_domain(params, seq, pair)
    raise ValueError(f"unknown method {method!r}")


def dephasing_curve(
    params: OUNoiseParams,
    seq: PulseSequence,
    times: Sequence[float],
    pair: CoherencePair = BELL,
    *,
    method: str = "time",
    mode: str = "scaled",
) -> DephasingCurve:
    """chi(t) on a grid.

    ``mode='scaled'`` stretches the normalized schedule to each storage time
    t; ``mode='truncated'`` keeps the absolute schedule and counts only the
    pulses applied before t.
    """
    times = np.asarray(times, dtype=float)
    out = np.zeros_like(times)
    for k, t in enumerate(times):
        if t <= 0:
            continue
        s = seq.scaled(t) if mode == "scaled" else seq.truncated(t)
        out[k] = chi(params, s, pair, method)
    return DephasingCurve(times, out, f"{method}-{mode}")


def closed_form_curve(params: OUNoiseParams, times) -> DephasingCurve:
    times = np.asarray(times, dtype=float)
    return DephasingCurve(times, chi_closed_form_free(params, times)[1], "closed-form")


def filter_table(seq: PulseSequence, omega) -> np.ndarray:
    """Columns omega, F_11, F_22, Re F_12 for export."""
    F = filter_matrix(seq, omega)
    return np.column_stack([omega, F[0, 0].real, F[1, 1].real, F[0, 1].real])
