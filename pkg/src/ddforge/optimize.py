"""Pulse-time optimization against the OU spectrum, and protocol comparison.

The cost of a schedule is the dephasing exponent it leaves at the storage
time, i.e. the overlap of the noise spectrum with the sequence filter.
Times are searched in an unconstrained space: N free logits plus a fixed
zero logit give N+1 positive gaps through a softmax, so every iterate is a
strictly ordered schedule inside (0, T*).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import sequences as seqs
from .filters import BELL, CoherencePair, chi_frequency_domain, chi_time_domain
from .metrics import FIDELITY_THRESHOLD, TAU_C_THRESHOLD, bell_concurrence_fidelity
from .noise import OUNoiseParams

PUBLISHED_TIMES_N8 = np.array([0.08, 0.19, 0.31, 0.43, 0.57, 0.70, 0.82, 0.92])


@dataclass(frozen=True)
class OptimizationProblem:
    N: int = 8
    T_star: float = 1.0  # us
    noise: OUNoiseParams = field(default_factory=lambda: OUNoiseParams.from_khz(80.0, 0.5, 0.8))
    pair: CoherencePair = BELL
    min_gap: float = 0.0  # us, smallest allowed spacing (edges included)
    backend: str = "time"  # 'time' (exact box kernel) or 'frequency' (quadrature)

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("N must be non-negative")
        if not self.T_star > 0:
            raise ValueError("T_star must be positive")
        if self.min_gap < 0 or (self.N + 1) * self.min_gap >= self.T_star:
            raise ValueError("min_gap leaves no room for the pulses")
        if self.backend not in ("time", "frequency"):
            raise ValueError("backend must be 'time' or 'frequency'")

    def times_from_logits(self, u) -> np.ndarray:
        z = np.concatenate([[0.0], np.asarray(u, dtype=float)])
        w = np.exp(z - z.max())
        gaps = self.min_gap + (self.T_star - (self.N + 1) * self.min_gap) * w / w.sum()
        return np.cumsum(gaps)[:-1]

    def logits_from_times(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        gaps = np.diff(np.concatenate([[0.0], t, [self.T_star]])) - self.min_gap
        if np.any(gaps <= 0):
            raise ValueError("times violate ordering or the minimum gap")
        return np.log(gaps[1:] / gaps[0])

    def equally_spaced(self) -> np.ndarray:
        return (np.arange(1, self.N + 1) - 0.5) * self.T_star / self.N


@dataclass(frozen=True)
class NelderMeadConfig:
    alpha: float = 1.0  # reflection
    gamma: float = 2.0  # expansion
    rho: float = 0.5  # contraction
    sigma: float = 0.5  # shrink
    step: float = 0.05  # initial simplex edge in logit space
    rel_tol: float = 1e-10  # stop when the simplex cost spread < rel_tol * J0
    max_iter: int = 2000
    n_starts: int = 1  # extra starts use randomly perturbed simplices
    perturbation: float = 0.3


@dataclass
class OptimizationReport:
    times: np.ndarray
    J: float
    J0: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)  # (iteration, best J)
    starts: list = field(default_factory=list)  # (start index, J, converged)
    T_star: float = 1.0

    @property
    def normalized_times(self) -> np.ndarray:
        return self.times / self.T_star


def cost(problem: OptimizationProblem, times) -> float:
    """Dephasing exponent of the schedule (same timing on both qubits) at T*."""
    t = np.asarray(times, dtype=float)
    if t.size != problem.N:
        raise ValueError(f"expected {problem.N} times, got {t.size}")
    if t.size and (t[0] <= 0 or t[-1] >= problem.T_star or np.any(np.diff(t) <= 0)):
        raise ValueError("times must be strictly increasing inside (0, T*)")
    seq = seqs.custom(t, problem.T_star) if t.size else seqs.free_evolution(problem.T_star)
    if problem.backend == "time":
        return chi_time_domain(problem.noise, seq, problem.pair)
    return chi_frequency_domain(problem.noise, seq, problem.pair)


def nelder_mead(f, x0, config: NelderMeadConfig, J0: float, simplex=None):
    """Plain Nelder-Mead; returns (x, f(x), iterations, converged, trace)."""
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    if simplex is None:
        simplex = np.vstack([x0, x0 + config.step * np.eye(n)])
    simplex = np.array(simplex, dtype=float)
    fs = np.array([f(x) for x in simplex])
    trace = []
    tol = config.rel_tol * abs(J0) if J0 != 0 else config.rel_tol
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        order = np.argsort(fs, kind="stable")
        simplex, fs = simplex[order], fs[order]
        trace.append((it, float(fs[0])))
        if fs[-1] - fs[0] < tol:
            converged = True
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + config.alpha * (centroid - simplex[-1])
        fr = f(xr)
        if fr < fs[0]:
            xe = centroid + config.gamma * (xr - centroid)
            fe = f(xe)
            simplex[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < fs[-2]:
            simplex[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = centroid + config.rho * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                simplex[-1], fs[-1] = xc, fc
                continue
        else:
            xc = centroid + config.rho * (simplex[-1] - centroid)
            fc = f(xc)
            if fc < fs[-1]:
                simplex[-1], fs[-1] = xc, fc
                continue
        simplex[1:] = simplex[0] + config.sigma * (simplex[1:] - simplex[0])
        fs[1:] = [f(x) for x in simplex[1:]]
    k = int(np.argmin(fs))
    return simplex[k], float(fs[k]), it, converged, trace


def _mirror(problem: OptimizationProblem, times: np.ndarray) -> np.ndarray:
    """Pick the representative with t_1 <= T* - t_N among the two mirror images."""
    if times.size and times[0] > problem.T_star - times[-1] + 1e-15:
        return np.sort(problem.T_star - times)
    return times


def optimize(problem: OptimizationProblem, config: NelderMeadConfig = NelderMeadConfig(), seed: int = 0):
    """Minimize the cost from the equally spaced guess (plus optional perturbed starts)."""
    if problem.N < 1:
        raise ValueError("optimization needs at least one pulse")
    t0 = problem.equally_spaced()
    u0 = problem.logits_from_times(t0)
    J0 = cost(problem, t0)
    f = lambda u: cost(problem, problem.times_from_logits(u))
    rng = np.random.default_rng(seed)
    best = None
    starts = []
    for k in range(max(1, config.n_starts)):
        simplex = None
        if k > 0:
            base = u0 + config.perturbation * rng.standard_normal(u0.size)
            simplex = np.vstack([base, base + config.step * np.eye(u0.size)])
        u, J, it, conv, trace = nelder_mead(f, u0, config, J0, simplex)
        starts.append((k, J, conv))
        if best is None or J < best[1]:
            best = (u, J, it, conv, trace)
    u, J, it, conv, trace = best
    times = problem.times_from_logits(u)
    if J > J0:  # the equally spaced guess is always a valid fallback
        times, J = t0, J0
    return OptimizationReport(_mirror(problem, times), J, J0, it, conv, trace, starts, problem.T_star)


def tls_opt(problem: OptimizationProblem, config: NelderMeadConfig = NelderMeadConfig(), seed: int = 0):
    """Optimized sequence with XY-8 axis cycling; returns (sequence, report)."""
    rep = optimize(problem, config, seed)
    seq = seqs.custom(rep.times, problem.T_star, axes=seqs.xy8_axes(problem.N), label="TLS-opt")
    return seq, rep


def _equal_xy(N: int, T: float) -> seqs.PulseSequence:
    if N == 8:
        return seqs.xy8(T)
    t = (np.arange(1, N + 1) - 0.5) * T / N
    return seqs.custom(t, T, axes=seqs.xy8_axes(N), label=f"XY-{N}")


def lifetime_for_shape(noise: OUNoiseParams, shape: seqs.PulseSequence, chi_target: float, pair=BELL):
    """Storage time T where chi of the schedule stretched to T equals ``chi_target``."""
    f = lambda T: chi_time_domain(noise, shape.scaled(T), pair) - chi_target
    lo, hi = 1e-6, 1.0
    while f(hi) < 0:
        lo, hi = hi, 2 * hi
        if hi > 1e7:
            return None
    return float(brentq(f, lo, hi, xtol=1e-12, rtol=1e-12))


CHI_AT_TAU_C = -np.log(TAU_C_THRESHOLD)  # = 1
CHI_AT_T0999 = -np.log(2 * FIDELITY_THRESHOLD - 1)


@dataclass(frozen=True)
class ProtocolSummary:
    protocol: str
    chi: float
    C: float
    F: float
    tau_C: float | None
    T_0999: float | None


def standard_protocols(N: int, T_star: float, tls_times=None) -> dict:
    """no-DD, CPMG-N, UDD-N, XY-8 and (if times are given) TLS-opt on [0, T*]."""
    out = {
        "no-DD": seqs.free_evolution(T_star),
        f"CPMG-{N}": seqs.cpmg(N, T_star),
        f"UDD-{N}": seqs.udd(N, T_star),
    }
    xy = _equal_xy(N, T_star)
    out[xy.label] = xy
    if tls_times is not None:
        out["TLS-opt"] = seqs.custom(tls_times, T_star, axes=seqs.xy8_axes(len(tls_times)), label="TLS-opt")
    return out


def compare_protocols(
    T_star: float,
    N: int,
    noise: OUNoiseParams,
    *,
    tls_times=None,
    pair: CoherencePair = BELL,
    config: NelderMeadConfig = NelderMeadConfig(),
    seed: int = 0,
) -> list[ProtocolSummary]:
    """chi, C, F at T* and lifetimes for each protocol, sorted by chi.

    Lifetimes stretch each schedule to the storage time in question; the
    TLS-opt schedule is optimized at T* unless ``tls_times`` is supplied.
    """
    if tls_times is None:
        tls_times = optimize(OptimizationProblem(N, T_star, noise, pair), config, seed).times
    rows = []
    for name, seq in standard_protocols(N, T_star, tls_times).items():
        x = chi_time_domain(noise, seq, pair)
        C, F = bell_concurrence_fidelity(x)
        shape = seq.scaled(1.0)
        if np.all(noise.sigma == 0):
            tc = tf = None
        else:
            tc = lifetime_for_shape(noise, shape, CHI_AT_TAU_C, pair)
            tf = lifetime_for_shape(noise, shape, CHI_AT_T0999, pair)
        rows.append(ProtocolSummary(name, float(x), float(C), float(F), tc, tf))
    return sorted(rows, key=lambda r: r.chi)
