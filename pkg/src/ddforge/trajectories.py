"""Monte-Carlo ensembles over sampled OU noise paths.

Each trajectory carries one 2x2 unitary per qubit.  Between pulses the
qubit picks up the phase lam_i/sigma_i * int xi_i dt (lam = sqrt(2) sigma);
the OU value and its time integral are drawn jointly from the exact
Gaussian transition, so free segments need no sub-stepping for accuracy.
Pulses are either instantaneous rotations or square windows of length
tau_p during which the drive and the noise act together.

Trajectories are processed in fixed-size chunks with spawned seeds, so
results do not depend on the number of worker threads (DDFORGE_THREADS).
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .metrics import PSI_PLUS, bell_fidelity, concurrence_general
from .noise import OUNoiseParams, integrated_step_factor
from .sequences import PulseSequence

CHUNK = 1000
_BLOCK = 256  # free steps drawn and filtered together
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI = {"X": _SX, "Y": _SY}


@dataclass(frozen=True)
class PulseErrorModel:
    tau_p: float = 0.0  # ns
    sigma_eps: float = 0.0
    per_sequence: bool = False  # one epsilon per qubit per trajectory instead of per pulse
    frozen_noise: bool = False  # hold xi fixed across each pulse window
    substeps: int = 10

    def __post_init__(self):
        if self.tau_p < 0 or self.sigma_eps < 0:
            raise ValueError("tau_p and sigma_eps must be non-negative")
        if self.sigma_eps > 0.2:
            warnings.warn(f"sigma_eps={self.sigma_eps} is outside the small-error regime", stacklevel=2)

    @property
    def tau_p_us(self) -> float:
        return self.tau_p * 1e-3

    @property
    def is_ideal(self) -> bool:
        return self.tau_p == 0 and self.sigma_eps == 0


@dataclass
class EnsembleResult:
    times: np.ndarray
    mean_state: np.ndarray  # (n_t, 4, 4)
    n_traj: int
    concurrence: np.ndarray
    fidelity: np.ndarray
    concurrence_se: np.ndarray
    fidelity_se: np.ndarray
    trajectory_states: np.ndarray | None = None  # (n_traj, n_t, 4, 4)

    @property
    def coherence(self) -> np.ndarray:
        return self.mean_state[:, 1, 2]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("DDFORGE_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class _Plan:
    edges: np.ndarray  # step boundaries
    window: np.ndarray  # (n_steps, 2) pulse index active in step, -1 if free
    instants: dict  # boundary index -> list of (qubit, pulse index)
    sample_idx: np.ndarray  # boundary index of each sample time
    axes: tuple  # per qubit tuple of axis names


def _plan(seq: PulseSequence, times, tau_p: float, substeps: int, max_dt: float | None) -> _Plan:
    T = seq.total_time
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(times > T * (1 + 1e-12)):
        raise ValueError("sample times must lie in [0, T]")
    pts = [np.array([0.0, T]), times]
    windows = []
    for q in (0, 1):
        t = seq.times(q)
        if tau_p > 0 and t.size:
            lo, hi = t - tau_p / 2, t + tau_p / 2
            if lo[0] < 0 or hi[-1] > T or np.any(np.diff(t) <= tau_p):
                raise ValueError(f"pulse windows of {tau_p} us overlap or leave [0, T] on qubit {q}")
            for a, b in zip(lo, hi):
                pts.append(np.linspace(a, b, substeps + 1))
            windows.append((lo, hi))
        else:
            pts.append(t)
            windows.append((None, None))
    edges = np.unique(np.concatenate(pts))
    if max_dt is not None:
        refined = [edges[:1]]
        for a, b in zip(edges[:-1], edges[1:]):
            n = int(np.ceil((b - a) / max_dt - 1e-9))
            refined.append(np.linspace(a, b, max(n, 1) + 1)[1:])
        edges = np.concatenate(refined)
    mid = 0.5 * (edges[:-1] + edges[1:])
    window = -np.ones((mid.size, 2), dtype=int)
    instants: dict[int, list] = {}
    for q in (0, 1):
        lo, hi = windows[q]
        if lo is not None:
            k = np.searchsorted(lo, mid, side="right") - 1
            inside = (k >= 0) & (mid < hi[np.clip(k, 0, None)])
            window[inside, q] = k[inside]
        else:
            for p, t in enumerate(seq.times(q)):
                j = int(np.argmin(np.abs(edges - t)))
                instants.setdefault(j, []).append((q, p))
    sample_idx = np.array([int(np.argmin(np.abs(edges - t))) for t in times], dtype=int)
    return _Plan(edges, window, instants, sample_idx, (seq.axes(0), seq.axes(1)))


def _rotation(theta, phi, axis: str) -> np.ndarray:
    """exp(-i/2 (theta Z + phi A)) for A = X or Y, vectorized over trajectories."""
    theta = np.asarray(theta, dtype=float)
    phi = np.broadcast_to(np.asarray(phi, dtype=float), theta.shape)
    half = 0.5 * np.hypot(theta, phi)
    c = np.cos(half)
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(half > 0, np.sin(half) / np.where(half > 0, half, 1.0), 1.0)
    az, aa = 0.5 * theta * k, 0.5 * phi * k
    M = np.empty(theta.shape + (2, 2), dtype=complex)
    M[..., 0, 0] = c - 1j * az
    M[..., 1, 1] = c + 1j * az
    if axis == "X":
        M[..., 0, 1] = -1j * aa
        M[..., 1, 0] = -1j * aa
    else:
        M[..., 0, 1] = -aa
        M[..., 1, 0] = aa
    return M


def _chunk(params, plan: _Plan, err: PulseErrorModel | None, n: int, ss: np.random.SeedSequence):
    rng = np.random.default_rng(ss)
    sig = np.asarray(params.sigma)
    Lmix = params.mixing()
    phase_scale = np.sqrt(2.0) * sig  # lam_i, applied to the unit-variance mix
    n_p = max(len(a) for a in plan.axes) if any(plan.axes) else 0
    if err is not None and n_p:
        shape = (n, 2, 1) if err.per_sequence else (n, 2, n_p)
        eps = err.sigma_eps * rng.standard_normal(shape)
        eps = np.broadcast_to(eps, (n, 2, n_p))
    else:
        eps = np.zeros((n, 2, n_p))
    tau_p = err.tau_p_us if err is not None else 0.0
    u = rng.standard_normal((2, n))
    U = np.zeros((2, n, 2, 2), dtype=complex)
    U[:, :, 0, 0] = U[:, :, 1, 1] = 1.0
    out = np.empty((2, n, plan.sample_idx.size, 2, 2), dtype=complex)
    samples_at: dict[int, list[int]] = {}
    for s, j in enumerate(plan.sample_idx):
        samples_at.setdefault(int(j), []).append(s)
    cache: dict[float, tuple] = {}
    edges = plan.edges
    acc = np.zeros((2, n))  # unmixed integral of the OU pair not yet folded into U
    free = (plan.window < 0).all(axis=1)
    stops = set(plan.instants) | set(samples_at)
    n_steps = edges.size - 1
    steps = np.diff(edges)

    def flush():
        theta = phase_scale[:, None] * (Lmix @ acc)
        ph = np.exp(-0.5j * theta)
        U[:, :, 0, :] *= ph[..., None]
        U[:, :, 1, :] *= np.conj(ph)[..., None]
        acc[:] = 0.0

    def factors(h):
        key = round(h, 15)
        if key not in cache:
            cache[key] = integrated_step_factor(h, params.tau_c)
        return cache[key]

    j = 0
    while True:
        pending = plan.instants.get(j, ())
        if pending or j in samples_at:
            flush()
        for q, p in pending:
            angle = np.pi * (1.0 + eps[:, q, p])
            U[q] = _rotation(np.zeros(n), angle, plan.axes[q][p]) @ U[q]
        for s in samples_at.get(j, ()):
            out[:, :, s] = U
        if j == n_steps:
            break
        h = steps[j]
        if h <= 0:
            j += 1
            continue
        decay, lever, chol = factors(h)
        if free[j]:
            k = j + 1
            while (k < n_steps and k - j < _BLOCK and free[k] and k not in stops
                   and abs(steps[k] - h) <= 1e-9 * h):
                k += 1
            m = k - j
            z = rng.standard_normal((m, 2, 2, n))
            path = lfilter([chol[0, 0]], [1.0, -decay], z[:, :, 0], axis=0, zi=(decay * u)[None])[0]
            prev = path[:-1].sum(axis=0) + u
            acc += lever * prev + chol[1, 0] * z[:, :, 0].sum(axis=0) + chol[1, 1] * z[:, :, 1].sum(axis=0)
            u = path[-1]
            j = k
            continue
        # a pulse window is active on at least one qubit
        flush()
        z = rng.standard_normal((2, 2, n))
        integ = lever * u + chol[1, 0] * z[:, 0] + chol[1, 1] * z[:, 1]
        u_old = u
        u = decay * u + chol[0, 0] * z[:, 0]
        theta = phase_scale[:, None] * (Lmix @ integ)
        for q in (0, 1):
            p = plan.window[j, q]
            if p < 0:
                ph = np.exp(-0.5j * theta[q])
                U[q, :, 0, :] *= ph[:, None]
                U[q, :, 1, :] *= np.conj(ph)[:, None]
                continue
            th = theta[q]
            if err.frozen_noise:
                th = phase_scale[q] * (Lmix @ u_old)[q] * h
            phi = np.pi * (1.0 + eps[:, q, p]) * h / tau_p
            U[q] = _rotation(th, phi, plan.axes[q][p]) @ U[q]
        j += 1
    return out


def _states(U1, U2, rho0) -> np.ndarray:
    U = np.einsum("...ab,...cd->...acbd", U1, U2).reshape(U1.shape[:-2] + (4, 4))
    return U @ rho0 @ np.conj(np.swapaxes(U, -1, -2))


def _simulate(params, seq, rho0, n_traj, seed, times, err, max_dt):
    if n_traj < 1:
        raise ValueError("n_traj must be positive")
    tau_p = err.tau_p_us if err is not None else 0.0
    substeps = err.substeps if err is not None else 1
    plan = _plan(seq, times, tau_p, substeps, max_dt)
    sizes = [CHUNK] * (n_traj // CHUNK) + ([n_traj % CHUNK] if n_traj % CHUNK else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, children))
    run = lambda job: _chunk(params, plan, err, job[0], job[1])
    workers = _workers()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    U = np.concatenate(parts, axis=1)
    return _states(U[0], U[1], np.asarray(rho0, dtype=complex))


def _result(times, states, n_boot, seed, per_trajectory, keep):
    res = EnsembleResult(
        times=np.asarray(times, dtype=float),
        mean_state=states.mean(axis=0),
        n_traj=states.shape[0],
        concurrence=np.empty(0),
        fidelity=np.empty(0),
        concurrence_se=np.empty(0),
        fidelity_se=np.empty(0),
        trajectory_states=states,
    )
    C, F, cse, fse = extract_traces(res, n_boot=n_boot, seed=seed, per_trajectory=per_trajectory)
    res.concurrence, res.fidelity, res.concurrence_se, res.fidelity_se = C, F, cse, fse
    if not keep:
        res.trajectory_states = None
    return res


def _default_times(seq):
    return np.linspace(0.0, seq.total_time, 21)


def run_ideal(
    params: OUNoiseParams,
    seq: PulseSequence,
    rho0,
    n_traj: int,
    seed,
    *,
    times=None,
    max_dt: float | None = None,
    n_boot: int = 200,
    per_trajectory: bool = False,
    keep_trajectories: bool = True,
) -> EnsembleResult:
    """Ensemble with instantaneous, exact pi pulses.

    The OU transition is exact, so by default each interval between pulses
    and sample times is one step.  Pass ``max_dt`` (e.g. tau_c/200) to walk
    a fine grid instead; the law of the result is the same.
    """
    times = _default_times(seq) if times is None else np.asarray(times, dtype=float)
    states = _simulate(params, seq, rho0, n_traj, seed, times, None, max_dt)
    return _result(times, states, n_boot, seed, per_trajectory, keep_trajectories)


def run_with_errors(
    params: OUNoiseParams,
    seq: PulseSequence,
    err: PulseErrorModel,
    rho0,
    n_traj: int,
    seed,
    *,
    times=None,
    max_dt: float | None = None,
    n_boot: int = 200,
    per_trajectory: bool = False,
    keep_trajectories: bool = True,
) -> EnsembleResult:
    """Ensemble with square pulses of length tau_p and angle (1 + eps) pi.

    ``max_dt=None`` steps free segments in one exact update; pulse windows
    are always cut into ``err.substeps`` pieces.
    """
    times = _default_times(seq) if times is None else np.asarray(times, dtype=float)
    states = _simulate(params, seq, rho0, n_traj, seed, times, err, max_dt)
    return _result(times, states, n_boot, seed, per_trajectory, keep_trajectories)


def extract_traces(result: EnsembleResult, *, n_boot: int = 200, seed=0, per_trajectory: bool = False):
    """Concurrence and Bell fidelity with bootstrap standard errors.

    By default concurrence is taken on the ensemble-averaged state; with
    ``per_trajectory`` it is averaged over trajectories instead.
    """
    st = result.trajectory_states
    C = _concurrence(result.mean_state, st, per_trajectory)
    F = bell_fidelity(result.mean_state, PSI_PLUS)
    if st is None or n_boot <= 0:
        z = np.zeros_like(C)
        return C, F, z, z
    n = st.shape[0]
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    w = rng.multinomial(n, np.full(n, 1.0 / n), size=n_boot) / n
    flat = st.reshape(n, -1)
    boot = (w @ flat).reshape((n_boot,) + st.shape[1:])
    if per_trajectory:
        ct = concurrence_general(st, tol=1e-7)
        cb = w @ ct
    else:
        cb = concurrence_general(_herm(boot), tol=1e-7)
    fb = bell_fidelity(boot, PSI_PLUS)
    return C, F, cb.std(axis=0, ddof=1), fb.std(axis=0, ddof=1)


def _herm(m):
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def _concurrence(mean_state, st, per_trajectory):
    if per_trajectory:
        if st is None:
            raise ValueError("per-trajectory concurrence needs stored trajectories")
        return concurrence_general(st, tol=1e-7).mean(axis=0)
    return concurrence_general(_herm(mean_state), tol=1e-7)


def bell_state() -> np.ndarray:
    return np.outer(PSI_PLUS, PSI_PLUS.conj())


@dataclass(frozen=True)
class RobustnessRow:
    sigma_eps: float
    protocol: str
    tau_C: float  # us, NaN if no crossing inside the grid
    stderr: float


def analytic_tau_c(params: OUNoiseParams, shape: PulseSequence, bracket=(1e-3, 1e4)) -> float:
    """Storage time at which the ideal-pulse Bell concurrence e^-chi reaches 1/e."""
    from scipy.optimize import brentq

    from .filters import chi_time_domain

    f = lambda T: chi_time_domain(params, shape.scaled(T)) - 1.0
    return float(brentq(f, *bracket, xtol=1e-10, rtol=1e-12))


def mc_tau_c(
    params: OUNoiseParams,
    shape: PulseSequence,
    err: PulseErrorModel,
    storage_times,
    n_traj: int,
    seed: int,
    *,
    n_boot: int = 200,
):
    """tau_C from C(T) sampled at the end of the schedule scaled to each storage time.

    Every grid point T_k reuses the seed (seed, k), so runs that differ only
    in sigma_eps or in the pulse schedule share noise realizations and
    pulse-error draws.  Returns (tau_C, bootstrap standard error, C(T)).
    """
    from .metrics import TAU_C_THRESHOLD, first_crossing

    grid = np.asarray(storage_times, dtype=float)
    C = np.empty(grid.size)
    Cb = np.empty((n_boot, grid.size))
    for k, T in enumerate(grid):
        seq = shape.scaled(T)
        st = _simulate(params, seq, bell_state(), n_traj, [seed, k], np.array([T]), err, None)[:, 0]
        C[k] = concurrence_general(_herm(st.mean(axis=0)), tol=1e-7)
        rng = np.random.default_rng([seed, k, 1])
        w = rng.multinomial(n_traj, np.full(n_traj, 1.0 / n_traj), size=n_boot) / n_traj
        boot = (w @ st.reshape(n_traj, 16)).reshape(n_boot, 4, 4)
        Cb[:, k] = concurrence_general(_herm(boot), tol=1e-7)
    tau = first_crossing(grid, C, TAU_C_THRESHOLD)
    taus = [first_crossing(grid, c, TAU_C_THRESHOLD) for c in Cb]
    taus = np.array([t for t in taus if t is not None and t > grid[0]])
    if tau is None or tau <= grid[0]:
        return float("nan"), float("nan"), C
    se = float(taus.std(ddof=1)) if taus.size > 1 else float("nan")
    return float(tau), se, C


def robustness_sweep(
    params: OUNoiseParams,
    shapes: dict,
    sigma_eps_values,
    *,
    tau_p: float = 10.0,
    n_traj: int = 2000,
    seed: int = 0,
    n_grid: int = 10,
    span=(0.7, 1.15),
    per_sequence: bool = False,
) -> list[RobustnessRow]:
    """Monte-Carlo tau_C for each protocol shape (schedule on [0, 1]) and each sigma_eps.

    The storage-time grid for a protocol is centred on its ideal analytic
    tau_C and shared across all sigma_eps values.
    """
    rows = []
    for name, shape in shapes.items():
        tau0 = analytic_tau_c(params, shape)
        grid = tau0 * np.linspace(span[0], span[1], n_grid)
        for sig in sigma_eps_values:
            err = PulseErrorModel(tau_p=tau_p, sigma_eps=float(sig), per_sequence=per_sequence)
            tau, se, _ = mc_tau_c(params, shape, err, grid, n_traj, seed)
            rows.append(RobustnessRow(float(sig), name, tau, se))
    return rows
