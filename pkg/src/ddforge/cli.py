"""Command-line front end: ``ddforge <command> [--config PATH] [overrides]``.

Every command writes CSV/JSON into the output directory.  Failures print a
single ``ddforge: error=<kind> message="..."`` line on stderr and exit
with 2 (configuration) or 3 (numerical failure).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import filters as ff
from . import io
from . import optimize as opt
from . import pmme
from . import sequences as seqs
from . import swap as swp
from . import trajectories as traj
from .errors import ConfigError, NumericalError
from .metrics import bell_concurrence_fidelity
from .noise import OUNoiseParams

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class NotConverged(NumericalError):
    pass


def _tls_times(cfg, noise: OUNoiseParams):
    d, o = cfg.dd, cfg.optimizer
    problem = opt.OptimizationProblem(d.n_pulses, d.t_star_us, noise, backend=o.backend)
    nm = opt.NelderMeadConfig(step=o.step, max_iter=o.max_iter, n_starts=o.n_starts)
    return opt.optimize(problem, nm, seed=cfg.mc.seed)


def _protocols(cfg, noise: OUNoiseParams) -> dict:
    """Sequences on [0, T*] selected by dd.protocol ('all' = the standard set)."""
    d = cfg.dd
    N, T = d.n_pulses, d.t_star_us
    name = d.protocol
    tls = _tls_times(cfg, noise).times if name in ("all", "TLS-opt") else None
    table = opt.standard_protocols(N, T, tls)
    if name == "all":
        return table
    if name == "HW-cycle":
        return {"HW-cycle": seqs.heisenberg_weyl_cycle(T)}
    key = {"CPMG": f"CPMG-{N}", "UDD": f"UDD-{N}", "XY-8": "XY-8" if N == 8 else f"XY-{N}"}.get(name, name)
    return {key: table[key]}


def cmd_swap(cfg, out: Path) -> list[Path]:
    s = cfg.swap
    model = s.model()
    n = int(round(s.t_max_ns / s.dt_ns))
    times = np.linspace(0.0, s.t_max_ns, n + 1)
    res = swp.evolve_swap(model, swp.basis_state("10"), times)
    rows = zip(times, res.concurrence, res.fidelity, res.population(1), res.population(2), res.purity)
    return [io.write_csv(out / "fig1b.csv", ["t_ns", "C", "F", "P01", "P10", "purity"], rows)]


def cmd_decay(cfg, out: Path) -> list[Path]:
    d = cfg.decay
    n = cfg.noise
    times = np.linspace(0.0, d.t_max_us, d.n_times)
    rows = []
    for rho in d.rho_values:
        p = OUNoiseParams.from_khz(n.lam_khz, n.tau_c_us, rho)
        closed = ff.chi_closed_form_free(p, times)[1]
        quad = np.array([ff.chi_frequency_domain(p, seqs.free_evolution(t)) if t > 0 else 0.0 for t in times])
        C, F = bell_concurrence_fidelity(quad)
        g_eff = ff.gamma_inst(p, times)
        markov = np.exp(-2 * (1 - rho) * float(np.mean(p.gamma_phi)) * times)
        for row in zip(times, closed, quad, C, F, g_eff, markov):
            rows.append((rho,) + row)
    header = ["rho", "t_us", "chi_closed", "chi_quad", "C", "F", "gamma_eff_per_us", "C_markov"]
    return [io.write_csv(out / "fig2.csv", header, rows)]


def cmd_filters(cfg, out: Path) -> list[Path]:
    noise = cfg.noise.params()
    f = cfg.filters
    omega = np.linspace(0.0, f.omega_max_rad_per_us, f.n_omega)
    rows, summary = [], []
    for name, seq in _protocols(cfg, noise).items():
        F = ff.filter_matrix(seq, omega).real
        ov = ff.overlap_integrand(noise, seq)(omega)
        for k in range(omega.size):
            rows.append((name, omega[k], F[0, 0, k], F[1, 1, k], F[0, 1, k], ov[k]))
        summary.append((name, ff.chi_time_domain(noise, seq), ff.chi_frequency_domain(noise, seq)))
    header = ["protocol", "omega_rad_per_us", "F11_us2", "F22_us2", "F12_us2", "overlap_bell_us"]
    return [
        io.write_csv(out / "fig3.csv", header, rows),
        io.write_csv(out / "fig3_chi.csv", ["protocol", "chi_time", "chi_frequency"], summary),
    ]


def cmd_optimize(cfg, out: Path) -> list[Path]:
    noise = cfg.noise.params()
    d = cfg.dd
    rep = _tls_times(cfg, noise)
    seq = seqs.custom(rep.times, d.t_star_us, axes=seqs.xy8_axes(d.n_pulses), label="TLS-opt")
    files = [
        io.write_sequence(out / "tls_opt_sequence.json", seq),
        io.write_csv(out / "optimization_trace.csv", ["iteration", "J"], rep.trace),
    ]
    table = opt.compare_protocols(d.t_star_us, d.n_pulses, noise, tls_times=rep.times)
    files.append(io.write_csv(
        out / "protocol_comparison.csv",
        ["protocol", "chi", "C", "F", "tau_C_us", "T_0999_us"],
        [(r.protocol, r.chi, r.C, r.F, r.tau_C, r.T_0999) for r in table],
    ))
    if d.n_pulses == 8:
        ref = opt.PUBLISHED_TIMES_N8
        t = rep.normalized_times
        files.append(io.write_csv(
            out / "optimized_vs_reference.csv",
            ["k", "t_opt_over_T", "t_ref_over_T", "deviation"],
            [(k + 1, t[k], ref[k], t[k] - ref[k]) for k in range(8)],
        ))
    if not rep.converged:
        raise NotConverged(f"Nelder-Mead stopped after {rep.iterations} iterations without converging")
    return files


def cmd_robustness(cfg, out: Path) -> list[Path]:
    noise = cfg.noise.params()
    m = cfg.mc
    shapes = {k: v.scaled(1.0) for k, v in _protocols(cfg, noise).items()}
    rows = traj.robustness_sweep(
        noise, shapes, m.sigma_eps, tau_p=m.tau_p_ns, n_traj=m.n_traj, seed=m.seed,
        n_grid=m.n_grid, per_sequence=m.per_sequence,
    )
    return [io.write_csv(
        out / "fig4c.csv",
        ["sigma_eps", "protocol", "tau_C_us", "stderr_us"],
        [(r.sigma_eps, r.protocol, r.tau_C, r.stderr) for r in rows],
    )]


def cmd_pmme(cfg, out: Path) -> list[Path]:
    noise = cfg.noise.params()
    p = cfg.pmme
    L = pmme.DephasingLindbladian.from_noise(noise)
    k = pmme.MemoryKernel(noise.tau_c)
    vol = pmme.pmme_evolve_volterra(L, k, traj.bell_state(), p.dt_us, p.t_max_us)
    ana = pmme.pmme_evolve_analytic(L, k, traj.bell_state(), vol.times)
    chi_a, _ = pmme.chi_pm(ana)
    chi_v, rate = pmme.chi_pm(vol)
    n = min(chi_a.times.size, chi_v.times.size)
    t = vol.times[:n]
    chi_ff = ff.chi_closed_form_free(noise, t)[1]
    gamma_bell = 2 * (1 - noise.rho) * float(np.mean(noise.gamma_phi))
    rows = zip(t, chi_ff, chi_a.chi[:n], chi_v.chi[:n], rate[:n], gamma_bell * t)
    header = ["t_us", "chi_filter", "chi_pm_analytic", "chi_pm_volterra", "chi_pm_rate_per_us", "chi_markov"]
    files = [io.write_csv(out / "pmme.csv", header, rows)]
    markov = []
    for factor in p.markov_factors:
        q = noise.scaled(tau_c=noise.tau_c / factor)
        Lq = pmme.DephasingLindbladian.from_noise(q)
        tr = pmme.pmme_evolve_analytic(Lq, pmme.MemoryKernel(q.tau_c), traj.bell_state(), t)
        c, _ = pmme.chi_pm(tr)
        resid = np.max(np.abs(c.chi - gamma_bell * c.times))
        markov.append((factor, q.tau_c, resid))
    files.append(io.write_csv(out / "pmme_markov.csv", ["tau_c_divisor", "tau_c_us", "max_residual"], markov))
    drift = np.max(np.abs(np.trace(vol.states, axis1=1, axis2=2).real - 1.0))
    report = {
        "max_abs_element_diff": float(np.max(np.abs(ana.states - vol.states))),
        "trace_drift": float(drift),
        "min_eigenvalue_volterra": vol.min_eigenvalue,
        "min_eigenvalue_analytic": ana.min_eigenvalue,
        "markov_residuals": {f"{f:g}": r for f, _, r in markov},
    }
    files.append(io.write_json(out / "pmme_report.json", report))
    return files


COMMANDS = {
    "swap": cmd_swap,
    "decay": cmd_decay,
    "filters": cmd_filters,
    "optimize": cmd_optimize,
    "robustness": cmd_robustness,
    "pmme": cmd_pmme,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ddforge", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="JSON config file (defaults apply to missing keys)")
    ap.add_argument("--out", type=Path, help="output directory")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--n-traj", type=int)
    ap.add_argument("--protocol", choices=cfgmod.PROTOCOLS)
    ap.add_argument("--n-pulses", type=int)
    ap.add_argument("--t-star-us", type=float)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def resolve_config(args) -> cfgmod.ExperimentConfig:
    cfg = cfgmod.load(args.config) if args.config else cfgmod.ExperimentConfig()
    over = {
        ("mc", "seed"): args.seed,
        ("mc", "n_traj"): args.n_traj,
        ("dd", "protocol"): args.protocol,
        ("dd", "n_pulses"): args.n_pulses,
        ("dd", "t_star_us"): args.t_star_us,
    }
    for (sec, key), val in over.items():
        if val is not None:
            setattr(cfg, sec, dataclasses.replace(getattr(cfg, sec), **{key: val}))
    if args.out is not None:
        cfg.out_dir = str(args.out)
    return cfg.validate()


def _fail(kind: str, exc: Exception, code: int) -> int:
    msg = " ".join(str(exc).split()).replace('"', "'")
    print(f'ddforge: error={kind} type={type(exc).__name__} message="{msg}"', file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except (ConfigError, ValueError) as exc:
        return _fail("config", exc, EXIT_CONFIG)
    out = Path(cfg.out_dir)
    try:
        files = COMMANDS[args.command](cfg, out)
    except NumericalError as exc:
        return _fail("numerical", exc, EXIT_NUMERICAL)
    except (ConfigError, ValueError) as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except FloatingPointError as exc:
        return _fail("numerical", exc, EXIT_NUMERICAL)
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
