"""Experiment configuration: one JSON file with a flat section per module.

Defaults reproduce the two-fluxonium / TLS parameter set (lam/2pi = 80 kHz,
tau_c = 0.5 us, rho = 0.8, T* = 1 us, N = 8; swap f = 0.60/0.62 GHz,
J = 0.02 GHz, gamma = 0.001/ns).
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .noise import OUNoiseParams
from .swap import SwapModel

PROTOCOLS = ("all", "no-DD", "CPMG", "UDD", "XY-8", "TLS-opt", "HW-cycle")


@dataclass
class NoiseSection:
    lam_khz: float = 80.0  # lam / 2pi
    tau_c_us: float = 0.5
    rho: float = 0.8

    def params(self) -> OUNoiseParams:
        return OUNoiseParams.from_khz(self.lam_khz, self.tau_c_us, self.rho)


@dataclass
class SwapSection:
    f1_ghz: float = 0.60
    f2_ghz: float = 0.62
    J_ghz: float = 0.02
    gamma_per_ns: float = 0.001
    coupling: str = "angular"
    frame: str = "lab"
    t_max_ns: float = 200.0
    dt_ns: float = 0.1

    def model(self) -> SwapModel:
        return SwapModel(self.f1_ghz, self.f2_ghz, self.J_ghz, self.gamma_per_ns, self.coupling, self.frame)


@dataclass
class DDSection:
    protocol: str = "all"
    n_pulses: int = 8
    t_star_us: float = 1.0


@dataclass
class MCSection:
    n_traj: int = 2000
    seed: int = 0
    tau_p_ns: float = 10.0
    sigma_eps: list = field(default_factory=lambda: [0.0, 0.01, 0.02, 0.05])
    per_sequence: bool = False
    n_grid: int = 10


@dataclass
class DecaySection:
    rho_values: list = field(default_factory=lambda: [0.0, 0.4, 0.8, 1.0])
    t_max_us: float = 5.0
    n_times: int = 101


@dataclass
class FiltersSection:
    omega_max_rad_per_us: float = 200.0
    n_omega: int = 2001


@dataclass
class OptimizerSection:
    n_starts: int = 1
    max_iter: int = 2000
    step: float = 0.05
    backend: str = "time"


@dataclass
class PMMESection:
    t_max_us: float = 5.0
    dt_us: float = 0.005
    markov_factors: list = field(default_factory=lambda: [1.0, 10.0, 100.0])


@dataclass
class ExperimentConfig:
    noise: NoiseSection = field(default_factory=NoiseSection)
    swap: SwapSection = field(default_factory=SwapSection)
    dd: DDSection = field(default_factory=DDSection)
    mc: MCSection = field(default_factory=MCSection)
    decay: DecaySection = field(default_factory=DecaySection)
    filters: FiltersSection = field(default_factory=FiltersSection)
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)
    pmme: PMMESection = field(default_factory=PMMESection)
    out_dir: str = "out"

    def validate(self) -> "ExperimentConfig":
        """Build every physics object once so bad values fail before any run."""
        try:
            self.noise.params()
            self.swap.model()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        d, m = self.dd, self.mc
        checks = [
            (d.protocol in PROTOCOLS, f"dd.protocol must be one of {PROTOCOLS}"),
            (d.n_pulses >= 1, "dd.n_pulses must be >= 1"),
            (d.t_star_us > 0, "dd.t_star_us must be positive"),
            (m.n_traj >= 100, "mc.n_traj must be >= 100"),
            (0 <= m.seed < 2**64, "mc.seed must be an unsigned 64-bit integer"),
            (m.tau_p_ns >= 0, "mc.tau_p_ns must be non-negative"),
            (all(s >= 0 for s in m.sigma_eps), "mc.sigma_eps values must be non-negative"),
            (m.n_grid >= 4, "mc.n_grid must be >= 4"),
            (all(-1 <= r <= 1 for r in self.decay.rho_values), "decay.rho_values must lie in [-1, 1]"),
            (self.decay.t_max_us > 0 and self.decay.n_times >= 2, "decay grid is empty"),
            (self.filters.omega_max_rad_per_us > 0 and self.filters.n_omega >= 2, "filters grid is empty"),
            (self.optimizer.n_starts >= 1 and self.optimizer.max_iter >= 1, "optimizer limits must be positive"),
            (self.optimizer.backend in ("time", "frequency"), "optimizer.backend must be 'time' or 'frequency'"),
            (self.pmme.t_max_us > 0 and 0 < self.pmme.dt_us < self.pmme.t_max_us, "pmme grid is invalid"),
            (all(f > 0 for f in self.pmme.markov_factors), "pmme.markov_factors must be positive"),
            (self.swap.t_max_ns > 0 and 0 < self.swap.dt_ns < self.swap.t_max_ns, "swap grid is invalid"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_SECTIONS = {f.name: f for f in dataclasses.fields(ExperimentConfig) if f.name != "out_dir"}


def _coerce(cls, name: str, raw: dict):
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be an object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {name}: {sorted(unknown)}")
    default = cls()
    values = {}
    for key, val in raw.items():
        ref = getattr(default, key)
        try:
            if isinstance(ref, bool):
                if not isinstance(val, bool):
                    raise TypeError
                values[key] = val
            elif isinstance(ref, int):
                if isinstance(val, float) and val.is_integer():
                    val = int(val)
                if isinstance(val, bool) or not isinstance(val, int):
                    raise TypeError
                values[key] = val
            elif isinstance(ref, float):
                if isinstance(val, bool):
                    raise TypeError
                values[key] = float(val)
            elif isinstance(ref, list):
                values[key] = [float(v) for v in val]
            else:
                values[key] = str(val)
        except (TypeError, ValueError):
            raise ConfigError(f"{name}.{key} has invalid value {val!r}") from None
    return cls(**values)


def from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(data) - set(_SECTIONS) - {"out_dir"}
    if unknown:
        raise ConfigError(f"unknown section(s): {sorted(unknown)}")
    kwargs = {name: _coerce(f.default_factory().__class__, name, data[name]) for name, f in _SECTIONS.items() if name in data}
    if "out_dir" in data:
        kwargs["out_dir"] = str(data["out_dir"])
    return ExperimentConfig(**kwargs)


def load(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc.msg} at line {exc.lineno}") from None
    return from_dict(data)
