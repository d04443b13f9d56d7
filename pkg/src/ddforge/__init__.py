"""Dephasing of two qubits under correlated OU noise, with dynamical decoupling."""
from .errors import ConfigError, DDForgeError, NumericalError
from .filters import BELL, SINGLE_QUBIT, CoherencePair, chi, chi_frequency_domain, chi_time_domain
from .noise import OUNoiseParams
from .sequences import PulseSequence, cpmg, free_evolution, udd, xy8

__all__ = [
    "BELL",
    "SINGLE_QUBIT",
    "CoherencePair",
    "ConfigError",
    "DDForgeError",
    "NumericalError",
    "OUNoiseParams",
    "PulseSequence",
    "chi",
    "chi_frequency_domain",
    "chi_time_domain",
    "cpmg",
    "free_evolution",
    "udd",
    "xy8",
]
__version__ = "0.1.0"
