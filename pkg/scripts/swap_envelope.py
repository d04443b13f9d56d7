"""Envelope time of the swap oscillation for the dephasing conventions in use.

With collapse operators sqrt(gamma) Z_i the one-excitation coherence decays
at 4 gamma, so 1/gamma = 1 us is not the envelope time of the oscillation.
"""
import numpy as np

from ddforge import swap as W

t = np.linspace(0, 3000, 6001)
for label, gamma in (("sqrt(gamma) Z", 0.001), ("sqrt(gamma/2) Z", 0.0005), ("sqrt(gamma/4) Z", 0.00025)):
    m = W.SwapModel(gamma=gamma)
    fit = W.fit_oscillation(t, W.evolve_swap(m, W.basis_state("10"), t).population(2))
    print(f"{label:<16} envelope {fit['tau_env']:7.1f} ns  secular {1 / W.envelope_rate_secular(m):7.1f} ns  "
          f"Omega {fit['omega']:.5f} rad/ns")
