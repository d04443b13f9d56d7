"""Pi-pulse sequences on two qubits and the standard DD families."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

AXES = ("X", "Y")
XY8_PATTERN = ("X", "Y", "X", "Y", "Y", "X", "Y", "X")


@dataclass(frozen=True)
class PulseEvent:
    time: float
    axis: str = "X"
    nominal_angle: float = np.pi

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        object.__setattr__(self, "time", float(self.time))


@dataclass(frozen=True)
class PulseSequence:
    total_time: float
    qubits: tuple[tuple[PulseEvent, ...], tuple[PulseEvent, ...]]
    label: str = "custom"

    def __post_init__(self):
        if not (self.total_time > 0 and np.isfinite(self.total_time)):
            raise ValueError(f"total time must be positive, got {self.total_time}")
        qubits = tuple(tuple(q) for q in self.qubits)
        if len(qubits) != 2:
            raise ValueError("a sequence needs event lists for exactly two qubits")
        for q, events in enumerate(qubits):
            times = [e.time for e in events]
            if any(not (0.0 < t < self.total_time) for t in times):
                raise ValueError(f"qubit {q}: pulse times must lie in (0, T={self.total_time})")
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValueError(f"qubit {q}: pulse times must be strictly increasing")
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "total_time", float(self.total_time))

    def times(self, qubit: int = 0) -> np.ndarray:
        return np.array([e.time for e in self.qubits[qubit]], dtype=float)

    def axes(self, qubit: int = 0) -> tuple[str, ...]:
        return tuple(e.axis for e in self.qubits[qubit])

    @property
    def n_pulses(self) -> int:
        return max(len(q) for q in self.qubits)

    @property
    def identical_timing(self) -> bool:
        return np.array_equal(self.times(0), self.times(1))

    def normalized_times(self, qubit: int = 0) -> np.ndarray:
        return self.times(qubit) / self.total_time

    def scaled(self, total_time: float) -> "PulseSequence":
        """Same normalized schedule stretched to a new storage time."""
        f = total_time / self.total_time
        qubits = tuple(tuple(replace(e, time=e.time * f) for e in q) for q in self.qubits)
        return PulseSequence(total_time, qubits, self.label)

    def truncated(self, t: float) -> "PulseSequence":
        """Pulses applied before ``t``, observed at ``t``."""
        qubits = tuple(tuple(e for e in q if e.time < t) for q in self.qubits)
        return PulseSequence(t, qubits, self.label)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "T_us": self.total_time,
            "qubits": [[{"t_us": e.time, "axis": e.axis} for e in q] for q in self.qubits],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PulseSequence":
        qubits = tuple(
            tuple(PulseEvent(ev["t_us"], ev.get("axis", "X")) for ev in q) for q in data["qubits"]
        )
        return cls(float(data["T_us"]), qubits, data.get("label", "custom"))


def _both(times: Iterable[float], axes: Sequence[str], T: float, label: str) -> PulseSequence:
    events = tuple(PulseEvent(t, a) for t, a in zip(times, axes))
    return PulseSequence(T, (events, events), label)


def free_evolution(T: float) -> PulseSequence:
    return PulseSequence(T, ((), ()), "no-DD")


def cpmg(N: int, T: float) -> PulseSequence:
    """Equally spaced X pulses at (k - 1/2) T / N."""
    if N < 1:
        raise ValueError("CPMG needs N >= 1; use free_evolution for N = 0")
    times = (np.arange(1, N + 1) - 0.5) * T / N
    return _both(times, ["X"] * N, T, f"CPMG-{N}")


def udd(N: int, T: float) -> PulseSequence:
    """Uhrig timing t_j = T sin^2(j pi / (2N + 2))."""
    if N < 1:
        raise ValueError("UDD needs N >= 1")
    j = np.arange(1, N + 1)
    times = T * np.sin(j * np.pi / (2 * N + 2)) ** 2
    return _both(times, ["X"] * N, T, f"UDD-{N}")


def xy8(T: float, repetitions: int = 1) -> PulseSequence:
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    n = 8 * repetitions
    times = (np.arange(1, n + 1) - 0.5) * T / n
    label = "XY-8" if repetitions == 1 else f"XY-8x{repetitions}"
    return _both(times, XY8_PATTERN * repetitions, T, label)


def heisenberg_weyl_cycle(T: float) -> PulseSequence:
    """Symmetrized two-qubit cycle with zero net modulation on each qubit.

    Each qubit receives pi pulses at T/4 and 3T/4, so y_i is +1, -1, +1 on
    the three windows and integrates to zero.  Axes are mirrored between
    the qubits (X,Y on the first, Y,X on the second).
    """
    t = (0.25 * T, 0.75 * T)
    q0 = (PulseEvent(t[0], "X"), PulseEvent(t[1], "Y"))
    q1 = (PulseEvent(t[0], "Y"), PulseEvent(t[1], "X"))
    return PulseSequence(T, (q0, q1), "HW-cycle")


def custom(times, T: float, axes=None, label: str = "custom") -> PulseSequence:
    """Sequence from explicit pulse times.

    ``times`` is either one 1-D array (same schedule on both qubits) or a
    pair of arrays, one per qubit.  ``axes`` defaults to X everywhere.
    """
    arr = times
    per_qubit = (
        isinstance(arr, (list, tuple))
        and len(arr) == 2
        and all(np.ndim(a) == 1 for a in arr)
    )
    if not per_qubit:
        arr = (np.asarray(times, dtype=float),) * 2
    if axes is None:
        axes = tuple(("X",) * len(a) for a in arr)
    elif len(axes) != 2 or isinstance(axes[0], str):
        axes = (tuple(axes), tuple(axes))
    qubits = []
    for ts, ax in zip(arr, axes):
        ts = np.asarray(ts, dtype=float)
        if len(ax) != len(ts):
            raise ValueError("axes and times differ in length")
        qubits.append(tuple(PulseEvent(t, a) for t, a in zip(ts, ax)))
    return PulseSequence(T, tuple(qubits), label)


def xy8_axes(n: int) -> tuple[str, ...]:
    """XY-8 axis pattern cycled to length n."""
    return tuple(XY8_PATTERN[k % 8] for k in range(n))
