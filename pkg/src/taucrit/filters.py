"""Control filter functions ``F_t(omega)`` for pure-dephasing qubit probes.

Every filter is ``|f~(omega)|**2 / 2`` with ``f~`` the Fourier transform of
the +/-1 switching function over ``[0, t]``. With this normalization
``int F_t dw = pi t`` for any pi-pulse sequence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "FreeEvolution",
    "PulseSequence",
    "Cpmg",
    "NarrowbandDelta",
    "Control",
    "hahn",
    "free_filter",
    "sequence_filter",
    "cpmg_filter",
    "filter_response",
    "narrowband_attenuation_terms",
    "control_frequency",
]

# below this |omega t| the 1/omega closed forms lose digits to cancellation
SMALL_PHASE = 1e-6


@dataclass(frozen=True)
class FreeEvolution:
    """Free induction decay, no pulses."""

    n_pulses = 0

    def pulse_times(self, t):
        return np.empty(0)


@dataclass(frozen=True)
class PulseSequence:
    """Instantaneous pi pulses at ``fractions * t`` (strictly inside (0, 1))."""

    fractions: tuple

    def __post_init__(self):
        fr = tuple(float(f) for f in self.fractions)
        if any(not 0.0 < f < 1.0 for f in fr):
            raise ValueError("pulse positions must lie strictly inside (0, t)")
        if any(b <= a for a, b in zip(fr, fr[1:])):
            raise ValueError("pulse positions must be strictly increasing")
        object.__setattr__(self, "fractions", fr)

    @classmethod
    def from_times(cls, pulse_times, t):
        return cls(tuple(np.asarray(pulse_times, dtype=float) / float(t)))

    @property
    def n_pulses(self):
        return len(self.fractions)

    def pulse_times(self, t):
        return np.asarray(self.fractions) * t


@dataclass(frozen=True)
class Cpmg:
    """Symmetric CPMG: ``n`` equidistant pulses at ``(j - 1/2) t / n``."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"CPMG needs a positive integer pulse count, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def n_pulses(self):
        return self.n

    @property
    def fractions(self):
        return tuple((np.arange(1, self.n + 1) - 0.5) / self.n)

    def pulse_times(self, t):
        return (np.arange(1, self.n + 1) - 0.5) * (t / self.n)


def hahn() -> Cpmg:
    return Cpmg(1)


@dataclass(frozen=True)
class NarrowbandDelta:
    """Delta-comb idealization of ``n``-pulse control at ``omega_ctrl = pi n / t``.

    ``harmonics=1`` is the single-frequency CW model.
    """

    n: int
    harmonics: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"pulse count must be a positive integer, got {self.n!r}")
        if int(self.harmonics) != self.harmonics or self.harmonics < 1:
            raise ValueError(f"harmonics must be a positive integer, got {self.harmonics!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "harmonics", int(self.harmonics))

    @property
    def n_pulses(self):
        return self.n


Control = Union[FreeEvolution, PulseSequence, Cpmg, NarrowbandDelta]


def control_frequency(control: Control, t):
    """``omega_ctrl = pi N / t``; zero for free evolution."""
    return math.pi * control.n_pulses / np.asarray(t, dtype=float)


def free_filter(t, omega):
    """``F_t(omega) = t**2 sinc**2(omega t / 2) / 2``."""
    x = 0.5 * np.asarray(omega, dtype=float) * t
    return 0.5 * t * t * np.sinc(x / np.pi) ** 2


def _segments(pulse_times, t):
    edges = np.concatenate([[0.0], np.asarray(pulse_times, dtype=float), [float(t)]])
    signs = np.where(np.arange(edges.size - 1) % 2 == 0, 1.0, -1.0)
    return edges, signs


def _validate_times(pulse_times, t):
    pt = np.asarray(pulse_times, dtype=float)
    if pt.ndim != 1:
        raise ValueError("pulse_times must be one-dimensional")
    if pt.size and (pt[0] <= 0.0 or pt[-1] >= t):
        raise ValueError("pulse times must lie strictly inside (0, t)")
    if np.any(np.diff(pt) <= 0.0):
        raise ValueError("pulse times must be strictly increasing")
    return pt


def _ft_series(edges, signs, omega):
    # second-order Taylor of int_a^b exp(i w s) ds, per segment
    a, b = edges[:-1], edges[1:]
    w = omega[:, None]
    seg = (b - a) + 0.5j * w * (b**2 - a**2) - w**2 * (b**3 - a**3) / 6.0
    return seg @ signs


def _ft_direct(edges, signs, omega, chunk=4096):
    # sum_k s_k L_k exp(i w m_k) sinc(w L_k / 2) over segments (midpoints m_k, lengths L_k)
    mids = 0.5 * (edges[:-1] + edges[1:])
    lengths = np.diff(edges)
    out = np.empty(omega.size, dtype=complex)
    for i in range(0, omega.size, chunk):
        w = omega[i:i + chunk, None]
        terms = np.exp(1j * w * mids) * np.sinc(w * lengths / (2 * np.pi))
        out[i:i + chunk] = terms @ (signs * lengths)
    return out


def sequence_filter(pulse_times, t, omega):
    """Filter of an arbitrary pi-pulse sequence, ``|f~(omega)|**2 / 2``.

    The switching function starts at +1 and flips sign at each pulse time.
    """
    t = float(t)
    pt = _validate_times(pulse_times, t)
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    w = np.atleast_1d(omega).ravel()
    edges, signs = _segments(pt, t)
    ft = np.empty(w.size, dtype=complex)
    small = np.abs(w * t) < SMALL_PHASE
    if np.any(small):
        ft[small] = _ft_series(edges, signs, w[small])
    if np.any(~small):
        ft[~small] = _ft_direct(edges, signs, w[~small])
    out = (0.5 * np.abs(ft) ** 2).reshape(np.shape(omega))
    return float(out) if scalar else out


def cpmg_filter(n, t, omega):
    """Closed-form symmetric CPMG filter; Hahn echo is ``n = 1``."""
    t = float(t)
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    w = np.atleast_1d(omega).ravel()
    z = w * t
    half_cell = np.cos(z / (2 * n))
    bad = (np.abs(z) < SMALL_PHASE) | (np.abs(half_cell) < 1e-3)
    out = np.empty(w.size)
    good = ~bad
    zg = z[good]
    edge = np.sin(zg / 2) if n % 2 == 0 else np.cos(zg / 2)
    out[good] = 8.0 * np.sin(zg / (4 * n)) ** 4 * edge**2 / (half_cell[good] ** 2 * w[good] ** 2)
    if np.any(bad):
        out[bad] = sequence_filter(Cpmg(n).pulse_times(t), t, w[bad])
    out = out.reshape(np.shape(omega))
    return float(out) if scalar else out


def filter_response(control: Control, t, omega):
    """Evaluate ``F_t(omega)`` for a non-delta control."""
    if isinstance(control, FreeEvolution):
        return free_filter(t, omega)
    if isinstance(control, Cpmg):
        return cpmg_filter(control.n, t, omega)
    if isinstance(control, PulseSequence):
        return sequence_filter(control.pulse_times(t), t, omega)
    raise TypeError(f"{type(control).__name__} has no pointwise filter; use narrowband_attenuation_terms")


def narrowband_attenuation_terms(n_pulses, harmonics, t):
    """Odd harmonics ``k omega_ctrl`` with weights ``8 t / (pi k**2)``.

    ``J ~= sum_k w_k G(k omega_ctrl)``. Returns ``(frequencies, weights)``
    with a trailing axis of length ``harmonics`` (``t`` may be an array).
    """
    if n_pulses < 1 or harmonics < 1:
        raise ValueError("n_pulses and harmonics must be >= 1")
    k = 2.0 * np.arange(harmonics) + 1.0
    t = np.asarray(t, dtype=float)[..., None]
    return k * (math.pi * n_pulses / t), 8.0 * t / (math.pi * k**2)
