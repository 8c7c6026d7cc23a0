"""Generalized Ornstein-Uhlenbeck noise spectra.

The spectral density is

    G(w) = g**2 * A_beta * tau_c / (1 + |w|**beta * tau_c**beta)

with ``A_beta`` fixed so that the total noise power ``int G dw`` equals ``g**2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NoiseSpectrum",
    "normalization",
    "spectrum_at",
    "spectrum_dtau",
    "critical_frequency",
]


def normalization(beta: float) -> float:
    """Return ``A_beta = beta * sin(pi / beta) / (2 pi)``.

    Raises ``ValueError`` for ``beta < 2``.
    """
    beta = float(beta)
    if not beta >= 2.0:
        raise ValueError(f"beta must be >= 2, got {beta!r}")
    return beta * math.sin(math.pi / beta) / (2.0 * math.pi)


@dataclass(frozen=True)
class NoiseSpectrum:
    """Environment parameters ``x_B = [g, tau_c, beta]``."""

    g: float
    tau_c: float
    beta: float = 2.0
    a_beta: float = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.g > 0 and math.isfinite(self.g)):
            raise ValueError(f"g must be positive, got {self.g!r}")
        if not (self.tau_c > 0 and math.isfinite(self.tau_c)):
            raise ValueError(f"tau_c must be positive, got {self.tau_c!r}")
        object.__setattr__(self, "a_beta", normalization(self.beta))

    def with_tau(self, tau_c: float) -> "NoiseSpectrum":
        return NoiseSpectrum(self.g, tau_c, self.beta)

    @property
    def omega0(self) -> float:
        return critical_frequency(self)

    def __call__(self, omega):
        return spectrum_at(self, omega)


def spectrum_at(spec: NoiseSpectrum, omega):
    """Spectral density ``G(omega)``; accepts scalars or arrays."""
    y = (np.abs(omega) * spec.tau_c) ** spec.beta
    return spec.g**2 * spec.a_beta * spec.tau_c / (1.0 + y)


def spectrum_dtau(spec: NoiseSpectrum, omega):
    """Closed-form ``dG/dtau_c``.

    Positive below the critical frequency, negative above it. A numerator that
    is zero within rounding (``omega`` equal to ``critical_frequency`` up to
    floating point) is returned as an exact zero.
    """
    beta = spec.beta
    y = (np.abs(omega) * spec.tau_c) ** beta
    num = 1.0 + (1.0 - beta) * y
    # cancellation noise in 1 + (1 - beta) * y is bounded by a few ulps of its terms
    noise = 8.0 * np.finfo(float).eps * (1.0 + (beta - 1.0) * y)
    num = np.where(np.abs(num) <= noise, 0.0, num)
    out = spec.g**2 * spec.a_beta * num / (1.0 + y) ** 2
    return out if np.ndim(out) else float(out)


def critical_frequency(spec: NoiseSpectrum) -> float:
    """Frequency ``omega_0 = 1 / (tau_c (beta - 1)**(1/beta))`` where dG/dtau_c = 0."""
    return 1.0 / (spec.tau_c * (spec.beta - 1.0) ** (1.0 / spec.beta))
