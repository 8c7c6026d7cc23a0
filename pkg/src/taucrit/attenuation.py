"""Attenuation factor ``J = int F_t(w) G(w) dw``, its tau_c derivative and p+/-.

Three evaluation routes:

* ``quadrature``  adaptive Gauss-Kronrod over omega with an analytic tail bound,
* ``narrowband``  the delta-comb sum for :class:`NarrowbandDelta` controls,
* ``closed-form`` exact time-domain lag sum, Ornstein-Uhlenbeck (beta = 2) only.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .filters import (
    Control,
    FreeEvolution,
    NarrowbandDelta,
    filter_response,
    narrowband_attenuation_terms,
)
from .numerics import integrate_panels
from .spectral import NoiseSpectrum, spectrum_at, spectrum_dtau

__all__ = [
    "ProbeResult",
    "attenuation",
    "attenuation_many",
    "free_decay_closed_form",
    "ou_attenuation",
    "probabilities",
    "DEFAULT_TOL",
    "SCAN_TOL",
]

DEFAULT_TOL = 1e-9
SCAN_TOL = 1e-7
METHODS = ("auto", "quadrature", "narrowband", "closed-form")


@dataclass(frozen=True)
class ProbeResult:
    j: float
    dj_dtau: float
    method: str
    abs_error_estimate: float = 0.0


def probabilities(j):
    """Outcome probabilities ``p+/- = (1 +/- exp(-J)) / 2``."""
    j = np.asarray(j, dtype=float)
    if np.any(j < 0) or np.any(np.isnan(j)):
        raise ValueError("attenuation factor must be non-negative")
    c = np.exp(-j)
    p_plus, p_minus = 0.5 * (1.0 + c), 0.5 * (1.0 - c)
    if j.ndim == 0:
        return float(p_plus), float(p_minus)
    return p_plus, p_minus


def free_decay_closed_form(g, tau_c, t, beta=2.0):
    """Exact free-induction attenuation for Ornstein-Uhlenbeck noise.

    ``J = g**2 tau_c**2 (t/tau_c - 1 + exp(-t/tau_c))``; only defined for beta = 2.
    """
    if beta != 2:
        raise ValueError("closed-form free decay exists only for beta = 2")
    x = np.asarray(t, dtype=float) / tau_c
    return g**2 * tau_c**2 * _phi(x)


def _phi(x):
    # x - 1 + exp(-x), accurate for small |x| and valid for complex x
    x = np.asarray(x)
    small = np.abs(x) < 0.5
    out = np.empty_like(x)
    xs = x[small]
    term = xs * xs / 2.0
    acc = term.copy()
    for n in range(3, 22):
        term = -term * xs / n
        acc = acc + term
    out[small] = acc
    xb = x[~small]
    out[~small] = xb - 1.0 + np.exp(-xb)
    return out


def _phi_scalar(x):
    if abs(x) < 0.5:
        term = x * x / 2.0
        acc = term
        for n in range(3, 22):
            term = -term * x / n
            acc += term
        return acc
    return x - 1.0 + cmath.exp(-x)


def _ou_lag_sum_scalar(g, tau, fractions, t):
    edges = (0.0,) + tuple(fractions) + (1.0,)
    cache = {}
    diag = off = carry = 0.0
    sign = 1.0
    for lo, hi in zip(edges, edges[1:]):
        width = hi - lo
        if width not in cache:
            x = t * width / tau
            decay = cmath.exp(-x)
            psi = 1.0 - decay if abs(x) > 1e-3 else x * (1.0 - x * (0.5 - x / 6.0 * (1.0 - x / 4.0)))
            cache[width] = (_phi_scalar(x), decay, psi)
        phi, decay, psi = cache[width]
        diag += phi
        off += sign * psi * carry
        carry = decay * carry + sign * psi
        sign = -sign
    return g * g * tau * tau * (diag + off)


def _ou_lag_sum(g, tau, fractions, t):
    # time-domain double integral of a +/-1 switching function against g^2 exp(-|s|/tau)
    if np.ndim(t) == 0:
        return complex(_ou_lag_sum_scalar(g, tau, fractions, float(t)))
    t = np.asarray(t, dtype=float)
    edges = np.concatenate([[0.0], np.asarray(fractions, dtype=float), [1.0]])
    diag = 0.0
    off = 0.0
    carry = 0.0
    for k, frac in enumerate(np.diff(edges)):
        x = (t * frac) / tau
        sign = 1.0 if k % 2 == 0 else -1.0
        psi = -np.expm1(-x)
        diag = diag + _phi(x)
        off = off + sign * psi * carry
        carry = np.exp(-x) * carry + sign * psi
    return g * g * tau * tau * (diag + off)


def ou_attenuation(spec: NoiseSpectrum, control: Control, t):
    """Exact ``(J, dJ/dtau_c)`` for beta = 2 under free evolution or pi-pulse control.

    The derivative is taken by complex-step differentiation of the lag sum.
    """
    if spec.beta != 2:
        raise ValueError("closed-form attenuation requires beta = 2")
    if isinstance(control, NarrowbandDelta):
        raise TypeError("closed-form route does not apply to delta filters")
    fractions = () if isinstance(control, FreeEvolution) else control.fractions
    t = np.asarray(t, dtype=float)
    h = 1e-20 * spec.tau_c
    val = _ou_lag_sum(spec.g, complex(spec.tau_c, h), fractions, t)
    if np.ndim(val) == 0:
        return max(val.real, 0.0), val.imag / h
    return np.maximum(val.real, 0.0), val.imag / h


def _narrowband(spec, control, t):
    freqs, weights = narrowband_attenuation_terms(control.n, control.harmonics, t)
    j = np.sum(weights * spectrum_at(spec, freqs), axis=-1)
    dj = np.sum(weights * spectrum_dtau(spec, freqs), axis=-1)
    return j, dj


def _panel_edges(lo, hi, t, tau):
    cap = math.pi / (4.0 * t)
    knee = 1.0 / tau
    parts = [np.array([lo, hi])]
    if lo < knee:
        parts.append(np.arange(lo, min(knee, hi), min(cap, 0.25 * knee)))
    geo_end = min(hi, 4.0 * cap)
    start = max(lo, knee)
    if start < geo_end:
        n = int(math.ceil(math.log(geo_end / start) / math.log(1.25)))
        parts.append(start * 1.25 ** np.arange(n + 1))
    start = max(lo, 4.0 * cap)
    if start < hi:
        parts.append(np.arange(start, hi, cap))
    edges = np.unique(np.concatenate(parts))
    return edges[(edges >= lo) & (edges <= hi)]


def _quadrature(spec: NoiseSpectrum, control: Control, t, tol):
    tau, beta = spec.tau_c, spec.beta

    def integrand(w):
        f = filter_response(control, t, w)
        return np.stack([f * spectrum_at(spec, w), f * spectrum_dtau(spec, w)])

    n = control.n_pulses
    # F <= 2 (N+1)^2 / w^2;  G <= cg w^-beta;  |dG/dtau| <= cd w^-beta
    amp = 2.0 * (n + 1) ** 2
    cg = spec.g**2 * spec.a_beta * tau ** (1.0 - beta)
    cd = spec.g**2 * spec.a_beta * (beta - 1.0) * tau ** (-beta)

    def tail(omega):
        return 2.0 * amp * np.array([cg, cd]) * omega ** (-(beta + 1.0)) / (beta + 1.0)

    omega1 = max(40.0 / tau, (4 * max(n, 1) + 2) * math.pi / t, 40.0 * math.pi / t)
    val, err, scale = integrate_panels(integrand, _panel_edges(0.0, omega1, t, tau), rtol=0.5 * tol)
    val, err, scale = 2.0 * val, 2.0 * err, 2.0 * scale
    budget = 0.5 * tol * scale
    bound = tail(omega1)
    if np.any(bound > budget):
        ratio = np.max(bound / budget)
        omega_max = omega1 * ratio ** (1.0 / (beta + 1.0)) * 1.01
        v2, e2, s2 = integrate_panels(
            integrand, _panel_edges(omega1, omega_max, t, tau), rtol=0.5 * tol, atol=0.25 * budget
        )
        val, err, scale = val + 2.0 * v2, err + 2.0 * e2, scale + 2.0 * s2
        bound = tail(omega_max)
    err = err + bound
    return val[0], val[1], err[0]


def attenuation(spec: NoiseSpectrum, control: Control, t, tol=DEFAULT_TOL, method="auto") -> ProbeResult:
    """Attenuation factor and its tau_c derivative at probing time ``t``.

    ``method="auto"`` picks the delta-comb sum for :class:`NarrowbandDelta`,
    the exact lag sum when ``beta == 2``, and quadrature otherwise.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    t = float(t)
    if t < 0:
        raise ValueError("probing time must be non-negative")
    if not 0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    delta = isinstance(control, NarrowbandDelta)
    if method == "auto":
        method = "narrowband" if delta else ("closed-form" if spec.beta == 2 else "quadrature")
    if delta != (method == "narrowband"):
        raise ValueError(f"method {method!r} does not apply to {type(control).__name__}")
    if t == 0.0:
        return ProbeResult(0.0, 0.0, method, 0.0)
    if method == "narrowband":
        j, dj = _narrowband(spec, control, t)
        return ProbeResult(float(j), float(dj), method, 0.0)
    if method == "closed-form":
        j, dj = ou_attenuation(spec, control, t)
        return ProbeResult(float(j), float(dj), method, float(64 * np.finfo(float).eps * j))
    j, dj, err = _quadrature(spec, control, t, tol)
    return ProbeResult(max(float(j), 0.0), float(dj), method, float(err))


def attenuation_many(spec: NoiseSpectrum, control: Control, times, tol=SCAN_TOL, method="auto"):
    """Vectorized ``(J, dJ/dtau_c)`` over an array of probing times."""
    times = np.asarray(times, dtype=float)
    delta = isinstance(control, NarrowbandDelta)
    if method == "auto":
        method = "narrowband" if delta else ("closed-form" if spec.beta == 2 else "quadrature")
    if method == "narrowband":
        if not delta:
            raise ValueError("narrowband method needs a NarrowbandDelta control")
        j, dj = _narrowband(spec, control, np.where(times > 0, times, np.inf))
    elif method == "closed-form":
        j, dj = ou_attenuation(spec, control, times)
    else:
        pairs = [attenuation(spec, control, t, tol, method) for t in times.ravel()]
        j = np.array([p.j for p in pairs]).reshape(times.shape)
        dj = np.array([p.dj_dtau for p in pairs]).reshape(times.shape)
    zero = times == 0
    return np.where(zero, 0.0, j), np.where(zero, 0.0, dj)
