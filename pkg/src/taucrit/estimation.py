"""Quantum Fisher information about tau_c, Cramer-Rao error and the scans built on them."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .attenuation import SCAN_TOL, attenuation, attenuation_many
from .filters import Control, Cpmg, FreeEvolution, NarrowbandDelta, control_frequency
from .numerics import golden_section
from .spectral import NoiseSpectrum, critical_frequency, spectrum_at, spectrum_dtau

__all__ = [
    "ErrorPoint",
    "OptimalTime",
    "CriticalScanRow",
    "StrategyResult",
    "NoInformationError",
    "fisher_information",
    "error_from_attenuation",
    "qfi",
    "relative_error",
    "probe",
    "reference_time",
    "default_time_range",
    "optimal_time",
    "error_vs_control_scan",
    "local_minima",
    "critical_scan",
    "branch_flips",
    "critical_point",
    "strategy_select",
    "strategy_scan",
    "ultimate_bound",
    "contrast_factor",
]


class NoInformationError(ValueError):
    """Every candidate probing time carries zero Fisher information."""


@dataclass(frozen=True)
class ErrorPoint:
    t: float
    omega_ctrl: float
    qfi: float
    eps: float
    j: float


@dataclass(frozen=True)
class OptimalTime:
    t_opt: float
    eps_min: float
    branch: str
    t0: float


@dataclass(frozen=True)
class CriticalScanRow:
    x: float
    eps_min: float
    t_opt: float
    t0: float
    branch: str


@dataclass(frozen=True)
class StrategyResult:
    g_tau_c: float
    n_star: int
    eps_min: float
    eps_by_n: tuple


def fisher_information(j, dj_dtau):
    """``F_Q = exp(-2J) / (1 - exp(-2J)) * (dJ/dtau_c)**2``; zero where the derivative vanishes."""
    j = np.asarray(j, dtype=float)
    dj = np.asarray(dj_dtau, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = dj * dj / np.expm1(2.0 * j)
    out = np.where((dj == 0.0) | (j <= 0.0), 0.0, out)
    return float(out) if out.ndim == 0 else out


def error_from_attenuation(j, dj_dtau, tau_c):
    """Relative Cramer-Rao error ``1 / (tau_c sqrt(F_Q))``; ``inf`` where ``F_Q = 0``."""
    j = np.asarray(j, dtype=float)
    dj = np.abs(np.asarray(dj_dtau, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.sqrt(np.expm1(2.0 * j)) / (tau_c * dj)
    out = np.where((dj == 0.0) | (j <= 0.0) | np.isnan(out), np.inf, out)
    return float(out) if out.ndim == 0 else out


def contrast_factor(j):
    """``sqrt(exp(2J) - 1) / J``, the error at unit logarithmic sensitivity."""
    return math.sqrt(math.expm1(2.0 * j)) / j if j > 0 else math.inf


def probe(spec: NoiseSpectrum, control: Control, t, tol=SCAN_TOL, method="auto") -> ErrorPoint:
    if not t > 0:
        raise ValueError("probing time must be positive")
    res = attenuation(spec, control, t, tol, method)
    return ErrorPoint(
        t=float(t),
        omega_ctrl=float(control_frequency(control, t)),
        qfi=fisher_information(res.j, res.dj_dtau),
        eps=error_from_attenuation(res.j, res.dj_dtau, spec.tau_c),
        j=res.j,
    )


def qfi(spec, control, t, tol=SCAN_TOL, method="auto"):
    return probe(spec, control, t, tol, method).qfi


def relative_error(spec, control, t, tol=SCAN_TOL, method="auto"):
    return probe(spec, control, t, tol, method).eps


def reference_time(spec: NoiseSpectrum, control: Control) -> float:
    """``t0 = pi N / omega_0`` separating the long- and short-memory branches (tau_c without pulses)."""
    if control.n_pulses == 0:
        return spec.tau_c
    return math.pi * control.n_pulses / critical_frequency(spec)


def default_time_range(spec: NoiseSpectrum, control: Control):
    """A probing window covering both branches: at least ``[1e-2, 1e3] tau_c``."""
    tau, g = spec.tau_c, spec.g
    t0 = reference_time(spec, control)
    lo = min(1e-2 * tau, 1e-3 * t0, 1e-2 / g)
    hi = max(1e3 * tau, 1e4 * t0, 100.0 / (g * g * tau))
    return lo, hi


def local_minima(values):
    """Indices of finite local minima (strict on the left, plateau-tolerant on the right)."""
    v = np.asarray(values, dtype=float)
    idx = []
    for i in range(v.size):
        if not np.isfinite(v[i]):
            continue
        left = v[i - 1] if i > 0 else np.inf
        right = v[i + 1] if i + 1 < v.size else np.inf
        if v[i] < left and v[i] <= right:
            idx.append(i)
    return idx


def _eps_log_t(spec, control, tol, method):
    def f(s):
        res = attenuation(spec, control, math.exp(s), tol, method)
        return error_from_attenuation(res.j, res.dj_dtau, spec.tau_c)

    return f


def optimal_time(spec: NoiseSpectrum, control: Control, t_range=None, tol=SCAN_TOL,
                 n_coarse=256, method="auto") -> OptimalTime:
    """Globally minimise the relative error over the probing time.

    A log-spaced coarse scan locates every basin; each basin is refined by
    golden-section search in ``log t``. Near-ties go to the shorter time.
    """
    if n_coarse < 200:
        raise ValueError("coarse scan needs at least 200 points")
    lo, hi = t_range if t_range is not None else default_time_range(spec, control)
    grid = np.geomspace(lo, hi, n_coarse)
    j, dj = attenuation_many(spec, control, grid, tol, method)
    eps = error_from_attenuation(j, dj, spec.tau_c)
    minima = local_minima(eps)
    if not minima:
        raise NoInformationError("relative error is infinite over the whole time range")
    f = _eps_log_t(spec, control, tol, method)
    logs = np.log(grid)
    candidates = []
    for i in minima:
        a = logs[max(i - 1, 0)]
        b = logs[min(i + 1, grid.size - 1)]
        s, val = golden_section(f, a, b, xtol=1e-9)
        if val > eps[i]:
            s, val = logs[i], eps[i]
        candidates.append((math.exp(s), float(val)))
    best_t, best = candidates[0]
    for t, val in candidates[1:]:
        if val < best * (1.0 - 1e-9):
            best_t, best = t, val
    t0 = reference_time(spec, control)
    return OptimalTime(best_t, best, "LM" if best_t < t0 else "SM", t0)


def _narrowband_at_omega(spec, n, harmonics, omega):
    omega = np.asarray(omega, dtype=float)
    t = math.pi * n / omega
    k = 2.0 * np.arange(harmonics) + 1.0
    freqs = omega[..., None] * k
    weights = 8.0 * t[..., None] / (math.pi * k**2)
    j = np.sum(weights * spectrum_at(spec, freqs), axis=-1)
    dj = np.sum(weights * spectrum_dtau(spec, freqs), axis=-1)
    return t, j, dj


def error_vs_control_scan(spec: NoiseSpectrum, n, t_grid=None, omega_grid=None, harmonics=1):
    """Relative error along ``t = pi N / omega_ctrl`` for delta-filter control.

    Pass either probing times or control frequencies (both strictly increasing).
    """
    if (t_grid is None) == (omega_grid is None):
        raise ValueError("give exactly one of t_grid or omega_grid")
    grid = np.asarray(t_grid if t_grid is not None else omega_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0) or np.any(grid <= 0):
        raise ValueError("grid must be positive and strictly increasing")
    omega = math.pi * n / grid if t_grid is not None else grid
    t, j, dj = _narrowband_at_omega(spec, n, harmonics, omega)
    if t_grid is not None:
        t = grid
    q = fisher_information(j, dj)
    eps = error_from_attenuation(j, dj, spec.tau_c)
    return [ErrorPoint(float(a), float(b), float(c), float(d), float(e))
            for a, b, c, d, e in zip(t, omega, q, eps, j)]


def _critical_row(x, beta, n, harmonics, tol, n_coarse):
    spec = NoiseSpectrum(g=x / math.sqrt(2 * n), tau_c=1.0, beta=beta)
    res = optimal_time(spec, NarrowbandDelta(n, harmonics), tol=tol, n_coarse=n_coarse)
    return CriticalScanRow(float(x), res.eps_min, res.t_opt, res.t0, res.branch)


def _pmap(fn, items, jobs):
    if jobs is None or jobs <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def critical_scan(beta, n, x_grid, harmonics=1, tol=SCAN_TOL, n_coarse=256, jobs=1):
    """Minimal error and optimal time versus ``x = sqrt(2N) g tau_c`` (tau_c = 1 units)."""
    fn = partial(_critical_row, beta=beta, n=n, harmonics=harmonics, tol=tol, n_coarse=n_coarse)
    return _pmap(fn, [float(x) for x in x_grid], jobs)


def branch_flips(rows):
    return [i for i in range(1, len(rows)) if rows[i].branch != rows[i - 1].branch]


def critical_point(rows):
    """Geometric midpoint of the single branch flip in a critical scan."""
    flips = branch_flips(rows)
    if len(flips) != 1:
        raise ValueError(f"expected exactly one branch flip, found {len(flips)}")
    i = flips[0]
    return math.sqrt(rows[i - 1].x * rows[i].x)


def strategy_select(g_tau_c, beta=2.0, n_max=100, tol=SCAN_TOL, method="auto", n_coarse=256):
    """Best CPMG pulse count ``N <= n_max`` at coupling ``g tau_c`` (tau_c = 1 units).

    Every ``N`` is evaluated; near-ties go to the smaller ``N``.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    spec = NoiseSpectrum(g=float(g_tau_c), tau_c=1.0, beta=beta)
    errs = []
    for n in range(1, n_max + 1):
        try:
            errs.append(optimal_time(spec, Cpmg(n), tol=tol, n_coarse=n_coarse, method=method).eps_min)
        except NoInformationError:
            errs.append(math.inf)
    n_star, best = 1, errs[0]
    for n, e in enumerate(errs[1:], start=2):
        if e < best * (1.0 - 1e-9):
            n_star, best = n, e
    return StrategyResult(float(g_tau_c), n_star, best, tuple(errs))


def strategy_scan(g_grid, beta=2.0, n_max=100, tol=SCAN_TOL, method="auto", jobs=1):
    fn = partial(strategy_select, beta=beta, n_max=n_max, tol=tol, method=method)
    return _pmap(fn, [float(g) for g in g_grid], jobs)


def ultimate_bound():
    """Minimum over J of ``sqrt(exp(2J) - 1) / J``; returns ``(J0, eps0)``."""
    j0, eps0 = golden_section(contrast_factor, 1e-3, 5.0, xtol=1e-12)
    return j0, eps0
