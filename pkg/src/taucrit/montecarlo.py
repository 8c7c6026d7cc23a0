"""Finite-shot simulation of the probe and maximum-likelihood recovery of tau_c.

Randomness comes from numpy's PCG64 bit generator. Binomial counts are drawn
by inverse-CDF for up to ``NORMAL_SHOTS`` shots and by a rounded normal
approximation above. Trial ``i`` of a study seeded with ``seed`` uses the
substream ``SeedSequence([seed, i])``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import binom

from .attenuation import DEFAULT_TOL, attenuation, probabilities
from .estimation import error_from_attenuation
from .filters import Control
from .numerics import golden_section
from .spectral import NoiseSpectrum

__all__ = [
    "Protocol",
    "MeasurementRecord",
    "CrbReport",
    "BoundaryEstimateWarning",
    "simulate",
    "mle_tau",
    "crb_check",
    "trial_seed",
    "NORMAL_SHOTS",
]

NORMAL_SHOTS = 100_000
TIE_NATS = 1e-6


class BoundaryEstimateWarning(UserWarning):
    """The likelihood is maximised on the edge of the search range."""


@dataclass(frozen=True)
class Protocol:
    """Probing configuration with everything known except tau_c."""

    g: float
    beta: float
    control: Control
    t: float
    method: str = "auto"
    tol: float = DEFAULT_TOL

    def spectrum(self, tau_c) -> NoiseSpectrum:
        return NoiseSpectrum(self.g, float(tau_c), self.beta)

    def attenuation(self, tau_c):
        return attenuation(self.spectrum(tau_c), self.control, self.t, self.tol, self.method).j

    def p_plus(self, tau_c):
        return probabilities(self.attenuation(tau_c))[0]


@dataclass(frozen=True)
class MeasurementRecord:
    shots: int
    plus_count: int
    protocol: Protocol
    seed: int

    def __post_init__(self):
        if self.shots < 1 or not 0 <= self.plus_count <= self.shots:
            raise ValueError("need shots >= 1 and 0 <= plus_count <= shots")


@dataclass(frozen=True)
class CrbReport:
    empirical_rel_std: float
    predicted_rel_err: float
    rel_bias: float
    estimates: tuple

    @property
    def ratio(self):
        return self.empirical_rel_std / self.predicted_rel_err


def _draw_count(rng: np.random.Generator, shots, p):
    if shots <= NORMAL_SHOTS:
        return int(binom.ppf(rng.random(), shots, p))
    z = rng.standard_normal()
    mean = shots * p
    k = round(mean + z * math.sqrt(mean * (1.0 - p)))
    return int(min(max(k, 0), shots))


def simulate(protocol: Protocol, true_tau_c, shots, seed) -> MeasurementRecord:
    """Draw ``shots`` sigma_x outcomes; deterministic in ``(protocol, shots, seed)``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    p = protocol.p_plus(true_tau_c)
    return MeasurementRecord(int(shots), _draw_count(rng, int(shots), p), protocol, int(seed))


def trial_seed(seed, index):
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0])


@lru_cache(maxsize=64)
def _p_grid(protocol: Protocol, lo, hi, n):
    taus = np.geomspace(lo, hi, n)
    j = np.array([protocol.attenuation(tau) for tau in taus])
    return taus, probabilities(j)[0]


def _log_likelihood(k, m, p):
    p = min(max(p, 1e-300), 1.0 - 1e-16)
    return k * math.log(p) + (m - k) * math.log1p(-p)


def mle_tau(record: MeasurementRecord, search_range, n_grid=128):
    """Maximum-likelihood tau_c from a binomial record.

    ``p+(tau_c)`` is tabulated on a log grid and split into monotone pieces;
    the likelihood is maximised on each piece by golden-section search in
    ``log tau_c``. If two pieces reach the same likelihood (within
    ``TIE_NATS``) the data cannot tell them apart and one is chosen with a
    generator seeded by the record, so the result stays reproducible.
    """
    lo, hi = float(search_range[0]), float(search_range[1])
    if not 0 < lo < hi:
        raise ValueError("search_range must satisfy 0 < lo < hi")
    protocol = record.protocol
    k, m = record.plus_count, record.shots
    taus, p = _p_grid(protocol, lo, hi, int(n_grid))

    steps = np.sign(np.diff(p))
    cuts = [0]
    for i in range(1, steps.size):
        if steps[i] != 0 and steps[i - 1] != 0 and steps[i] != steps[i - 1]:
            cuts.append(i)
    cuts.append(taus.size - 1)

    def nll(s):
        return -_log_likelihood(k, m, protocol.p_plus(math.exp(s)))

    candidates = []
    for a, b in zip(cuts, cuts[1:]):
        s, val = golden_section(nll, math.log(taus[a]), math.log(taus[b]), xtol=1e-10)
        candidates.append((math.exp(s), -val))
    best = max(ll for _, ll in candidates)
    tied = [tau for tau, ll in candidates if ll >= best - TIE_NATS]
    if len(tied) > 1:
        rng = np.random.Generator(np.random.PCG64(trial_seed(record.seed, 0x7E5)))
        estimate = tied[int(rng.integers(len(tied)))]
    else:
        estimate = tied[0]
    if k in (0, m) or min(estimate - lo, hi - estimate) <= 1e-6 * (hi - lo):
        warnings.warn("likelihood maximised at a saturated probability or range edge",
                      BoundaryEstimateWarning, stacklevel=2)
    return estimate


def crb_check(protocol: Protocol, true_tau_c, shots, n_trials, seed, search_range=None):
    """Compare the spread of MLE estimates with the Cramer-Rao prediction.

    Returns the sample relative standard deviation (about the sample mean)
    and ``1 / (tau_c sqrt(shots F_Q))``.
    """
    if n_trials < 100:
        raise ValueError("n_trials must be >= 100")
    true_tau_c = float(true_tau_c)
    if search_range is None:
        search_range = (0.5 * true_tau_c, 2.0 * true_tau_c)
    estimates = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryEstimateWarning)
        for i in range(n_trials):
            rec = simulate(protocol, true_tau_c, shots, trial_seed(seed, i))
            estimates.append(mle_tau(rec, search_range))
    est = np.asarray(estimates)
    res = attenuation(protocol.spectrum(true_tau_c), protocol.control, protocol.t, protocol.tol, protocol.method)
    eps = error_from_attenuation(res.j, res.dj_dtau, true_tau_c)
    return CrbReport(
        empirical_rel_std=float(est.std(ddof=1) / true_tau_c),
        predicted_rel_err=float(eps / math.sqrt(shots)),
        rel_bias=float(est.mean() / true_tau_c - 1.0),
        estimates=tuple(float(e) for e in est),
    )
