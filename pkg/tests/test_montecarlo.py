import math
import warnings

import numpy as np
import pytest

from taucrit.estimation import optimal_time, reference_time
from taucrit.filters import Cpmg, FreeEvolution, NarrowbandDelta
from taucrit.montecarlo import (
    BoundaryEstimateWarning,
    MeasurementRecord,
    Protocol,
    crb_check,
    mle_tau,
    simulate,
    trial_seed,
)
from taucrit.spectral import NoiseSpectrum

N = 20


@pytest.fixture(scope="module")
def informative():
    """Well-conditioned CPMG point: x = 3 at its optimal probing time."""
    g = 3 / math.sqrt(2 * N)
    opt = optimal_time(NoiseSpectrum(g, 1.0), Cpmg(N))
    return Protocol(g, 2.0, Cpmg(N), opt.t_opt), opt.eps_min


def test_zero_attenuation_gives_all_plus():
    proto = Protocol(1.0, 2.0, FreeEvolution(), 0.0)
    assert proto.p_plus(1.0) == 1.0
    for seed in range(20):
        assert simulate(proto, 1.0, 1000, seed).plus_count == 1000
    assert simulate(proto, 1.0, 10**6, 3).plus_count == 10**6


def test_full_dephasing_concentrates_at_half():
    proto = Protocol(30.0, 2.0, FreeEvolution(), 10.0)
    assert proto.p_plus(1.0) == 0.5
    freqs = [simulate(proto, 1.0, 10**6, s).plus_count / 10**6 for s in range(50)]
    assert all(0.498 <= f <= 0.502 for f in freqs)


@pytest.mark.parametrize("shots", [1, 50, 10**4, 10**7])
def test_simulate_is_deterministic(shots):
    proto = Protocol(0.4, 2.0, Cpmg(3), 2.0)
    a = simulate(proto, 1.0, shots, 42)
    assert a == simulate(proto, 1.0, shots, 42)
    assert 0 <= a.plus_count <= shots


def test_sampler_moments_both_regimes():
    proto = Protocol(0.5, 2.0, FreeEvolution(), 1.5)
    p = proto.p_plus(1.0)
    for shots in (2000, 10**6):
        k = np.array([simulate(proto, 1.0, shots, trial_seed(9, i)).plus_count for i in range(2000)])
        sd = math.sqrt(shots * p * (1 - p))
        assert abs(k.mean() - shots * p) < 4 * sd / math.sqrt(k.size)
        assert k.std(ddof=1) == pytest.approx(sd, rel=0.08)


def test_validation():
    proto = Protocol(0.4, 2.0, Cpmg(3), 2.0)
    with pytest.raises(ValueError):
        simulate(proto, 1.0, 0, 1)
    with pytest.raises(ValueError):
        MeasurementRecord(10, 11, proto, 1)
    rec = simulate(proto, 1.0, 100, 1)
    with pytest.raises(ValueError):
        mle_tau(rec, (2.0, 1.0))
    with pytest.raises(ValueError):
        crb_check(proto, 1.0, 100, 99, 1)


def test_trial_seeds_distinct():
    seeds = {trial_seed(5, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert trial_seed(5, 1) == trial_seed(5, 1)


def test_noiseless_record_inverts(informative):
    proto, _ = informative
    for tau in (0.8, 1.0, 1.3):
        m = 10**6
        rec = MeasurementRecord(m, round(m * proto.p_plus(tau)), proto, 0)
        assert mle_tau(rec, (0.5 * tau, 2 * tau)) == pytest.approx(tau, rel=5e-3)


def test_noiseless_record_free_evolution():
    proto = Protocol(0.8, 3.0, FreeEvolution(), 1.2, tol=1e-8)
    m = 10**6
    rec = MeasurementRecord(m, round(m * proto.p_plus(1.0)), proto, 0)
    assert mle_tau(rec, (0.5, 2.0)) == pytest.approx(1.0, rel=5e-3)


def test_boundary_warning():
    proto = Protocol(0.4, 2.0, Cpmg(3), 2.0)
    rec = MeasurementRecord(100, 100, proto, 0)
    with pytest.warns(BoundaryEstimateWarning):
        mle_tau(rec, (0.5, 2.0))


def test_no_information_point_spread_exceeds_crb():
    spec = NoiseSpectrum(1 / math.sqrt(2 * N), 1.0)
    control = NarrowbandDelta(N)
    nearby = optimal_time(spec, control).eps_min
    proto = Protocol(spec.g, 2.0, control, reference_time(spec, control))
    shots = 10**8
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryEstimateWarning)
        est = [mle_tau(simulate(proto, 1.0, shots, trial_seed(11, i)), (0.5, 2.0)) for i in range(100)]
    assert np.std(est, ddof=1) > 10 * nearby / math.sqrt(shots)


def test_different_seeds_differ(informative):
    proto, _ = informative
    a = mle_tau(simulate(proto, 1.0, 10**4, 1), (0.5, 2))
    b = mle_tau(simulate(proto, 1.0, 10**4, 2), (0.5, 2))
    assert a != b


def test_crb_check_reproducible_and_saturates(informative):
    proto, eps = informative
    rep = crb_check(proto, 1.0, 10**4, 200, seed=7)
    assert rep == crb_check(proto, 1.0, 10**4, 200, seed=7)
    assert rep.predicted_rel_err == pytest.approx(eps / 100, rel=1e-6)
    assert 0.85 <= rep.ratio <= 1.2
    assert rep.empirical_rel_std**2 >= (1 - 3 / math.sqrt(200)) * rep.predicted_rel_err**2
    assert abs(rep.rel_bias) < 3 * rep.empirical_rel_std / math.sqrt(200) + 1e-3


def test_estimator_consistency(informative):
    proto, _ = informative
    medians = []
    for shots in (10**2, 10**3, 10**4):
        rep = crb_check(proto, 1.0, shots, 100, seed=3, search_range=(0.2, 5.0))
        medians.append(np.median(np.abs(np.array(rep.estimates) - 1.0)))
    assert medians[0] > medians[1] > medians[2]
