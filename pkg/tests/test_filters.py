import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import sici

from taucrit.filters import (
    Cpmg,
    FreeEvolution,
    NarrowbandDelta,
    PulseSequence,
    control_frequency,
    cpmg_filter,
    filter_response,
    free_filter,
    hahn,
    narrowband_attenuation_terms,
    sequence_filter,
)
from taucrit.numerics import integrate_panels


def mp_filter(pulse_times, t, w, dps=50):
    """High-precision oracle: |int_0^t f(s) e^{i w s} ds|^2 / 2, segment by segment."""
    with mp.workdps(dps):
        edges = [mp.mpf(0)] + [mp.mpf(x) for x in pulse_times] + [mp.mpf(t)]
        w = mp.mpf(w)
        acc = mp.mpc(0)
        for k, (a, b) in enumerate(zip(edges, edges[1:])):
            seg = (mp.exp(1j * w * b) - mp.exp(1j * w * a)) / (1j * w) if w != 0 else b - a
            acc += seg if k % 2 == 0 else -seg
        return float(abs(acc) ** 2 / 2)


def time_domain_free(t, w):
    re, _ = quad(lambda s: math.cos(w * s), 0, t, epsabs=1e-14)
    im, _ = quad(lambda s: math.sin(w * s), 0, t, epsabs=1e-14)
    return 0.5 * (re * re + im * im)


def test_free_filter_examples():
    assert free_filter(2.0, 0.0) == 2.0
    assert free_filter(2.0, math.pi) == pytest.approx(0.0, abs=1e-30)
    expected = 0.5 * (math.sin(0.5) / 0.5) ** 2
    assert free_filter(1.0, 1.0) == pytest.approx(expected, rel=1e-15)
    assert free_filter(1.0, 1.0) == pytest.approx(0.4596976941, rel=1e-9)
    assert free_filter(1.0, 1.0) == pytest.approx(time_domain_free(1.0, 1.0), rel=1e-12)


@pytest.mark.parametrize("t,w", [(0.3, 0.0), (2.0, 1.7), (5.0, 0.01), (1.0, 30.0)])
def test_empty_sequence_is_free(t, w):
    assert sequence_filter([], t, w) == pytest.approx(free_filter(t, w), rel=1e-12, abs=1e-300)


def test_hahn_closed_form():
    t = 1.7
    w = np.linspace(0.05, 40, 301)
    expected = 8.0 / w**2 * np.sin(w * t / 4) ** 4
    np.testing.assert_allclose(sequence_filter([t / 2], t, w), expected, rtol=1e-9)
    np.testing.assert_allclose(cpmg_filter(1, t, w), expected, rtol=1e-9)
    assert sequence_filter([t / 2], t, 0.0) == 0.0
    assert filter_response(hahn(), t, 0.0) == 0.0


@pytest.mark.parametrize("n", [1, 2, 3, 8, 20, 51])
def test_cpmg_closed_form_matches_direct_sum(n):
    t = 3.3
    w = np.concatenate([np.linspace(1e-3, 50 * n / t, 997),
                        (2 * np.arange(6) + 1) * math.pi * n / t * (1 + 1e-4)])
    direct = sequence_filter(Cpmg(n).pulse_times(t), t, w)
    scale = free_filter(t, 0.0)
    np.testing.assert_allclose(cpmg_filter(n, t, w), direct, rtol=1e-7, atol=1e-12 * scale)


@pytest.mark.parametrize("n", [2, 7])
def test_cpmg_at_exact_harmonics(n):
    t = 2.0
    w = (2 * np.arange(4) + 1) * math.pi * n / t
    oracle = [mp_filter(Cpmg(n).pulse_times(t), t, x) for x in w]
    np.testing.assert_allclose(cpmg_filter(n, t, w), oracle, rtol=1e-9)


def test_cpmg_peak_at_control_frequency():
    wc, n = 1.0, 20
    t = n * math.pi / wc
    # a 10^4-point scan over the first ten harmonics
    w = np.linspace(0, 20 * wc, 10_001)
    peak = w[np.argmax(cpmg_filter(n, t, w))]
    assert abs(peak - wc) <= (w[1] - w[0]) * (1 + 1e-9)


@pytest.mark.parametrize("n,bound", [(20, 5e-3), (200, 5e-5)])
def test_cpmg_peak_offset_shrinks_with_n(n, bound):
    t = n * math.pi
    w = np.linspace(0.9, 1.1, 200_001)
    peak = w[np.argmax(cpmg_filter(n, t, w))]
    assert abs(peak - 1.0) < bound


def test_narrowband_terms_examples():
    f, wts = narrowband_attenuation_terms(1, 1, 2.0)
    assert f[0] == pytest.approx(math.pi / 2.0)
    assert wts[0] == pytest.approx(8 * 2.0 / math.pi)
    f, wts = narrowband_attenuation_terms(5, 2, 1.0)
    np.testing.assert_allclose(f, [5 * math.pi, 15 * math.pi])
    assert wts[0] / wts[1] == pytest.approx(9.0)


def test_narrowband_weights_sum_to_filter_area():
    # all odd harmonics on both sides carry pi t in total
    t = 3.0
    _, w = narrowband_attenuation_terms(4, 200_000, t)
    assert 2 * w.sum() / 2 == pytest.approx(math.pi * t, rel=1e-5)


def test_control_frequency():
    assert control_frequency(Cpmg(20), 10.0) == pytest.approx(2 * math.pi)
    assert control_frequency(FreeEvolution(), 3.0) == 0.0


@pytest.mark.parametrize("times,t", [([0.5, 0.2], 1.0), ([0.0, 0.5], 1.0), ([0.5, 1.0], 1.0),
                                     ([0.3, 0.3], 1.0)])
def test_invalid_pulse_times(times, t):
    with pytest.raises(ValueError):
        sequence_filter(times, t, 1.0)
    with pytest.raises(ValueError):
        PulseSequence.from_times(times, t)


def test_invalid_counts():
    for bad in (0, -1, 2.5):
        with pytest.raises(ValueError):
            Cpmg(bad)
        with pytest.raises(ValueError):
            NarrowbandDelta(bad)
    with pytest.raises(ValueError):
        NarrowbandDelta(3, harmonics=0)
    with pytest.raises(TypeError):
        filter_response(NarrowbandDelta(3), 1.0, 1.0)


def area(control, t):
    """int F dw over the real line: panel quadrature up to W plus the exact Si/Ci tail."""
    big = 4000.0 / t
    edges = np.arange(0, big + 1e-12, math.pi / (4 * t))
    val, _, _ = integrate_panels(lambda w: filter_response(control, t, w), edges, rtol=1e-11)
    # beyond W, F = |sum_j c_j e^{i w t_j}|^2 / (2 w^2) with jump weights c_j
    times = np.concatenate([[0.0], control.pulse_times(t), [t]])
    n = control.n_pulses
    c = np.array([-1.0] + [2.0 * (-1) ** j for j in range(n)] + [(-1.0) ** n])
    d = np.abs(times[:, None] - times[None, :])
    si, _ = sici(big * d)
    tail_kernel = np.cos(big * d) / big - d * (np.pi / 2 - si)
    return 2 * val + (c[:, None] * c[None, :] * tail_kernel).sum()


@pytest.mark.parametrize("control", [FreeEvolution(), Cpmg(1), Cpmg(4), PulseSequence((0.1, 0.35, 0.4, 0.9))])
@pytest.mark.parametrize("t", [0.5, 3.0])
def test_parseval_area(control, t):
    assert area(control, t) == pytest.approx(math.pi * t, rel=1e-6)


sequences = st.lists(st.floats(0.001, 0.999), min_size=0, max_size=12, unique=True).map(
    lambda xs: tuple(sorted(xs))).filter(lambda xs: all(b - a > 1e-6 for a, b in zip(xs, xs[1:])))


@settings(max_examples=60, deadline=None)
@given(sequences, st.floats(0.1, 10), st.lists(st.floats(-100, 100), min_size=1, max_size=20))
def test_nonnegative(fracs, t, ws):
    seq = PulseSequence(fracs)
    vals = sequence_filter(seq.pulse_times(t), t, np.array(ws) / t)
    assert np.all(vals >= 0)


@given(st.integers(1, 60), st.floats(0.01, 100))
def test_cpmg_blocks_dc(n, t):
    assert sequence_filter(Cpmg(n).pulse_times(t), t, 0.0) <= 1e-26 * t * t
    assert cpmg_filter(n, t, 0.0) <= 1e-26 * t * t


@settings(max_examples=30, deadline=None)
@given(sequences, st.floats(0.1, 10))
def test_small_omega_series_matches_oracle(fracs, t):
    seq = PulseSequence(fracs)
    pt = seq.pulse_times(t)
    w = 1e-8 / t
    oracle = mp_filter(pt, t, w)
    got = sequence_filter(pt, t, w)
    assert got == pytest.approx(oracle, rel=1e-6, abs=1e-20 * t * t)


@pytest.mark.parametrize("fracs", [(), (0.5,), (0.2, 0.3, 0.7)])
def test_continuity_across_series_switch(fracs):
    t = 2.0
    pt = PulseSequence(fracs).pulse_times(t)
    for phase in (0.999e-6, 1.001e-6, 1e-4, 1e-2):
        w = phase / t
        assert sequence_filter(pt, t, w) == pytest.approx(mp_filter(pt, t, w), rel=1e-6, abs=1e-22)
