"""Estimating an environment's memory time with dynamically controlled qubit probes."""

__version__ = "0.1.0"

from .attenuation import (
    ProbeResult,
    attenuation,
    attenuation_many,
    free_decay_closed_form,
    ou_attenuation,
    probabilities,
)
from .estimation import (
    CriticalScanRow,
    ErrorPoint,
    NoInformationError,
    OptimalTime,
    StrategyResult,
    critical_point,
    critical_scan,
    error_vs_control_scan,
    optimal_time,
    probe,
    qfi,
    relative_error,
    strategy_scan,
    strategy_select,
    ultimate_bound,
)
from .filters import (
    Cpmg,
    FreeEvolution,
    NarrowbandDelta,
    PulseSequence,
    cpmg_filter,
    free_filter,
    hahn,
    narrowband_attenuation_terms,
    sequence_filter,
)
from .numerics import QuadratureError
from .spectral import NoiseSpectrum, critical_frequency, normalization, spectrum_at, spectrum_dtau
