"""Matching error, spectral energy distribution and capture-ratio sweeps."""

from .ned import DEFAULT_NED_BAND, cumulative_ned, ned
from .sme import match_errors, mean_sme, primary_candidate, sme
from .sweep import capture_ratio_sweep, knee, sme_trend

__all__ = [
    "DEFAULT_NED_BAND",
    "cumulative_ned",
    "ned",
    "match_errors",
    "mean_sme",
    "primary_candidate",
    "sme",
    "capture_ratio_sweep",
    "knee",
    "sme_trend",
]
