"""Normalized energy distribution of fine-step spectra.

    NED(k) = (1 / P) sum_pixels |F(k; u, v)|,   k = 1 .. U//2 - 1

normalized by its maximum over k, U being the fine period M_theta.
"""

import logging

import numpy as np

from ..recon.spectrum import SpectrumSlice

logger = logging.getLogger(__name__)

DEFAULT_NED_BAND = 0.16


def ned(spectra, period: int = None) -> np.ndarray:
    """
    NED over k = 1 .. period//2 - 1.

    Args:
        spectra: SpectrumSlice, or (pixels, K) complex array indexed by k = 0..K-1
        period: U; taken from the SpectrumSlice when omitted

    Raises:
        ValueError: too few frequencies, or every magnitude is zero.
    """
    if isinstance(spectra, SpectrumSlice):
        if not spectra.is_prefix():
            raise ValueError("NED needs a 0..n-1 spectrum; share the coarse DC first")
        period = spectra.period if period is None else period
        values = spectra.values
    else:
        values = np.atleast_2d(np.asarray(spectra))
        period = values.shape[1] * 2 - 1 if period is None else period

    last = period // 2 - 1
    if last < 1 or values.shape[1] <= last:
        raise ValueError(f"NED needs frequencies 1..{last} of period {period}, got {values.shape[1]} columns")
    energy = np.abs(values[:, 1:last + 1]).mean(axis=0)
    top = float(energy.max())
    if top <= 0.0:
        raise ValueError("NED undefined: every spectral magnitude is zero")
    return energy / top


def cumulative_ned(distribution: np.ndarray, band: float = DEFAULT_NED_BAND) -> float:
    """Share of the NED mass in the lowest band fraction of frequencies."""
    distribution = np.asarray(distribution, dtype=np.float64)
    if not 0.0 < band <= 1.0:
        raise ValueError(f"Band fraction must be in (0, 1], got {band}")
    count = max(1, int(np.floor(band * distribution.size + 0.5)))
    return float(distribution[:count].sum() / distribution.sum())
