"""Frequency-axis Kaiser tapering and the coarse-step resolution bound."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import windows

DEFAULT_KAISER_BETA = 5.0


def kaiser_half_window(count: int, beta: float = DEFAULT_KAISER_BETA) -> np.ndarray:
    """
    Right half of a symmetric Kaiser window of length 2*count - 1.

    Applied to k = 0..count-1 of a real signal's half spectrum, it tapers the
    conjugate-symmetric band -count+1..count-1 symmetrically. Peak 1 at k = 0.
    """
    if count < 1:
        raise ValueError(f"Window length must be >= 1, got {count}")
    return windows.kaiser(2 * count - 1, beta, sym=True)[count - 1:]


@dataclass(frozen=True)
class WindowProfile:
    """Kaiser shape beta over the first `count` frequencies (count=None: use all captured)."""
    beta: float = DEFAULT_KAISER_BETA
    count: Optional[int] = None

    def weights(self, count: Optional[int] = None) -> np.ndarray:
        return kaiser_half_window(count if count is not None else self.count, self.beta)


def main_lobe_halfwidth(length: int, count: int, beta: float = 0.0) -> float:
    """
    First zero of the truncated (beta=0) or Kaiser-tapered band-limited kernel,
    in bins: L/(2K-1), widened by sqrt(1 + (beta/pi)^2) for beta > 0.
    """
    if count < 1:
        raise ValueError("Frequency count must be >= 1")
    return length / (2 * count - 1) * math.sqrt(1.0 + (beta / math.pi) ** 2)


def coarse_uncertainty_ratio(length: int, count: int, support: float) -> float:
    """R = 2L / ((2K-1) M_s*): main-lobe width relative to the reception field."""
    if support <= 0:
        raise ValueError("Support size must be > 0")
    return 2.0 * length / ((2 * count - 1) * support)


def coarse_frequencies_for_ratio(length: int, support: float, ratio: float = 1.0) -> int:
    """Coarse frequency count K solving coarse_uncertainty_ratio(L, K, M_s*) = R, rounded."""
    if support <= 0 or ratio <= 0:
        raise ValueError("Support size and ratio must be > 0")
    return int(round((2.0 * length / (ratio * support) + 1.0) / 2.0))
