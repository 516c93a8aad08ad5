"""Projection-function reconstruction.

Full path: inverse DFT of the complete half spectrum at period L.

Coarse-to-fine path (local slice extension):
  1. coarse_localize: Kaiser-tapered N_c lowest frequencies at period L,
     inverse DFT, threshold -> mask C_theta and reception-field size M_s.
  2. estimate_fine_period: M_theta = max M_s over camera pixels.
  3. fine_reconstruct: inverse DFT at period M_theta gives one period of the
     periodic summation f^B; tiling it over L and multiplying by the
     mask recovers f exactly whenever the mask span fits in M_theta.

All functions are batched over camera pixels (leading axis, row-major).
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..patterns.budget import fine_frequency_count
from .spectrum import SpectrumSlice
from .window import DEFAULT_KAISER_BETA, WindowProfile, kaiser_half_window

logger = logging.getLogger(__name__)

# Pixels whose coarse peak is below this fraction of the brightest pixel's
# peak carry only round-off from the phase sum.
ROUNDOFF_FLOOR = 1e-9


class AliasingWarning(UserWarning):
    """Coarse mask wider than the fine period: the slice extension aliases."""


@dataclass
class ProjectionFunction:
    """
    Reconstructed projection functions of one direction.

    Attributes:
        theta: Direction in radians
        values: (pixels, L) real, equal to scale * Radon projection
        mask: (pixels, L) bool coarse mask, None for full reconstructions
        support: (pixels,) int M_s, 0 where the pixel is unreconstructable
        scale: S*b/2
        stage: "full", "coarse" or "fine"
    """
    theta: float
    values: np.ndarray
    mask: Optional[np.ndarray] = None
    support: Optional[np.ndarray] = None
    scale: float = 1.0
    stage: str = "full"

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta)

    @property
    def length(self) -> int:
        return int(self.values.shape[-1])

    @property
    def pixel_count(self) -> int:
        return int(self.values.shape[0])

    @property
    def reconstructable(self) -> np.ndarray:
        if self.support is None:
            return np.ones(self.pixel_count, dtype=bool)
        return self.support > 0

    def masked(self) -> np.ndarray:
        if self.mask is None:
            return self.values
        return np.where(self.mask, self.values, 0.0)

    def normalized(self) -> np.ndarray:
        """Masked values divided by S*b/2, i.e. in Radon-transform units."""
        return self.masked() / self.scale

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theta_deg": round(self.theta_deg, 9),
            "length": self.length,
            "pixels": self.pixel_count,
            "scale": self.scale,
            "stage": self.stage,
            "reconstructable": int(self.reconstructable.sum()),
        }


def _require_prefix(spectrum: SpectrumSlice, needed: int, what: str) -> None:
    if not spectrum.is_prefix() or len(spectrum.frequencies) < needed:
        raise ValueError(
            f"{what} needs frequencies 0..{needed - 1} at period {spectrum.period}, "
            f"got {len(spectrum.frequencies)} ({spectrum.stage}, theta={spectrum.theta_deg:g})"
        )


def reconstruct_full(spectrum: SpectrumSlice) -> ProjectionFunction:
    """
    Inverse DFT of the complete (conjugate-symmetric half) spectrum.

    Raises:
        ValueError: spectrum incomplete; use the coarse/fine path instead.
    """
    period = spectrum.period
    half = period // 2 + 1
    _require_prefix(spectrum, half, "Full reconstruction")
    values = np.fft.irfft(spectrum.values[:, :half], n=period, axis=1)
    return ProjectionFunction(theta=spectrum.theta, values=values, scale=spectrum.scale, stage="full")


# ---------------------------------------------------------------------------
# Coarse localization
# ---------------------------------------------------------------------------

def _runs(mask: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(starts, ends) of True runs, ends exclusive."""
    edges = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    return np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)


def clean_mask(mask: np.ndarray, merge_gap: int = 3, min_run: int = 2) -> np.ndarray:
    """Merge runs separated by fewer than merge_gap bins, then drop runs shorter than min_run."""
    starts, ends = _runs(mask)
    if starts.size == 0:
        return np.zeros_like(mask, dtype=bool)
    merged: List[List[int]] = [[int(starts[0]), int(ends[0])]]
    for start, end in zip(starts[1:], ends[1:]):
        if start - merged[-1][1] < merge_gap:
            merged[-1][1] = int(end)
        else:
            merged.append([int(start), int(end)])
    out = np.zeros_like(mask, dtype=bool)
    for start, end in merged:
        if end - start >= min_run:
            out[start:end] = True
    return out


def mask_span(mask: np.ndarray) -> int:
    """Bins from the first to the last masked sample, inclusive (0 for an empty mask)."""
    idx = np.flatnonzero(mask)
    return int(idx[-1] - idx[0] + 1) if idx.size else 0


def coarse_localize(
    spectrum: SpectrumSlice,
    window: WindowProfile = WindowProfile(),
    noise_threshold: Optional[float] = None,
    relative_threshold: float = 0.05,
    noise_factor: float = 3.0,
    merge_gap: int = 3,
    min_run: int = 2,
) -> ProjectionFunction:
    """
    Coarse function f^C, mask C_theta and support M_s for every pixel.

    The threshold is noise_threshold when given (absolute, in the units of
    f^C), otherwise max(noise_factor * sigma, relative_threshold * max f^C)
    per pixel, sigma estimated from the samples below the relative level.

    Pixels with an empty mask get support 0 and are flagged unreconstructable.

    Raises:
        ValueError: fewer than 2 coarse frequencies, or not a 0..K-1 prefix.
    """
    count = len(spectrum.frequencies) if window.count is None else min(window.count, len(spectrum.frequencies))
    if count < 2:
        raise ValueError(f"Coarse localization needs N_c >= 2, got {count}")
    _require_prefix(spectrum, count, "Coarse localization")

    length = spectrum.period
    tapered = spectrum.values[:, :count] * window.weights(count)
    coarse = np.fft.irfft(tapered, n=length, axis=1)

    peaks = coarse.max(axis=1)
    global_peak = float(peaks.max()) if peaks.size else 0.0
    pixels = coarse.shape[0]
    mask = np.zeros(coarse.shape, dtype=bool)
    support = np.zeros(pixels, dtype=np.int64)

    sigmas = np.zeros(pixels)
    if noise_threshold is None:
        for p in range(pixels):
            tail = coarse[p][coarse[p] <= relative_threshold * peaks[p]]
            sigmas[p] = tail.std() if tail.size > 1 else 0.0
    floor = max(ROUNDOFF_FLOOR * global_peak, 2.0 * noise_factor * float(np.median(sigmas)))

    for p in range(pixels):
        if peaks[p] <= floor:
            continue
        if noise_threshold is not None:
            threshold = noise_threshold
        else:
            threshold = max(noise_factor * sigmas[p], relative_threshold * peaks[p])
        mask[p] = clean_mask(coarse[p] > threshold, merge_gap, min_run)
        support[p] = mask_span(mask[p])

    empty = int(np.sum(support == 0))
    logger.info(
        "Coarse theta=%g: %d/%d pixels localized, max support %d of %d",
        spectrum.theta_deg, pixels - empty, pixels, int(support.max()) if pixels else 0, length,
    )
    return ProjectionFunction(
        theta=spectrum.theta, values=coarse, mask=mask, support=support,
        scale=spectrum.scale, stage="coarse",
    )


def estimate_fine_period(coarse: ProjectionFunction) -> int:
    """
    M_theta = max M_s over localized pixels.

    Raises:
        ValueError: no pixel was localized.
    """
    if coarse.support is None or not np.any(coarse.support > 0):
        raise ValueError(f"No localized pixel for theta={coarse.theta_deg:g}; cannot size the fine period")
    return int(min(coarse.support.max(), coarse.length))


# ---------------------------------------------------------------------------
# Fine reconstruction
# ---------------------------------------------------------------------------

def fine_reconstruct(fine: SpectrumSlice, coarse: ProjectionFunction) -> ProjectionFunction:
    """
    Slice extension: f = tile(IDFT_M(F_fine)) * C_theta over L bins.

    Missing high fine frequencies are treated as zero. Warns with
    AliasingWarning when any mask spans more than M_theta bins.

    Raises:
        ValueError: fine spectrum not a 0..n-1 prefix (share the coarse DC first).
    """
    period = fine.period
    _require_prefix(fine, 1, "Fine reconstruction")
    if coarse.mask is None or coarse.support is None:
        raise ValueError("Fine reconstruction needs a coarse mask")
    if fine.values.shape[0] != coarse.pixel_count:
        raise ValueError("Fine spectrum and coarse mask cover different pixel counts")

    half = period // 2 + 1
    patch = np.fft.irfft(fine.values[:, :half], n=period, axis=1)
    length = coarse.length
    tiled = patch[:, np.arange(length) % period]
    values = np.where(coarse.mask, tiled, 0.0)

    overflow = int(np.sum(coarse.support > period))
    if overflow:
        message = (
            f"theta={fine.theta_deg:g}: {overflow} coarse masks span more than the "
            f"fine period {period}; reconstruction aliases"
        )
        logger.warning(message)
        warnings.warn(message, AliasingWarning, stacklevel=2)

    return ProjectionFunction(
        theta=fine.theta, values=values, mask=coarse.mask, support=coarse.support,
        scale=fine.scale, stage="fine",
    )


def partial_fine_reconstruct(
    fine: SpectrumSlice,
    coarse: ProjectionFunction,
    eta: float,
    beta: float = DEFAULT_KAISER_BETA,
) -> ProjectionFunction:
    """
    Fine reconstruction from the lowest round(eta * (M_theta//2 + 1)) frequencies.

    Below eta = 1 the retained band is Kaiser-tapered before the inverse DFT
    with beta scaled by (1 - eta), so the taper fades out as the retained
    band approaches the full half spectrum.

    Raises:
        ValueError: eta outside (0, 1], fewer than 2 retained frequencies,
            or the spectrum holds fewer frequencies than retained.
    """
    retained = fine_frequency_count(fine.period, eta)
    if retained < 2:
        raise ValueError(f"Capture ratio {eta} keeps {retained} fine frequency; need >= 2")
    if retained >= fine.period // 2 + 1:
        return fine_reconstruct(fine, coarse)
    _require_prefix(fine, retained, "Partial fine reconstruction")
    weights = kaiser_half_window(retained, beta * (1.0 - eta))
    tapered = SpectrumSlice(
        theta=fine.theta,
        period=fine.period,
        frequencies=list(range(retained)),
        values=fine.values[:, :retained] * weights,
        scale=fine.scale,
        stage=fine.stage,
        camera_shape=fine.camera_shape,
    )
    return fine_reconstruct(tapered, coarse)
