"""Subpixel local maxima of projection functions."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import signal

from ..geometry.rig import DeviceSpec
from ..patterns.generator import projection_pitch, rho_offset
from ..recon.lse import ProjectionFunction

logger = logging.getLogger(__name__)

DEFAULT_PEAK_RELATIVE_THRESHOLD = 0.1


@dataclass
class PeakList:
    """
    Local maxima of one projection function.

    Attributes:
        theta: Direction in radians
        positions: Geometric offsets rho (pixels along the direction line), increasing
        amplitudes: Function value at each integer maximum
    """
    theta: float
    positions: np.ndarray = field(default_factory=lambda: np.empty(0))
    amplitudes: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.float64)

    @property
    def count(self) -> int:
        return int(self.positions.size)

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta)

    def strongest(self) -> Optional[int]:
        return int(np.argmax(self.amplitudes)) if self.count else None

    def nearest(self, rho: float) -> Tuple[int, float]:
        """(index, |distance|) of the peak closest to rho; (-1, inf) when empty."""
        if not self.count:
            return -1, math.inf
        distances = np.abs(self.positions - rho)
        j = int(np.argmin(distances))
        return j, float(distances[j])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theta_deg": round(self.theta_deg, 9),
            "positions": self.positions.tolist(),
            "amplitudes": self.amplitudes.tolist(),
        }


def _half_height_run(f: np.ndarray, index: int) -> Tuple[int, int]:
    """Inclusive bounds of the contiguous run around index with f >= f[index] / 2."""
    half = f[index] / 2.0
    lo = index
    while lo > 0 and f[lo - 1] >= half:
        lo -= 1
    hi = index
    while hi < f.size - 1 and f[hi + 1] >= half:
        hi += 1
    return lo, hi


def find_peaks(
    values: np.ndarray,
    theta: float,
    threshold: Optional[float] = None,
    relative_threshold: float = DEFAULT_PEAK_RELATIVE_THRESHOLD,
    offset: int = 0,
    pitch: float = 1.0,
) -> PeakList:
    """
    Integer local maxima above threshold, refined by a grayscale centroid.

    The centroid runs over the contiguous samples >= half the peak value,
    weighted by their height above that half level. Maxima sharing one
    half-height run are reported once. Bin positions are converted to
    geometric rho = (bin - offset) * pitch.

    Args:
        values: Masked projection function (one pixel)
        threshold: Absolute height threshold; default relative_threshold * max
    """
    f = np.asarray(values, dtype=np.float64)
    top = float(f.max()) if f.size else 0.0
    if top <= 0.0:
        return PeakList(theta=theta)
    height = threshold if threshold is not None else relative_threshold * top

    candidates, props = signal.find_peaks(f, height=height)
    positions: List[float] = []
    amplitudes: List[float] = []
    for index in candidates[np.argsort(-props["peak_heights"], kind="stable")]:
        lo, hi = _half_height_run(f, int(index))
        if any(lo <= (p / pitch + offset) <= hi for p in positions):
            continue
        weights = f[lo:hi + 1] - f[index] / 2.0
        bins = np.arange(lo, hi + 1, dtype=np.float64)
        total = weights.sum()
        centroid = float(bins @ weights / total) if total > 0 else float(index)
        positions.append((centroid - offset) * pitch)
        amplitudes.append(float(f[index]))

    order = np.argsort(positions)
    return PeakList(
        theta=theta,
        positions=np.asarray(positions)[order],
        amplitudes=np.asarray(amplitudes)[order],
    )


def direction_peaks(
    projection: ProjectionFunction,
    device: DeviceSpec,
    threshold: Optional[float] = None,
    relative_threshold: float = DEFAULT_PEAK_RELATIVE_THRESHOLD,
) -> List[PeakList]:
    """PeakList per camera pixel (row-major) for one direction; unreconstructable pixels get empty lists."""
    offset = rho_offset(projection.theta, device.M, device.N)
    pitch = projection_pitch(projection.theta)
    masked = projection.masked()
    ok = projection.reconstructable
    out = []
    for p in range(projection.pixel_count):
        if not ok[p]:
            out.append(PeakList(theta=projection.theta))
            continue
        out.append(find_peaks(masked[p], projection.theta, threshold, relative_threshold, offset, pitch))
    logger.info(
        "Peaks theta=%g: %d peaks over %d pixels",
        projection.theta_deg, sum(pl.count for pl in out), projection.pixel_count,
    )
    return out
