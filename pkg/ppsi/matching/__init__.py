"""Peak extraction and correspondence resolution."""

from .peaks import DEFAULT_PEAK_RELATIVE_THRESHOLD, PeakList, direction_peaks, find_peaks
from .ransac import (
    DEFAULT_EPIPOLAR_TOLERANCE,
    DEFAULT_RANSAC_TOLERANCE,
    naive_intersection,
    ransac_match,
    three_direction_match,
)
from .unidirectional import epipolar_filter, unidirectional_match

__all__ = [
    "DEFAULT_PEAK_RELATIVE_THRESHOLD",
    "PeakList",
    "direction_peaks",
    "find_peaks",
    "DEFAULT_EPIPOLAR_TOLERANCE",
    "DEFAULT_RANSAC_TOLERANCE",
    "naive_intersection",
    "ransac_match",
    "three_direction_match",
    "epipolar_filter",
    "unidirectional_match",
]
