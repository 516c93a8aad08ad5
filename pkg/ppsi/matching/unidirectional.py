"""Single-direction matching against the epipolar line."""

import logging
from dataclasses import replace
from typing import List, Sequence, Tuple

from ..contracts import CandidateMatch
from ..geometry.lines import DegenerateGeometryError, Line2D, intersect_two_lines, point_line_distance
from ..geometry.rig import StereoRig
from .peaks import PeakList

logger = logging.getLogger(__name__)


def unidirectional_match(
    peaks: PeakList,
    epipolar_line: Sequence[float],
    camera_pixel: Tuple[int, int] = (-1, -1),
) -> List[CandidateMatch]:
    """
    One candidate per peak: its projection line crossed with the epipolar line.

    Every candidate is kept; virtual matches from global illumination are
    removed later by the continuity filter. Peaks whose projection line is
    parallel to the epipolar line are skipped and logged.
    """
    matches: List[CandidateMatch] = []
    for j, rho in enumerate(peaks.positions):
        line = Line2D(peaks.theta, float(rho)).coefficients()
        try:
            point = intersect_two_lines(line, epipolar_line)
        except DegenerateGeometryError:
            logger.warning("Pixel %s: peak %d parallel to the epipolar line, skipped", camera_pixel, j)
            continue
        matches.append(CandidateMatch(
            camera_pixel=tuple(camera_pixel),
            projector_point=point,
            epipolar_residual=point_line_distance(point, epipolar_line),
            consensus=1,
            amplitude=float(peaks.amplitudes[j]),
            strategy="unidirectional",
        ))
    return matches


def epipolar_filter(
    candidates: Sequence[CandidateMatch],
    rig: StereoRig,
    camera_pixel: Tuple[int, int],
    tolerance: float = 1.0,
) -> List[CandidateMatch]:
    """
    Keep candidates within tolerance pixels of the camera pixel's epipolar line.

    Kept candidates are copies carrying the residual to that line; the inputs
    are left untouched.
    """
    line = rig.epipolar_line(camera_pixel)
    kept = []
    for candidate in candidates:
        distance = point_line_distance(candidate.projector_point, line)
        if distance <= tolerance:
            kept.append(replace(candidate, epipolar_residual=distance))
    return kept
