"""Correspondence points from several projection directions.

ransac_match traverses every peak pair of every direction pair (no random
sampling), intersects the two projection lines, and looks for supporting
peaks in the remaining directions. A direction without a peak near the
re-projected offset is excluded from the tuple; that is how a direction
whose peak merges the direct lobe with a collinear speckle gets dropped.
"""

import logging
import math
from itertools import combinations, product
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..config import RANSAC_DIRECTIONS
from ..contracts import EXCLUDED, CandidateMatch, PeakTuple
from ..geometry.lines import (
    DEFAULT_RANK_TOLERANCE,
    DegenerateGeometryError,
    intersect_projection_lines,
    point_line_distance,
    project_point,
)
from ..geometry.rig import StereoRig
from .peaks import PeakList

logger = logging.getLogger(__name__)

DEFAULT_RANSAC_TOLERANCE = 0.5
DEFAULT_EPIPOLAR_TOLERANCE = 1.0


def _check_ransac_directions(peaks: Sequence[PeakList]) -> None:
    degrees = [pl.theta_deg for pl in peaks]
    if len(peaks) != len(RANSAC_DIRECTIONS) or not all(
        math.isclose(d, e, abs_tol=1e-6) for d, e in zip(degrees, RANSAC_DIRECTIONS)
    ):
        raise ValueError(f"RANSAC matching needs directions {RANSAC_DIRECTIONS} in order, got {degrees}")


def _fit_tuple(
    peaks: Sequence[PeakList],
    indices: Sequence[int],
    rank_tolerance: Optional[float],
) -> Optional[Tuple[Tuple[float, float], float, float]]:
    """Least-squares point of the valid directions: (point, max residual, mean amplitude)."""
    valid = [d for d, j in enumerate(indices) if j != EXCLUDED]
    lines = [(peaks[d].theta, peaks[d].positions[indices[d]]) for d in valid]
    point = intersect_projection_lines(lines, rank_tolerance=rank_tolerance)
    if point is None:
        return None
    residual = max(abs(project_point(theta, point) - rho) for theta, rho in lines)
    amplitude = float(np.mean([peaks[d].amplitudes[indices[d]] for d in valid]))
    return point, residual, amplitude


def _drop_subsumed(matches: List[CandidateMatch]) -> List[CandidateMatch]:
    return [
        m for m in matches
        if not any(o is not m and o.source.subsumes(m.source) for o in matches)
    ]


def ransac_match(
    peaks: Sequence[PeakList],
    rig: StereoRig,
    camera_pixel: Tuple[int, int],
    tolerance: float = DEFAULT_RANSAC_TOLERANCE,
    epipolar_tolerance: float = DEFAULT_EPIPOLAR_TOLERANCE,
    rank_tolerance: Optional[float] = DEFAULT_RANK_TOLERANCE,
    keep_pair_tuples: bool = False,
) -> List[CandidateMatch]:
    """
    Four-direction intersection with per-direction exclusion.

    Args:
        peaks: PeakLists for 0, 45, 90 and 135 deg, in that order
        tolerance: epsilon_R, re-projection window in pixels
        epipolar_tolerance: max distance of a pair intersection to the epipolar line
        keep_pair_tuples: keep tuples whose two other directions are both excluded

    Returns:
        One CandidateMatch per distinct surviving tuple, in traversal order.
        Tuples whose valid entries are contained in a tuple with more valid
        entries are dropped.

    Raises:
        ValueError: directions are not 0, 45, 90, 135 deg.
    """
    _check_ransac_directions(peaks)
    epipolar = rig.epipolar_line(camera_pixel)
    seen = set()
    matches: List[CandidateMatch] = []

    for first, second in combinations(range(len(peaks)), 2):
        others = [d for d in range(len(peaks)) if d not in (first, second)]
        for i, j in product(range(peaks[first].count), range(peaks[second].count)):
            try:
                point = intersect_projection_lines(
                    [(peaks[first].theta, peaks[first].positions[i]),
                     (peaks[second].theta, peaks[second].positions[j])],
                    rank_tolerance=None,
                )
            except DegenerateGeometryError:
                continue
            if point is None or point_line_distance(point, epipolar) > epipolar_tolerance:
                continue

            indices = [EXCLUDED] * len(peaks)
            indices[first], indices[second] = i, j
            for d in others:
                k, distance = peaks[d].nearest(project_point(peaks[d].theta, point))
                indices[d] = k if distance <= tolerance else EXCLUDED
            key = PeakTuple(tuple(indices))
            if key.consensus == 2 and not keep_pair_tuples:
                continue
            if key in seen:
                continue
            seen.add(key)

            fit = _fit_tuple(peaks, indices, rank_tolerance)
            if fit is None:
                continue
            final, residual, amplitude = fit
            if residual > tolerance:
                continue
            distance = point_line_distance(final, epipolar)
            if distance > epipolar_tolerance:
                continue
            matches.append(CandidateMatch(
                camera_pixel=tuple(camera_pixel),
                projector_point=final,
                source=key,
                epipolar_residual=distance,
                consensus=key.consensus,
                reprojection_residual=residual,
                amplitude=amplitude,
                strategy="ransac4",
            ))

    matches = _drop_subsumed(matches)
    logger.debug("Pixel %s: %d RANSAC matches", camera_pixel, len(matches))
    return matches


def naive_intersection(
    peaks: Sequence[PeakList],
    rig: Optional[StereoRig] = None,
    camera_pixel: Optional[Tuple[int, int]] = None,
) -> Optional[CandidateMatch]:
    """
    Strongest peak of every direction, all lines intersected by least squares.

    No exclusion and no rank test: a mixed peak in one direction pulls the
    point away from the direct correspondence. Returns None when a direction
    has no peak.
    """
    if any(pl.count == 0 for pl in peaks):
        return None
    indices = [pl.strongest() for pl in peaks]
    fit = _fit_tuple(peaks, indices, rank_tolerance=None)
    if fit is None:
        return None
    point, residual, amplitude = fit
    distance = 0.0
    if rig is not None and camera_pixel is not None:
        distance = point_line_distance(point, rig.epipolar_line(camera_pixel))
    return CandidateMatch(
        camera_pixel=tuple(camera_pixel) if camera_pixel is not None else (-1, -1),
        projector_point=point,
        source=PeakTuple(tuple(indices)),
        epipolar_residual=distance,
        consensus=len(peaks),
        reprojection_residual=residual,
        amplitude=amplitude,
        strategy="naive",
    )


def three_direction_match(
    peaks: Sequence[PeakList],
    rig: StereoRig,
    camera_pixel: Tuple[int, int],
    tolerance: float = DEFAULT_RANSAC_TOLERANCE,
    epipolar_tolerance: float = DEFAULT_EPIPOLAR_TOLERANCE,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> List[CandidateMatch]:
    """
    Every peak combination of three directions, kept when the three lines
    meet (rank test, then every line within tolerance of the least-squares
    point) near the epipolar line. Mixed peaks are not detected.

    Raises:
        ValueError: not exactly three directions.
        DegenerateGeometryError: all three directions equal.
    """
    if len(peaks) != 3:
        raise ValueError(f"Three-direction matching needs 3 PeakLists, got {len(peaks)}")
    epipolar = rig.epipolar_line(camera_pixel)
    matches: List[CandidateMatch] = []
    for indices in product(*(range(pl.count) for pl in peaks)):
        fit = _fit_tuple(peaks, indices, rank_tolerance)
        if fit is None:
            continue
        point, residual, amplitude = fit
        if residual > tolerance:
            continue
        distance = point_line_distance(point, epipolar)
        if distance > epipolar_tolerance:
            continue
        matches.append(CandidateMatch(
            camera_pixel=tuple(camera_pixel),
            projector_point=point,
            source=PeakTuple(tuple(indices)),
            epipolar_residual=distance,
            consensus=3,
            reprojection_residual=residual,
            amplitude=amplitude,
            strategy="three_direction",
        ))
    logger.debug("Pixel %s: %d three-direction matches", camera_pixel, len(matches))
    return matches
