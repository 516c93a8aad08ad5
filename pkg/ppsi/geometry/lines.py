"""Projection lines in the projector plane and their intersection.

A projection line of direction theta and offset rho is the set
    u' cos(theta) + v' sin(theta) = rho
and is stored homogeneously as (cos(theta), sin(theta), -rho). Several such
lines are intersected by taking the null vector of the stacked matrix.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_RANK_TOLERANCE = 1e-3
_DIRECTION_EPS = 1e-12
_AT_INFINITY_EPS = 1e-12


class DegenerateGeometryError(ValueError):
    """Identical directions, parallel line pairs or near-parallel rays."""


@dataclass(frozen=True)
class Line2D:
    """Projection line x*cos(theta) + y*sin(theta) = rho, with 0 <= theta < pi."""
    theta: float
    rho: float

    def __post_init__(self):
        if not 0.0 <= self.theta < math.pi:
            raise ValueError(f"Line direction {self.theta} outside [0, pi)")

    def coefficients(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta), -self.rho])


def project_point(theta: float, point: Tuple[float, float]) -> float:
    """rho = u' cos(theta) + v' sin(theta)."""
    return math.cos(theta) * point[0] + math.sin(theta) * point[1]


def normalize_line(coeffs: Sequence[float]) -> Tuple[float, float, float]:
    """Scale (a, b, c) so that a^2 + b^2 = 1."""
    a, b, c = (float(x) for x in coeffs)
    norm = math.hypot(a, b)
    if norm == 0.0:
        raise DegenerateGeometryError("Line coefficients a and b are both zero")
    return a / norm, b / norm, c / norm


def point_line_distance(point: Tuple[float, float], line: Sequence[float]) -> float:
    a, b, c = normalize_line(line)
    return abs(a * point[0] + b * point[1] + c)


def _as_rows(lines) -> np.ndarray:
    rows = []
    for line in lines:
        if isinstance(line, Line2D):
            rows.append(line.coefficients())
        elif len(line) == 3:
            rows.append([float(x) for x in line])
        else:
            theta, rho = line
            rows.append([math.cos(theta), math.sin(theta), -float(rho)])
    return np.asarray(rows, dtype=np.float64)


def intersect_projection_lines(
    lines,
    rank_tolerance: Optional[float] = DEFAULT_RANK_TOLERANCE,
) -> Optional[Tuple[float, float]]:
    """
    Intersect a bundle of projection lines.

    Args:
        lines: Sequence of Line2D, (theta, rho) pairs or homogeneous (a, b, c)
            rows, at least two.
        rank_tolerance: Relative tolerance on the smallest singular value of
            the stacked matrix. Bundles whose smallest singular value exceeds
            rank_tolerance * largest are reported as having no common point.
            None disables the check (plain least squares).

    Returns:
        (u', v') or None when the bundle has no consistent intersection.

    Raises:
        DegenerateGeometryError: fewer than two lines, or all directions equal.
    """
    rows = _as_rows(lines)
    if rows.shape[0] < 2:
        raise DegenerateGeometryError("At least two projection lines are required")

    directions = rows[:, :2]
    cross = directions[:, 0][:, None] * directions[:, 1][None, :] - directions[:, 1][:, None] * directions[:, 0][None, :]
    if np.all(np.abs(cross) < _DIRECTION_EPS):
        raise DegenerateGeometryError("All projection lines share one direction")

    return _null_point(rows, rank_tolerance)


def _null_point(rows: np.ndarray, rank_tolerance: Optional[float]) -> Optional[Tuple[float, float]]:
    _, s, vt = np.linalg.svd(rows, full_matrices=True)
    if rank_tolerance is not None and rows.shape[0] >= 3:
        if s[-1] > rank_tolerance * s[0]:
            logger.debug("Rejected bundle: sigma_min=%.3g sigma_max=%.3g", s[-1], s[0])
            return None
    x = vt[-1]
    if abs(x[2]) < _AT_INFINITY_EPS * np.linalg.norm(x):
        return None
    return float(x[0] / x[2]), float(x[1] / x[2])


def intersect_two_lines(first: Sequence[float], second: Sequence[float]) -> Tuple[float, float]:
    """
    Homogeneous intersection of two lines given as (a, b, c).

    Raises:
        DegenerateGeometryError: the lines are parallel.
    """
    x = np.cross(np.asarray(first, dtype=np.float64), np.asarray(second, dtype=np.float64))
    scale = max(np.linalg.norm(first[:2]), 1e-300) * max(np.linalg.norm(second[:2]), 1e-300)
    if abs(x[2]) < _DIRECTION_EPS * scale:
        raise DegenerateGeometryError("Lines are parallel")
    return float(x[0] / x[2]), float(x[1] / x[2])
