"""Least-squares plane and sphere fits used to score reconstructions."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial import cKDTree

logger = logging.getLogger(__name__)


@dataclass
class PlaneFit:
    """n . x = d with |n| = 1."""
    normal: np.ndarray
    offset: float
    rms: float

    def to_dict(self) -> Dict[str, Any]:
        return {"normal": self.normal.tolist(), "offset_mm": self.offset, "rms_mm": self.rms}


@dataclass
class SphereFit:
    center: np.ndarray
    diameter: float
    rms: float

    def to_dict(self) -> Dict[str, Any]:
        return {"center": self.center.tolist(), "diameter_mm": self.diameter, "rms_mm": self.rms}


def _points(points, minimum: int, what: str) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if pts.shape[0] < minimum:
        raise ValueError(f"{what} fit needs >= {minimum} points, got {pts.shape[0]}")
    return pts


def fit_plane_rms(points) -> Tuple[PlaneFit, float]:
    """
    Total least-squares plane and the RMS of orthogonal residuals (mm).

    Raises:
        ValueError: fewer than 3 points, or collinear points.
    """
    pts = _points(points, 3, "Plane")
    centroid = pts.mean(axis=0)
    _, s, vt = np.linalg.svd(pts - centroid, full_matrices=False)
    if s[1] <= 1e-12 * max(s[0], 1e-300):
        raise ValueError("Plane fit is degenerate: points are collinear")
    normal = vt[-1]
    offset = float(normal @ centroid)
    rms = float(np.sqrt(np.mean((pts @ normal - offset) ** 2)))
    return PlaneFit(normal=normal, offset=offset, rms=rms), rms


def fit_sphere(points) -> SphereFit:
    """
    Sphere through the points: algebraic solve of |x|^2 = 2 c.x + k, then
    geometric refinement of the orthogonal distances.

    Raises:
        ValueError: fewer than 4 points, or coplanar points.
    """
    pts = _points(points, 4, "Sphere")
    A = np.hstack([2.0 * pts, np.ones((pts.shape[0], 1))])
    b = np.sum(pts ** 2, axis=1)
    solution, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < 4:
        raise ValueError("Sphere fit is degenerate: points are coplanar")
    center = solution[:3]
    radius = float(np.sqrt(solution[3] + center @ center))

    def residuals(params: np.ndarray) -> np.ndarray:
        return np.linalg.norm(pts - params[:3], axis=1) - params[3]

    refined = least_squares(residuals, np.append(center, radius), method="lm")
    center, radius = refined.x[:3], float(abs(refined.x[3]))
    rms = float(np.sqrt(np.mean(residuals(np.append(center, radius)) ** 2)))
    return SphereFit(center=center, diameter=2.0 * radius, rms=rms)


def cloud_distance_rms(reference, test) -> float:
    """RMS of nearest-neighbour distances from each test point to the reference cloud."""
    ref = _points(reference, 1, "Cloud distance")
    tst = _points(test, 1, "Cloud distance")
    distances, _ = cKDTree(ref).query(tst)
    return float(np.sqrt(np.mean(distances ** 2)))
