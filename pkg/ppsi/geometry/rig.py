"""Synthetic projector-camera rig.

The rig is two pinhole devices with parallel optical axes and a horizontal
baseline: the camera sits at the origin, the projector at (baseline, 0, 0)
in millimetres. Epipolar lines in the projector plane are therefore
horizontal. Everything here is a pure function of read-only rig data.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional, Tuple

import numpy as np

from .lines import DegenerateGeometryError, normalize_line

logger = logging.getLogger(__name__)

MIN_RAY_ANGLE_RAD = 1e-6


@dataclass(frozen=True)
class DeviceSpec:
    """Raster sizes. M, N are the projector columns and rows."""
    projector_cols: int
    projector_rows: int
    camera_cols: int
    camera_rows: int

    def __post_init__(self):
        for name in ("projector_cols", "projector_rows", "camera_cols", "camera_rows"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"DeviceSpec.{name} must be >= 1")

    @property
    def M(self) -> int:
        return self.projector_cols

    @property
    def N(self) -> int:
        return self.projector_rows

    @property
    def camera_pixel_count(self) -> int:
        return self.camera_cols * self.camera_rows

    def to_dict(self) -> Dict[str, int]:
        return {
            "projector_cols": self.projector_cols,
            "projector_rows": self.projector_rows,
            "camera_cols": self.camera_cols,
            "camera_rows": self.camera_rows,
        }


@dataclass
class TriangulatedPoint:
    point: np.ndarray          # (3,) millimetres, camera frame
    residual_px: float         # max reprojection error over both devices


def _intrinsics(focal: float, cx: float, cy: float) -> np.ndarray:
    return np.array([[focal, 0.0, cx], [0.0, focal, cy], [0.0, 0.0, 1.0]])


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def _center(P: np.ndarray) -> np.ndarray:
    M = P[:, :3]
    return -np.linalg.solve(M, P[:, 3])


def project(P: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Forward projection of 3D point(s) (..., 3) to pixels (..., 2)."""
    point = np.asarray(point, dtype=np.float64)
    homo = np.concatenate([point, np.ones(point.shape[:-1] + (1,))], axis=-1)
    x = homo @ P.T
    return x[..., :2] / x[..., 2:3]


def triangulate_rays(
    P_a: np.ndarray,
    pixel_a: Tuple[float, float],
    P_b: np.ndarray,
    pixel_b: Tuple[float, float],
) -> TriangulatedPoint:
    """
    Midpoint triangulation of two back-projected rays.

    Raises:
        DegenerateGeometryError: rays closer than MIN_RAY_ANGLE_RAD to parallel.
    """
    c_a, c_b = _center(P_a), _center(P_b)
    d_a = np.linalg.solve(P_a[:, :3], np.array([pixel_a[0], pixel_a[1], 1.0]))
    d_b = np.linalg.solve(P_b[:, :3], np.array([pixel_b[0], pixel_b[1], 1.0]))
    d_a /= np.linalg.norm(d_a)
    d_b /= np.linalg.norm(d_b)

    angle = math.acos(min(1.0, abs(float(d_a @ d_b))))
    if angle < MIN_RAY_ANGLE_RAD:
        raise DegenerateGeometryError(f"Rays are near-parallel (angle {angle:.3g} rad)")

    # closest points c_a + s d_a and c_b + t d_b
    A = np.stack([d_a, -d_b], axis=1)
    s, t = np.linalg.solve(A.T @ A, A.T @ (c_b - c_a))
    point = 0.5 * ((c_a + s * d_a) + (c_b + t * d_b))

    residual = max(
        float(np.linalg.norm(project(P_a, point) - np.asarray(pixel_a, dtype=np.float64))),
        float(np.linalg.norm(project(P_b, point) - np.asarray(pixel_b, dtype=np.float64))),
    )
    return TriangulatedPoint(point=point, residual_px=residual)


@dataclass
class StereoRig:
    """
    Projector-camera pair described by two 3x4 projection matrices.

    Attributes:
        device: Raster sizes of both devices
        camera_matrix: 3x4 camera projection (focal in pixels, mm world units)
        projector_matrix: 3x4 projector projection
    """
    device: DeviceSpec
    camera_matrix: np.ndarray
    projector_matrix: np.ndarray
    params: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def rectified(
        cls,
        device: DeviceSpec,
        focal_px: float,
        baseline_mm: float,
        camera_principal: Optional[Tuple[float, float]] = None,
        projector_principal: Optional[Tuple[float, float]] = None,
        projector_focal_px: Optional[float] = None,
        vertical_offset: float = 0.0,
    ) -> "StereoRig":
        """
        Build the parallel-axis rig.

        With equal focal lengths the epipolar line of camera row v is the
        projector row v + vertical_offset (when the principal points share a
        row). vertical_offset shifts the projector principal point.
        """
        cam_cx, cam_cy = camera_principal or ((device.camera_cols - 1) / 2.0, (device.camera_rows - 1) / 2.0)
        if projector_principal is None:
            proj_cx, proj_cy = cam_cx, cam_cy
        else:
            proj_cx, proj_cy = projector_principal
        proj_cy += vertical_offset
        f_p = projector_focal_px or focal_px

        K_c = _intrinsics(focal_px, cam_cx, cam_cy)
        K_p = _intrinsics(f_p, proj_cx, proj_cy)
        P_c = K_c @ np.hstack([np.eye(3), np.zeros((3, 1))])
        P_p = K_p @ np.hstack([np.eye(3), -np.array([[baseline_mm], [0.0], [0.0]])])
        params = {
            "focal_px": focal_px,
            "projector_focal_px": f_p,
            "baseline_mm": baseline_mm,
            "camera_cx": cam_cx,
            "camera_cy": cam_cy,
            "projector_cx": proj_cx,
            "projector_cy": proj_cy,
        }
        return cls(device=device, camera_matrix=P_c, projector_matrix=P_p, params=params)

    @classmethod
    def from_dict(cls, device: DeviceSpec, data: Dict[str, float]) -> "StereoRig":
        cam = data.get("camera_principal")
        proj = data.get("projector_principal")
        return cls.rectified(
            device,
            focal_px=float(data["focal_px"]),
            baseline_mm=float(data["baseline_mm"]),
            camera_principal=tuple(cam) if cam is not None else None,
            projector_principal=tuple(proj) if proj is not None else None,
            projector_focal_px=data.get("projector_focal_px"),
            vertical_offset=float(data.get("vertical_offset", 0.0)),
        )

    @cached_property
    def fundamental(self) -> np.ndarray:
        """F with l' = F x mapping camera pixels to projector epipolar lines."""
        camera_center = np.append(_center(self.camera_matrix), 1.0)
        epipole = self.projector_matrix @ camera_center
        return _skew(epipole) @ self.projector_matrix @ np.linalg.pinv(self.camera_matrix)

    def _check_pixel(self, camera_pixel: Tuple[int, int]) -> None:
        u, v = camera_pixel
        if not (0 <= u < self.device.camera_cols and 0 <= v < self.device.camera_rows):
            raise IndexError(
                f"Camera pixel {camera_pixel} outside raster "
                f"{self.device.camera_cols}x{self.device.camera_rows}"
            )

    def epipolar_line(self, camera_pixel: Tuple[int, int]) -> Tuple[float, float, float]:
        """
        Projector-plane epipolar line (a, b, c) of a camera pixel, with
        a^2 + b^2 = 1 and b >= 0.

        Raises:
            IndexError: pixel outside the camera raster.
        """
        self._check_pixel(camera_pixel)
        u, v = camera_pixel
        line = self.fundamental @ np.array([u, v, 1.0], dtype=np.float64)
        a, b, c = normalize_line(line)
        if b < 0 or (b == 0 and a < 0):
            a, b, c = -a, -b, -c
        return (0.0 if a == 0 else a), b, c

    @cached_property
    def epipolar_lines(self) -> np.ndarray:
        """All camera pixels' lines, shape (camera_rows, camera_cols, 3)."""
        out = np.empty((self.device.camera_rows, self.device.camera_cols, 3))
        for v in range(self.device.camera_rows):
            for u in range(self.device.camera_cols):
                out[v, u] = self.epipolar_line((u, v))
        return out

    def project_camera(self, point: np.ndarray) -> np.ndarray:
        return project(self.camera_matrix, point)

    def project_projector(self, point: np.ndarray) -> np.ndarray:
        return project(self.projector_matrix, point)

    def camera_ray(self, camera_pixel: Tuple[float, float]) -> Tuple[np.ndarray, np.ndarray]:
        """(origin, unit direction) of the camera ray through a pixel."""
        origin = _center(self.camera_matrix)
        d = np.linalg.solve(self.camera_matrix[:, :3], np.array([camera_pixel[0], camera_pixel[1], 1.0]))
        return origin, d / np.linalg.norm(d)

    def triangulate(
        self,
        camera_pixel: Tuple[float, float],
        projector_point: Tuple[float, float],
    ) -> TriangulatedPoint:
        """
        3D point (mm) from a camera pixel and its projector correspondence.

        Raises:
            ValueError: non-finite projector point.
            DegenerateGeometryError: near-parallel rays.
        """
        if not all(math.isfinite(x) for x in projector_point):
            raise ValueError(f"Projector point {projector_point} is not finite")
        return triangulate_rays(self.camera_matrix, camera_pixel, self.projector_matrix, projector_point)

    def to_dict(self) -> Dict[str, object]:
        """Scene-file form; the vertical offset is folded into the projector principal point."""
        p = self.params
        return {
            "focal_px": p["focal_px"],
            "projector_focal_px": p["projector_focal_px"],
            "baseline_mm": p["baseline_mm"],
            "camera_principal": [p["camera_cx"], p["camera_cy"]],
            "projector_principal": [p["projector_cx"], p["projector_cy"]],
        }
