"""Synthetic rectified projector-camera geometry."""

from .lines import (
    DegenerateGeometryError,
    Line2D,
    intersect_projection_lines,
    intersect_two_lines,
    normalize_line,
    point_line_distance,
    project_point,
)
from .rig import DeviceSpec, StereoRig, TriangulatedPoint, project, triangulate_rays

__all__ = [
    "DegenerateGeometryError",
    "Line2D",
    "intersect_projection_lines",
    "intersect_two_lines",
    "normalize_line",
    "point_line_distance",
    "project_point",
    "DeviceSpec",
    "StereoRig",
    "TriangulatedPoint",
    "project",
    "triangulate_rays",
]
