"""Triangulated point clouds, continuity filtering and shape fits."""

from .cloud import PointCloud, build_cloud
from .continuity import ContinuityParams, connected_components, continuity_filter, union_find_components
from .fitting import PlaneFit, SphereFit, cloud_distance_rms, fit_plane_rms, fit_sphere

__all__ = [
    "PointCloud",
    "build_cloud",
    "ContinuityParams",
    "connected_components",
    "continuity_filter",
    "union_find_components",
    "PlaneFit",
    "SphereFit",
    "cloud_distance_rms",
    "fit_plane_rms",
    "fit_sphere",
]
