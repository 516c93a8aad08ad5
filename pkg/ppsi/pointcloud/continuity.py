"""Continuity filtering of point clouds.

Points closer than r_th are adjacent; connected components under that
adjacency are split domains. Only domains with more than N_th points
survive, which removes the sparse virtually matched points produced by
global-illumination peaks.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
from scipy.spatial import cKDTree

from .cloud import PointCloud

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ContinuityParams:
    """
    Attributes:
        radius: r_th adjacency radius in mm
        min_points: N_th; a domain is kept only with strictly more points
    """
    radius: float = 1.0
    min_points: int = 200

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"Continuity radius must be > 0, got {self.radius}")
        if self.min_points < 1:
            raise ValueError(f"Continuity minimum must be >= 1, got {self.min_points}")

    def to_dict(self) -> Dict[str, Any]:
        return {"radius_mm": self.radius, "min_points": self.min_points}


def connected_components(points: np.ndarray, radius: float) -> np.ndarray:
    """
    Component label per point (0..n_components-1, in seed order).

    Breadth-first flood fill over kd-tree radius queries; each point is
    enqueued exactly once.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    labels = np.full(points.shape[0], -1, dtype=np.int64)
    if points.shape[0] == 0:
        return labels
    tree = cKDTree(points)
    queue = deque()
    component = 0
    for seed in range(points.shape[0]):
        if labels[seed] >= 0:
            continue
        labels[seed] = component
        queue.append(seed)
        while queue:
            current = queue.popleft()
            for neighbour in tree.query_ball_point(points[current], radius):
                if labels[neighbour] < 0:
                    labels[neighbour] = component
                    queue.append(neighbour)
        component += 1
    return labels


def union_find_components(points: np.ndarray, radius: float) -> np.ndarray:
    """
    O(n^2) union-find labelling, same label order as connected_components.

    Reference partition for small clouds.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = points.shape[0]
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        distances = np.linalg.norm(points[i + 1:] - points[i], axis=1)
        for offset in np.flatnonzero(distances <= radius):
            a, b = find(i), find(i + 1 + int(offset))
            if a != b:
                parent[max(a, b)] = min(a, b)

    labels = np.full(n, -1, dtype=np.int64)
    roots: Dict[int, int] = {}
    for i in range(n):
        root = find(i)
        if root not in roots:
            roots[root] = len(roots)
        labels[i] = roots[root]
    return labels


def continuity_filter(cloud: PointCloud, params: ContinuityParams = ContinuityParams()) -> PointCloud:
    """Union of the connected components with more than params.min_points points."""
    if len(cloud) == 0:
        return cloud
    labels = connected_components(cloud.points, params.radius)
    sizes = np.bincount(labels)
    keep_labels = np.flatnonzero(sizes > params.min_points)
    keep = np.flatnonzero(np.isin(labels, keep_labels))
    logger.info(
        "Continuity filter (r=%.3g mm, N>%d): %d components, kept %d of %d points",
        params.radius, params.min_points, sizes.size, keep.size, len(cloud),
    )
    return cloud.subset(keep)
