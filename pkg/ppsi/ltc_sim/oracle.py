"""Brute-force discrete Radon transform of pixel transport images.

Bins each projector pixel to its projection-line index and sums. This is the
ground truth every reconstruction path is checked against.
"""

from functools import lru_cache

import numpy as np
from scipy import sparse

from ..patterns.generator import projection_index, projection_length
from .scene import SceneModel


def radon_oracle(pti: np.ndarray, theta: float) -> np.ndarray:
    """
    Projection function f_theta(rho) of one PTI, length L.

    Args:
        pti: (N, M) nonnegative array
        theta: direction in [0, pi)
    """
    pti = np.asarray(pti, dtype=np.float64)
    rows, cols = pti.shape
    index = projection_index(theta, cols, rows)
    length = projection_length(theta, cols, rows)
    return np.bincount(index.ravel(), weights=pti.ravel(), minlength=length)


@lru_cache(maxsize=16)
def binning_matrix(theta: float, M: int, N: int) -> sparse.csr_matrix:
    """Sparse (M*N, L) 0/1 matrix mapping raster pixels to their projection bins."""
    index = projection_index(theta, M, N).ravel()
    length = projection_length(theta, M, N)
    return sparse.csr_matrix(
        (np.ones(index.size), (np.arange(index.size), index)), shape=(M * N, length)
    )


def projected_transport(scene: SceneModel, theta: float) -> np.ndarray:
    """
    Oracle projection functions of every camera pixel, shape (camera pixels, L).

    Row p is radon_oracle(rasterize_ltc(scene, pixel_of(p)), theta).
    """
    device = scene.device
    B = binning_matrix(float(theta), device.M, device.N)
    return np.asarray((scene.transport_matrix @ B).todense())
