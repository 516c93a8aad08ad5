"""Phase-sum spectrum assembly.

    F_theta(k) = sum_i I_i cos(2 pi i / S) + j sum_i I_i sin(2 pi i / S)

For S >= 3 the phase sum annihilates O(u, v) and the pattern mean, leaving
(S b / 2) times the unnormalized forward DFT of the projection function.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from ..ltc_sim.render import IncompleteStackError, IntensityStack, StackBlock


@dataclass
class SpectrumSlice:
    """
    Attributes:
        theta: Direction in radians
        period: L (coarse/full) or M_theta (fine)
        frequencies: Captured k, ascending
        values: (pixels, len(frequencies)) complex, pixels camera row-major
        scale: S*b/2, the factor between F and the DFT of the projection function
        stage: Capture stage the slice came from
    """
    theta: float
    period: int
    frequencies: List[int]
    values: np.ndarray
    scale: float = 1.0
    stage: str = "coarse"
    camera_shape: tuple = field(default=(0, 0))

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta)

    def is_prefix(self) -> bool:
        """True when frequencies are exactly 0..n-1."""
        return list(self.frequencies) == list(range(len(self.frequencies)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theta_deg": round(self.theta_deg, 9),
            "period": self.period,
            "frequencies": list(self.frequencies),
            "scale": self.scale,
            "stage": self.stage,
            "pixels": int(self.values.shape[0]),
        }


def _phase_weights(phase_steps: int) -> np.ndarray:
    i = np.arange(phase_steps)
    return np.cos(2.0 * np.pi * i / phase_steps) + 1j * np.sin(2.0 * np.pi * i / phase_steps)


def assemble_spectrum(
    stack: IntensityStack,
    theta_deg: float,
    frequency: int,
    stage: str = "coarse",
) -> np.ndarray:
    """
    F_theta(k) for every camera pixel, shape (camera_rows, camera_cols).

    Raises:
        IncompleteStackError: direction/frequency not captured or a phase image missing.
    """
    block = stack.block(theta_deg, stage)
    phases = block.phases(frequency)
    return np.tensordot(_phase_weights(block.spec.phase_steps), phases, axes=(0, 0))


def assemble_block(block: StackBlock) -> SpectrumSlice:
    """All frequencies of one block, as a SpectrumSlice."""
    spec = block.spec
    weights = _phase_weights(spec.phase_steps)
    rows, cols = block.data.shape[2:]
    columns = [
        np.tensordot(weights, block.phases(k), axes=(0, 0)).ravel()
        for k in spec.frequencies
    ]
    values = np.stack(columns, axis=1) if columns else np.zeros((rows * cols, 0), dtype=np.complex128)
    return SpectrumSlice(
        theta=spec.theta,
        period=spec.period,
        frequencies=list(spec.frequencies),
        values=values,
        scale=spec.phase_steps * spec.contrast / 2.0,
        stage=spec.stage,
        camera_shape=(rows, cols),
    )


def fine_with_shared_dc(coarse: SpectrumSlice, fine: SpectrumSlice) -> SpectrumSlice:
    """
    Fine slice with the coarse DC prepended.

    The DC term of a projection function does not depend on the period, so
    the fine capture skips k = 0 and borrows it from the coarse capture.
    """
    if 0 not in coarse.frequencies:
        raise IncompleteStackError("Coarse spectrum lacks the DC term the fine step shares")
    if 0 in fine.frequencies:
        return fine
    if not math.isclose(coarse.theta, fine.theta, abs_tol=1e-12):
        raise ValueError("Coarse and fine spectra belong to different directions")
    if not math.isclose(coarse.scale, fine.scale, rel_tol=1e-12):
        raise ValueError("Coarse and fine spectra were captured with different contrast or phase count")
    dc = coarse.values[:, [coarse.frequencies.index(0)]]
    return SpectrumSlice(
        theta=fine.theta,
        period=fine.period,
        frequencies=[0] + list(fine.frequencies),
        values=np.concatenate([dc, fine.values], axis=1),
        scale=fine.scale,
        stage=fine.stage,
        camera_shape=fine.camera_shape,
    )
