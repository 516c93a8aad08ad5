"""Forward image formation and simulated pattern capture.

    I(u, v) = O(u, v) + sum_{u', v'} h(u', v'; u, v) P(u', v')

Because every pattern is constant along its digital projection lines, a whole
direction's stack is rendered from the projected transport R_theta (camera
pixels x L) and the 1D pattern profiles, without rasterizing patterns.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..geometry.rig import DeviceSpec
from ..patterns.generator import PatternSpec, full_spec, pattern_profile, projection_length
from .oracle import projected_transport
from .scene import SceneModel

logger = logging.getLogger(__name__)


class IncompleteStackError(ValueError):
    """A (direction, frequency) is missing phase images."""


def render_intensity(
    scene: SceneModel,
    pattern: np.ndarray,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    Camera image (camera_rows, camera_cols) under one projector pattern.

    Noise is added after the inner product when the scene has noise_sigma > 0;
    pass rng to control the draw (defaults to the scene seed).

    Raises:
        ValueError: pattern raster does not match the projector.
    """
    device = scene.device
    pattern = np.asarray(pattern, dtype=np.float64)
    if pattern.shape != (device.N, device.M):
        raise ValueError(
            f"Pattern shape {pattern.shape} does not match projector raster ({device.N}, {device.M})"
        )
    image = (scene.transport_matrix @ pattern.ravel()).reshape(device.camera_rows, device.camera_cols)
    image = image + scene.ambient
    if scene.noise_sigma > 0:
        rng = rng if rng is not None else np.random.default_rng(scene.seed)
        image = image + rng.normal(0.0, scene.noise_sigma, size=image.shape)
    return image


@dataclass
class StackBlock:
    """
    Intensities of one pattern family.

    Attributes:
        spec: Pattern family that produced the block
        data: (frequencies, phases, camera_rows, camera_cols) float array
    """
    spec: PatternSpec
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 4:
            raise ValueError(f"Stack block must be 4D (F, S, rows, cols), got {self.data.shape}")
        if self.data.shape[0] != len(self.spec.frequencies):
            raise ValueError(
                f"Block has {self.data.shape[0]} frequency slots, spec lists {len(self.spec.frequencies)}"
            )

    @property
    def theta_deg(self) -> float:
        return self.spec.theta_deg

    def phases(self, frequency: int) -> np.ndarray:
        """
        (S, rows, cols) phase images of one frequency.

        Raises:
            IncompleteStackError: frequency not captured, or a phase image missing/NaN.
        """
        try:
            slot = self.spec.frequencies.index(int(frequency))
        except ValueError:
            raise IncompleteStackError(
                f"Frequency {frequency} not captured for theta={self.theta_deg:g} ({self.spec.stage})"
            ) from None
        images = self.data[slot]
        if images.shape[0] < self.spec.phase_steps or np.isnan(images[: self.spec.phase_steps]).any():
            raise IncompleteStackError(
                f"Missing phase image for theta={self.theta_deg:g}, k={frequency} ({self.spec.stage})"
            )
        return images[: self.spec.phase_steps]

    def manifest_entry(self) -> Dict[str, Any]:
        return {"spec": self.spec.to_dict(), "shape": list(self.data.shape)}


@dataclass
class IntensityStack:
    """Captured blocks of one scene, in capture order."""
    device: DeviceSpec
    blocks: List[StackBlock] = field(default_factory=list)
    scene_id: str = "scene"

    def block(self, theta_deg: float, stage: str) -> StackBlock:
        for block in self.blocks:
            if block.spec.stage == stage and math.isclose(block.theta_deg, theta_deg, abs_tol=1e-6):
                return block
        raise IncompleteStackError(f"No {stage} block for theta={theta_deg:g}")

    def directions_deg(self) -> List[float]:
        seen: List[float] = []
        for block in self.blocks:
            if not any(math.isclose(block.theta_deg, d, abs_tol=1e-6) for d in seen):
                seen.append(block.theta_deg)
        return seen

    @property
    def image_count(self) -> int:
        return sum(int(np.prod(b.data.shape[:2])) for b in self.blocks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scene_id": self.scene_id,
            "device": self.device.to_dict(),
            "image_count": self.image_count,
            "blocks": [b.manifest_entry() for b in self.blocks],
        }


def profile_matrix(spec: PatternSpec, length: int) -> np.ndarray:
    """(length, F*S) pattern profiles, columns ordered frequency-major then phase."""
    columns = [
        pattern_profile(spec, k, i, length)
        for k in spec.frequencies
        for i in range(spec.phase_steps)
    ]
    if not columns:
        return np.zeros((length, 0))
    return np.stack(columns, axis=1)


def capture_block(
    scene: SceneModel,
    spec: PatternSpec,
    rng: Optional[np.random.Generator] = None,
    transport: Optional[np.ndarray] = None,
) -> StackBlock:
    """Render every pattern of one family. transport may pass a precomputed projected_transport."""
    device = scene.device
    length = projection_length(spec.theta, device.M, device.N)
    if transport is None:
        transport = projected_transport(scene, spec.theta)
    F, S = len(spec.frequencies), spec.phase_steps
    values = transport @ profile_matrix(spec, length)
    data = values.T.reshape(F, S, device.camera_rows, device.camera_cols) + scene.ambient
    if scene.noise_sigma > 0:
        rng = rng if rng is not None else np.random.default_rng(scene.seed)
        data = data + rng.normal(0.0, scene.noise_sigma, size=data.shape)
    logger.debug("Captured %s theta=%g: %d images", spec.stage, spec.theta_deg, F * S)
    return StackBlock(spec=spec, data=data)


def capture_stack(
    scene: SceneModel,
    specs: Sequence[PatternSpec],
    rng: Optional[np.random.Generator] = None,
) -> IntensityStack:
    """
    Render a list of pattern families in order.

    Noise draws follow the pattern-family order from one generator, so a fixed seed
    gives a bit-identical stack.
    """
    rng = rng if rng is not None else np.random.default_rng(scene.seed)
    cache: Dict[float, np.ndarray] = {}
    blocks = []
    for spec in specs:
        if spec.theta not in cache:
            cache[spec.theta] = projected_transport(scene, spec.theta)
        blocks.append(capture_block(scene, spec, rng=rng, transport=cache[spec.theta]))
    stack = IntensityStack(device=scene.device, blocks=blocks, scene_id=scene.scene_id)
    logger.info("Scene %s: captured %d images in %d blocks", scene.scene_id, stack.image_count, len(blocks))
    return stack


def capture_full(
    scene: SceneModel,
    thetas: Sequence[float],
    phase_steps: int = 3,
    mean: float = 0.5,
    contrast: float = 0.4,
    rng: Optional[np.random.Generator] = None,
) -> IntensityStack:
    """Full-frequency capture (k = 0..L//2 per direction), the reference for the coarse-to-fine path."""
    specs = [full_spec(theta, scene.device, phase_steps, mean, contrast) for theta in thetas]
    return capture_stack(scene, specs, rng=rng)
