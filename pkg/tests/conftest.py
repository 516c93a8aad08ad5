"""Shared desk-scale fixtures: 256x256 projector, small cameras, rectified rig."""

import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pytest

from ppsi.geometry import DeviceSpec, StereoRig
from ppsi.ltc_sim import Lobe, PixelTransport, SceneModel

SCENES = Path(__file__).resolve().parent.parent / "scenes"

PROJECTOR = 256
FOCAL_PX = 1000.0
BASELINE_MM = 200.0
PROJECTOR_PRINCIPAL = (528.0, 127.5)

# Lobe centers stay inside this window so coarse masks never wrap around
# the projection-bin range.
LOBE_RANGE = (80.0, 176.0)


def make_device(camera: int = 4) -> DeviceSpec:
    return DeviceSpec(PROJECTOR, PROJECTOR, camera, camera)


def make_rig(device: DeviceSpec) -> StereoRig:
    return StereoRig.rectified(device, FOCAL_PX, BASELINE_MM, projector_principal=PROJECTOR_PRINCIPAL)


def lobe_scene(
    lobes: Dict[Tuple[int, int], Sequence[Lobe]],
    camera: int = 4,
    **kwargs,
) -> SceneModel:
    """Scene from explicit lobes; the first lobe of each pixel is the direct one."""
    device = make_device(camera)
    transports = {
        pixel: PixelTransport(direct=items[0], speckles=list(items[1:]))
        for pixel, items in lobes.items()
    }
    kwargs.setdefault("rig", make_rig(device))
    return SceneModel(device=device, transports=transports, **kwargs)


def random_lobes(
    rng: np.random.Generator,
    speckles: int,
    radius: float = 1.5,
    amplitude_range: Tuple[float, float] = (0.3, 0.8),
) -> List[Lobe]:
    lo, hi = LOBE_RANGE
    out = [Lobe(tuple(rng.uniform(lo, hi, size=2)), 1.0, radius)]
    for _ in range(speckles):
        out.append(Lobe(tuple(rng.uniform(lo, hi, size=2)), float(rng.uniform(*amplitude_range)), radius))
    return out


def random_scene(rng: np.random.Generator, camera: int = 2, max_speckles: int = 3, **kwargs) -> SceneModel:
    lobes = {
        (u, v): random_lobes(rng, int(rng.integers(0, max_speckles + 1)))
        for v in range(camera) for u in range(camera)
    }
    return lobe_scene(lobes, camera=camera, **kwargs)


def degrees(*values: float) -> List[float]:
    return [math.radians(v) for v in values]


@pytest.fixture(scope="session")
def scenes_dir() -> Path:
    return SCENES


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="module")
def desk_rig() -> StereoRig:
    return make_rig(make_device(64))


def scene_path(name: str) -> Optional[Path]:
    return SCENES / f"{name}.yaml"
