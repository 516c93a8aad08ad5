"""Synthetic light transport: scenes, forward rendering and the Radon oracle."""

from .oracle import binning_matrix, projected_transport, radon_oracle
from .render import (
    IncompleteStackError,
    IntensityStack,
    StackBlock,
    capture_block,
    capture_full,
    capture_stack,
    profile_matrix,
    render_intensity,
)
from .scene import (
    Lobe,
    PixelTransport,
    SceneModel,
    add_offset_speckles,
    load_scene,
    rasterize_ltc,
    scene_from_dict,
    surface_transports,
)

__all__ = [
    "binning_matrix",
    "projected_transport",
    "radon_oracle",
    "IncompleteStackError",
    "IntensityStack",
    "StackBlock",
    "capture_block",
    "capture_full",
    "capture_stack",
    "profile_matrix",
    "render_intensity",
    "Lobe",
    "PixelTransport",
    "SceneModel",
    "add_offset_speckles",
    "load_scene",
    "rasterize_ltc",
    "scene_from_dict",
    "surface_transports",
]
