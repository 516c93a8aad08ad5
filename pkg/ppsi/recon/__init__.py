"""Projection-function reconstruction from intensity stacks."""

from .lse import (
    AliasingWarning,
    ProjectionFunction,
    clean_mask,
    coarse_localize,
    estimate_fine_period,
    fine_reconstruct,
    mask_span,
    partial_fine_reconstruct,
    reconstruct_full,
)
from .spectrum import SpectrumSlice, assemble_block, assemble_spectrum, fine_with_shared_dc
from .window import (
    DEFAULT_KAISER_BETA,
    WindowProfile,
    coarse_frequencies_for_ratio,
    coarse_uncertainty_ratio,
    kaiser_half_window,
    main_lobe_halfwidth,
)

__all__ = [
    "AliasingWarning",
    "ProjectionFunction",
    "clean_mask",
    "coarse_localize",
    "estimate_fine_period",
    "fine_reconstruct",
    "mask_span",
    "partial_fine_reconstruct",
    "reconstruct_full",
    "SpectrumSlice",
    "assemble_block",
    "assemble_spectrum",
    "fine_with_shared_dc",
    "DEFAULT_KAISER_BETA",
    "WindowProfile",
    "coarse_frequencies_for_ratio",
    "coarse_uncertainty_ratio",
    "kaiser_half_window",
    "main_lobe_halfwidth",
]
