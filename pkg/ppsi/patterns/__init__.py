"""Oblique sinusoidal pattern sets and pattern budgets."""

from .budget import (
    MISMATCHED_COUNT_ETAS,
    CaptureBudget,
    PatternCount,
    fine_frequency_count,
    pattern_count,
    round_half_up,
)
from .generator import (
    STAGES,
    PatternSpec,
    equivalent_resolution,
    generate_pattern,
    iter_patterns,
    pattern_filename,
    pattern_profile,
    coarse_spec,
    fine_spec,
    full_spec,
    bin_to_rho,
    projection_index,
    projection_length,
    projection_pitch,
    rho_offset,
    rho_to_bin,
    write_pattern_set,
)

__all__ = [
    "STAGES",
    "MISMATCHED_COUNT_ETAS",
    "CaptureBudget",
    "PatternCount",
    "fine_frequency_count",
    "pattern_count",
    "round_half_up",
    "PatternSpec",
    "equivalent_resolution",
    "generate_pattern",
    "iter_patterns",
    "pattern_filename",
    "pattern_profile",
    "coarse_spec",
    "fine_spec",
    "full_spec",
    "bin_to_rho",
    "projection_index",
    "projection_length",
    "projection_pitch",
    "rho_offset",
    "rho_to_bin",
    "write_pattern_set",
]
