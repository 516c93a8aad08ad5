"""Artifact I/O shared by the pipeline stages."""

from .io import (
    MATCH_COLUMNS,
    SWEEP_COLUMNS,
    read_matches,
    read_metrics,
    read_projections,
    read_stack,
    read_sweep,
    require_file,
    write_matches,
    write_metrics,
    write_projections,
    write_stack,
    write_sweep,
)

__all__ = [
    "MATCH_COLUMNS",
    "SWEEP_COLUMNS",
    "read_matches",
    "read_metrics",
    "read_projections",
    "read_stack",
    "read_sweep",
    "require_file",
    "write_matches",
    "write_metrics",
    "write_projections",
    "write_stack",
    "write_sweep",
]
