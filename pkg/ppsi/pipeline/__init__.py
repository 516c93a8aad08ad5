"""Stage orchestration: in-memory stages and their file-based runners."""

from .orchestrator import (
    PipelineResult,
    StageError,
    budget_summary,
    capture_scene,
    direction_spectra,
    evaluate_cloud,
    localize,
    match_projections,
    reconstruct_stack,
    run_capture,
    run_cloud,
    run_eval,
    run_match,
    run_patterns,
    run_pipeline,
    run_reconstruct,
    stage,
    triangulate,
)

__all__ = [
    "PipelineResult",
    "StageError",
    "budget_summary",
    "capture_scene",
    "direction_spectra",
    "evaluate_cloud",
    "localize",
    "match_projections",
    "reconstruct_stack",
    "run_capture",
    "run_cloud",
    "run_eval",
    "run_match",
    "run_patterns",
    "run_pipeline",
    "run_reconstruct",
    "stage",
    "triangulate",
]
