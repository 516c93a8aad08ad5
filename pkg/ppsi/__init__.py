"""
Projective parallel single-pixel imaging (pPSI) on simulated scenes.

Instead of capturing each camera pixel's full 2D transport image, pPSI
captures its 1D projections along a few directions with phase-shifted
sinusoids, reconstructs them coarse-to-fine, and recovers the direct
correspondence from where the projection peaks intersect.

Subpackages:
- geometry:   rig model, epipolar lines, projection-line intersection
- patterns:   sinusoidal pattern sets and the pattern budget
- ltc_sim:    synthetic light transport and simulated capture
- recon:      spectrum assembly, Kaiser windowing, local slice extension
- matching:   peak extraction, four-direction RANSAC, unidirectional mode
- pointcloud: triangulation, continuity filter, plane/sphere fits
- metrics:    SME, NED, capture-ratio sweeps
- pipeline:   stage orchestration behind the `ppsi` command
"""

__version__ = "0.3.0"


def __getattr__(name):
    """Lazy imports so `import ppsi` stays cheap."""

    _pipeline_names = {
        "PipelineResult", "StageError", "run_pipeline", "capture_scene",
        "reconstruct_stack", "match_projections",
    }
    _scene_names = {"SceneModel", "load_scene", "scene_from_dict"}
    _metric_names = {"sme", "ned", "capture_ratio_sweep"}

    if name in ("Config", "default_config"):
        from . import config
        return getattr(config, name)
    elif name in _pipeline_names:
        from . import pipeline
        return getattr(pipeline, name)
    elif name in _scene_names:
        from . import ltc_sim
        return getattr(ltc_sim, name)
    elif name in _metric_names:
        from . import metrics
        return getattr(metrics, name)

    raise AttributeError(f"module 'ppsi' has no attribute {name!r}")
