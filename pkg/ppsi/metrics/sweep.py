"""Capture-ratio sweep.

The scene is captured once with the complete fine half spectrum (eta = 1).
Each tested eta reconstructs from the lowest round(eta * (M_theta//2 + 1))
fine frequencies of that capture, which is the spectrum a capture at that
ratio would have recorded, and is compared against the eta = 1 matches.
"""

import logging
import math
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from ..config import RANSAC_DIRECTIONS, UNIDIRECTIONAL_DIRECTIONS, Config, default_config
from ..contracts import SweepReport, SweepRow
from ..ltc_sim.scene import SceneModel
from ..patterns.budget import CaptureBudget, pattern_count
from ..pipeline.orchestrator import (
    Matches,
    StageError,
    capture_scene,
    direction_spectra,
    evaluate_cloud,
    match_projections,
    reconstruct_stack,
)
from ..pointcloud.cloud import build_cloud
from .ned import DEFAULT_NED_BAND, cumulative_ned, ned
from .sme import match_errors, mean_sme, primary_candidate

logger = logging.getLogger(__name__)


def _sweep_config(config: Config, strategy: Optional[str]) -> Config:
    if strategy is None or strategy == config.strategy:
        return replace(config, eta=1.0, fine_period=None).validate()
    directions = {
        "ransac4": RANSAC_DIRECTIONS,
        "unidirectional": UNIDIRECTIONAL_DIRECTIONS,
    }.get(strategy, config.directions_deg)
    return replace(config, strategy=strategy, directions_deg=directions, eta=1.0, fine_period=None).validate()


def _check_etas(etas: Sequence[float]) -> list:
    etas = [float(e) for e in etas]
    if not etas:
        raise ValueError("Sweep needs at least one capture ratio")
    for e in etas:
        if not 0.0 < e <= 1.0:
            raise ValueError(f"Capture ratio {e} outside (0, 1]")
    if any(b <= a for a, b in zip(etas, etas[1:])):
        raise ValueError(f"Capture ratios must be strictly increasing, got {etas}")
    return etas


def _shape_rms(scene: SceneModel, matches: Matches) -> float:
    """RMS of the surface fit through the primary candidates; NaN without a surface."""
    if scene.surface is None or scene.rig is None:
        return math.nan
    primary = {p: [primary_candidate(c)] for p, c in matches.items() if c}
    metrics = evaluate_cloud(build_cloud(primary, scene.rig), scene.surface)
    return float(metrics.get(f"{scene.surface.get('type')}_rms_mm", math.nan))


def knee(rows: Sequence[SweepRow], threshold: float) -> Optional[float]:
    """Smallest eta whose mean SME is below threshold."""
    for row in rows:
        if row.error is None and math.isfinite(row.mean_sme_px) and row.mean_sme_px < threshold:
            return row.eta
    return None


def sme_trend(rows: Sequence[SweepRow]) -> Optional[float]:
    """Spearman rank correlation of mean SME with eta over the successful rows."""
    ok = [r for r in rows if r.error is None and math.isfinite(r.mean_sme_px)]
    if len(ok) < 3 or len({r.mean_sme_px for r in ok}) < 2:
        return None
    result = stats.spearmanr([r.eta for r in ok], [r.mean_sme_px for r in ok])
    return float(result[0])


def capture_ratio_sweep(
    scene: SceneModel,
    etas: Optional[Sequence[float]] = None,
    strategy: Optional[str] = None,
    config: Config = default_config,
    ned_band: float = DEFAULT_NED_BAND,
) -> SweepReport:
    """
    Run the pipeline at each capture ratio against the eta = 1 reference.

    A failure at one eta is recorded in that row and the sweep continues.

    Raises:
        StageError: the eta = 1 reference itself cannot be produced.
        ValueError: etas empty, outside (0, 1] or not strictly increasing.
    """
    etas = _check_etas(config.sweep_etas if etas is None else etas)
    config = _sweep_config(config, strategy)
    if scene.rig is None:
        raise StageError("sweep", f"scene {scene.scene_id} has no rig")

    try:
        stack = capture_scene(scene, config)
        reference = match_projections(reconstruct_stack(stack, config, eta=1.0), scene.rig, config)
    except ValueError as exc:
        raise StageError("sweep", f"reference run failed: {exc}") from exc
    periods = [stack.block(d, "fine").spec.period for d in config.directions_deg]
    logger.info("Sweep %s: reference matched %d pixels, fine periods %s", scene.scene_id, len(reference), periods)

    rows = []
    for eta in etas:
        patterns = sum(
            pattern_count(CaptureBudget(config.coarse_frequencies, period, eta, config.phase_steps)).per_direction
            for period in periods
        )
        try:
            projections = reconstruct_stack(stack, config, eta=eta)
            matches = match_projections(projections, scene.rig, config)
        except ValueError as exc:
            logger.warning("Sweep eta=%.2f failed: %s", eta, exc)
            rows.append(SweepRow(eta, patterns, math.nan, 0.0, math.nan, error=str(exc)))
            continue
        errors, coverage = match_errors(reference, matches)
        row = SweepRow(eta, patterns, mean_sme(errors), coverage, _shape_rms(scene, matches))
        logger.info(
            "eta=%.2f: %d patterns, mean SME %.4g px, coverage %.3f",
            eta, patterns, row.mean_sme_px, row.coverage,
        )
        rows.append(row)

    _, fine = direction_spectra(stack, config.directions_deg[0])
    try:
        concentration = cumulative_ned(ned(fine), ned_band)
    except ValueError as exc:
        logger.warning("NED undefined for %s: %s", scene.scene_id, exc)
        concentration = None

    return SweepReport(
        scene_id=scene.scene_id,
        strategy=config.strategy,
        directions_deg=list(config.directions_deg),
        rows=rows,
        knee_eta=knee(rows, config.knee_sme_px),
        spearman_rho=sme_trend(rows),
        cumulative_ned=concentration,
    )
