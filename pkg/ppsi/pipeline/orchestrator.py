"""Stage orchestration for the pPSI pipeline.

Each stage has an in-memory function and a file-based runner:

    capture_scene      -> run_capture      (stack.f32 + stack.yaml)
    reconstruct_stack  -> run_reconstruct  (projections.f32 + projections.yaml)
    match_projections  -> run_match        (matches.csv)
    triangulate        -> run_cloud        (cloud.ply, cloud_filtered.ply)
    evaluate_cloud     -> run_eval         (metrics.csv)

run_patterns writes the pattern sets and the budget summary.
run_pipeline chains the in-memory stages for one scene.

Usage:
    from ppsi.pipeline import run_pipeline
    from ppsi.ltc_sim import load_scene

    result = run_pipeline(load_scene("scenes/compound.yaml"))
    print(result.metrics)
"""

import logging
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import Config, default_config
from ..contracts import CandidateMatch
from ..geometry.rig import StereoRig
from ..ltc_sim.oracle import projected_transport
from ..ltc_sim.render import IncompleteStackError, IntensityStack, capture_block
from ..ltc_sim.scene import SceneModel, load_scene
from ..matching.peaks import direction_peaks
from ..matching.ransac import ransac_match, three_direction_match
from ..matching.unidirectional import unidirectional_match
from ..patterns.budget import CaptureBudget, pattern_count
from ..patterns.generator import coarse_spec, fine_spec, write_pattern_set
from ..pointcloud.cloud import PointCloud, build_cloud
from ..pointcloud.continuity import ContinuityParams, continuity_filter
from ..pointcloud.fitting import cloud_distance_rms, fit_plane_rms, fit_sphere
from ..recon.lse import (
    ProjectionFunction,
    coarse_localize,
    estimate_fine_period,
    partial_fine_reconstruct,
    reconstruct_full,
)
from ..recon.spectrum import SpectrumSlice, assemble_block, fine_with_shared_dc
from ..recon.window import WindowProfile
from ..utils import io

logger = logging.getLogger(__name__)

Pixel = Tuple[int, int]
Matches = Dict[Pixel, List[CandidateMatch]]


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage

    def __str__(self) -> str:
        return f"[{self.stage}] {self.args[0]}"


@contextmanager
def stage(name: str):
    """Re-raise artifact and domain errors as StageError(name)."""
    try:
        yield
    except StageError:
        raise
    except (FileNotFoundError, ValueError, KeyError, OSError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        raise StageError(name, f"{type(exc).__name__}: {message}") from exc


# ---------------------------------------------------------------------------
# In-memory stages
# ---------------------------------------------------------------------------

def _window(config: Config) -> WindowProfile:
    return WindowProfile(beta=config.kaiser_beta)


def localize(spectrum: SpectrumSlice, config: Config = default_config) -> ProjectionFunction:
    """coarse_localize with the configured thresholds."""
    return coarse_localize(
        spectrum,
        window=_window(config),
        relative_threshold=config.mask_relative_threshold,
        noise_factor=config.mask_noise_factor,
        merge_gap=config.mask_merge_gap,
        min_run=config.mask_min_run,
    )


def capture_scene(scene: SceneModel, config: Config = default_config) -> IntensityStack:
    """
    Adaptive two-round capture per direction: coarse block, M_theta from the
    coarse masks (unless config.fine_period is set), then the fine block.

    Noise draws come from one generator seeded with config.seed, in
    capture order.

    Raises:
        ValueError: nothing localized, or the capture ratio keeps < 2 fine frequencies.
    """
    config.validate()
    device = scene.device
    rng = np.random.default_rng(config.seed)
    S, a, b = config.phase_steps, config.pattern_mean, config.pattern_contrast
    blocks = []
    for theta in config.directions_rad:
        transport = projected_transport(scene, theta)
        coarse = capture_block(
            scene, coarse_spec(theta, device, config.coarse_frequencies, S, a, b), rng, transport,
        )
        blocks.append(coarse)
        if config.fine_period is not None:
            period = int(config.fine_period)
        else:
            period = estimate_fine_period(localize(assemble_block(coarse), config))
        spec = fine_spec(theta, period, config.eta, S, a, b)
        if not spec.frequencies:
            raise ValueError(
                f"Capture ratio {config.eta} keeps no fine frequency at M_theta={period} "
                f"(theta={spec.theta_deg:g})"
            )
        blocks.append(capture_block(scene, spec, rng, transport))
        logger.info("theta=%g: fine period %d, %d fine frequencies", spec.theta_deg, period, len(spec.frequencies))
    stack = IntensityStack(device=device, blocks=blocks, scene_id=scene.scene_id)
    logger.info("Scene %s: %d images captured", scene.scene_id, stack.image_count)
    return stack


def direction_spectra(stack: IntensityStack, theta_deg: float) -> Tuple[SpectrumSlice, SpectrumSlice]:
    """(coarse, fine with the shared DC) spectra of one direction."""
    coarse = assemble_block(stack.block(theta_deg, "coarse"))
    fine = fine_with_shared_dc(coarse, assemble_block(stack.block(theta_deg, "fine")))
    return coarse, fine


def reconstruct_stack(
    stack: IntensityStack,
    config: Config = default_config,
    eta: Optional[float] = None,
) -> List[ProjectionFunction]:
    """
    Projection functions for every configured direction.

    Full-spectrum blocks are inverted directly; coarse/fine pairs go through
    coarse localization and local slice extension, keeping the lowest
    round(eta * (M_theta//2 + 1)) fine frequencies (eta defaults to config.eta).

    Raises:
        IncompleteStackError: a configured direction is missing from the stack.
    """
    eta = config.eta if eta is None else eta
    out = []
    for theta_deg in config.directions_deg:
        try:
            full = stack.block(theta_deg, "full")
        except IncompleteStackError:
            full = None
        if full is not None:
            out.append(reconstruct_full(assemble_block(full)))
            continue
        coarse_spectrum, fine = direction_spectra(stack, theta_deg)
        coarse = localize(coarse_spectrum, config)
        out.append(partial_fine_reconstruct(fine, coarse, eta, config.kaiser_beta))
    return out


def match_projections(
    projections: Sequence[ProjectionFunction],
    rig: StereoRig,
    config: Config = default_config,
) -> Matches:
    """
    Candidate matches per camera pixel under config.strategy.

    Pixels without any candidate are absent from the result.
    """
    device = rig.device
    peaks = [
        direction_peaks(p, device, relative_threshold=config.peak_relative_threshold)
        for p in projections
    ]
    matches: Matches = {}
    for index in range(device.camera_pixel_count):
        lists = [per_direction[index] for per_direction in peaks]
        if all(pl.count == 0 for pl in lists):
            continue
        pixel = (index % device.camera_cols, index // device.camera_cols)
        if config.strategy == "ransac4":
            found = ransac_match(
                lists, rig, pixel,
                tolerance=config.ransac_tolerance_px,
                epipolar_tolerance=config.epipolar_tolerance_px,
                rank_tolerance=config.rank_tolerance,
                keep_pair_tuples=config.keep_pair_tuples,
            )
        elif config.strategy == "three_direction":
            found = three_direction_match(
                lists, rig, pixel,
                tolerance=config.ransac_tolerance_px,
                epipolar_tolerance=config.epipolar_tolerance_px,
                rank_tolerance=config.rank_tolerance,
            )
        else:
            found = unidirectional_match(lists[0], rig.epipolar_line(pixel), pixel)
        if found:
            matches[pixel] = found
    logger.info(
        "Matched %d pixels (%d candidates, strategy %s)",
        len(matches), sum(len(m) for m in matches.values()), config.strategy,
    )
    return matches


def triangulate(matches: Matches, rig: StereoRig, config: Config = default_config) -> Tuple[PointCloud, PointCloud]:
    """(raw cloud, continuity-filtered cloud)."""
    cloud = build_cloud(matches, rig)
    params = ContinuityParams(config.continuity_radius_mm, config.continuity_min_points)
    return cloud, continuity_filter(cloud, params)


def evaluate_cloud(
    cloud: PointCloud,
    surface: Optional[Dict[str, Any]] = None,
    reference: Optional[PointCloud] = None,
) -> Dict[str, Any]:
    """
    Shape metrics: plane rms, or sphere diameter/rms, plus the
    nearest-neighbour rms against a reference cloud when given.
    Fits that cannot be computed are reported as NaN and logged.
    """
    metrics: Dict[str, Any] = {"points": len(cloud)}
    kind = (surface or {}).get("type")
    try:
        if kind == "plane":
            _, rms = fit_plane_rms(cloud.points)
            metrics["plane_rms_mm"] = rms
        elif kind == "sphere":
            fit = fit_sphere(cloud.points)
            metrics["sphere_diameter_mm"] = fit.diameter
            metrics["sphere_rms_mm"] = fit.rms
            if "diameter_mm" in surface:
                metrics["diameter_error_mm"] = abs(fit.diameter - float(surface["diameter_mm"]))
    except ValueError as exc:
        logger.warning("Shape fit failed: %s", exc)
        metrics[f"{kind}_rms_mm"] = math.nan
    if reference is not None:
        if len(reference) and len(cloud):
            metrics["cloud_rms_mm"] = cloud_distance_rms(reference.points, cloud.points)
        else:
            metrics["cloud_rms_mm"] = math.nan
    return metrics


@dataclass
class PipelineResult:
    """
    Outputs of one in-memory run.

    Attributes:
        stack: Captured intensities
        projections: One ProjectionFunction per direction
        matches: Candidate matches per camera pixel
        cloud: Every triangulated candidate
        filtered: Cloud after the continuity filter
        metrics: evaluate_cloud on the filtered cloud
        timing: Seconds per stage
    """
    stack: Optional[IntensityStack] = None
    projections: List[ProjectionFunction] = field(default_factory=list)
    matches: Matches = field(default_factory=dict)
    cloud: Optional[PointCloud] = None
    filtered: Optional[PointCloud] = None
    metrics: Dict[str, Any] = field(default_factory=dict)
    timing: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "images": self.stack.image_count if self.stack else 0,
            "directions": [p.to_dict() for p in self.projections],
            "matched_pixels": len(self.matches),
            "cloud": self.cloud.to_dict() if self.cloud else None,
            "filtered": self.filtered.to_dict() if self.filtered else None,
            "metrics": self.metrics,
            "timing": self.timing,
        }


def run_pipeline(scene: SceneModel, config: Config = default_config) -> PipelineResult:
    """
    Capture, reconstruct, match, triangulate and evaluate one scene in memory.

    Raises:
        StageError: any stage fails.
    """
    if scene.rig is None:
        raise StageError("match", "scene has no rig; matching needs epipolar geometry")
    result = PipelineResult()

    t0 = time.perf_counter()
    with stage("capture"):
        result.stack = capture_scene(scene, config)
    result.timing["capture"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    with stage("reconstruct"):
        result.projections = reconstruct_stack(result.stack, config)
    result.timing["reconstruct"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    with stage("match"):
        result.matches = match_projections(result.projections, scene.rig, config)
    result.timing["match"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    with stage("cloud"):
        result.cloud, result.filtered = triangulate(result.matches, scene.rig, config)
    result.timing["cloud"] = time.perf_counter() - t0

    with stage("eval"):
        result.metrics = evaluate_cloud(result.filtered, scene.surface)
    return result


# ---------------------------------------------------------------------------
# File-based stages
# ---------------------------------------------------------------------------

def _out(config: Config, name: str) -> Path:
    return Path(config.output_dir) / name


def _scene(config: Config, name: str) -> SceneModel:
    if not config.scene_path:
        raise StageError(name, "no scene file configured (run.scene_path or --scene)")
    with stage(name):
        return load_scene(config.scene_path)


def _rig(scene: SceneModel, name: str) -> StereoRig:
    if scene.rig is None:
        raise StageError(name, f"scene {scene.scene_id} has no 'rig' section")
    return scene.rig


def budget_summary(config: Config) -> Dict[str, Any]:
    """Pattern budget for the configured fine period; None entries when M_theta is adaptive."""
    summary: Dict[str, Any] = {
        "coarse_frequencies": config.coarse_frequencies,
        "phase_steps": config.phase_steps,
        "eta": config.eta,
        "directions": len(config.directions_deg),
        "fine_period": config.fine_period,
    }
    if config.fine_period is None:
        summary["budget"] = None
        return summary
    count = pattern_count(CaptureBudget(
        coarse_count=config.coarse_frequencies,
        fine_size=int(config.fine_period),
        eta=config.eta,
        phase_steps=config.phase_steps,
        directions=len(config.directions_deg),
    ))
    summary["budget"] = count.to_dict()
    summary["capture_seconds"] = count.capture_seconds(config.projector_fps)
    return summary


def run_patterns(config: Config, budget_only: bool = False, fmt: str = "pgm") -> Dict[str, Any]:
    """
    Budget summary, and unless budget_only the pattern images + manifest
    under output_dir/patterns. Fine sets are written only for a fixed
    fine_period; adaptive periods are known after the coarse capture.
    """
    with stage("patterns"):
        config.validate()
        summary = budget_summary(config)
        if budget_only:
            return summary
    scene = _scene(config, "patterns")
    with stage("patterns"):
        device = scene.device
        S, a, b = config.phase_steps, config.pattern_mean, config.pattern_contrast
        specs = []
        for theta in config.directions_rad:
            specs.append(coarse_spec(theta, device, config.coarse_frequencies, S, a, b))
            if config.fine_period is not None:
                specs.append(fine_spec(theta, int(config.fine_period), config.eta, S, a, b))
        manifest = write_pattern_set(
            specs, device, _out(config, "patterns"), fmt=fmt,
            manifest_name=config.pattern_manifest_file, extra={"budget": summary},
        )
    summary["manifest"] = str(manifest)
    summary["written"] = sum(s.pattern_count for s in specs)
    return summary


def run_capture(config: Config) -> IntensityStack:
    scene = _scene(config, "capture")
    with stage("capture"):
        stack = capture_scene(scene, config)
        io.write_stack(stack, _out(config, config.stack_file), _out(config, config.stack_manifest_file))
    return stack


def run_reconstruct(config: Config) -> List[ProjectionFunction]:
    with stage("reconstruct"):
        config.validate()
        stack = io.read_stack(_out(config, config.stack_file), _out(config, config.stack_manifest_file))
        projections = reconstruct_stack(stack, config)
        shape = (stack.device.camera_rows, stack.device.camera_cols)
        io.write_projections(
            projections, shape,
            _out(config, config.projection_file), _out(config, config.projection_manifest_file),
        )
    return projections


def run_match(config: Config) -> Matches:
    scene = _scene(config, "match")
    rig = _rig(scene, "match")
    with stage("match"):
        config.validate()
        projections, _ = io.read_projections(
            _out(config, config.projection_file), _out(config, config.projection_manifest_file),
        )
        matches = match_projections(projections, rig, config)
        io.write_matches(matches, _out(config, config.matches_file))
    return matches


def run_cloud(config: Config) -> Tuple[PointCloud, PointCloud]:
    scene = _scene(config, "cloud")
    rig = _rig(scene, "cloud")
    with stage("cloud"):
        matches = io.read_matches(_out(config, config.matches_file))
        cloud, filtered = triangulate(matches, rig, config)
        comments = [f"scene {scene.scene_id}", f"strategy {config.strategy}"]
        cloud.save_ply(_out(config, config.cloud_file), comments)
        filtered.save_ply(
            _out(config, config.filtered_cloud_file),
            comments + [f"continuity r={config.continuity_radius_mm} N>{config.continuity_min_points}"],
        )
    return cloud, filtered


def run_eval(config: Config, reference_cloud: Optional[str] = None) -> Dict[str, Any]:
    """Metrics of the filtered cloud against the scene surface and an optional reference PLY."""
    surface = None
    if config.scene_path:
        surface = _scene(config, "eval").surface
    with stage("eval"):
        cloud = PointCloud.load_ply(io.require_file(_out(config, config.filtered_cloud_file), "filtered cloud"))
        reference = PointCloud.load_ply(reference_cloud) if reference_cloud else None
        metrics = evaluate_cloud(cloud, surface, reference)
        io.write_metrics([metrics], _out(config, config.metrics_file))
    return metrics
