"""
Configuration for the projective parallel single-pixel imaging pipeline.

All run settings live here. Override by creating a Config instance with
custom values, or load a sectioned YAML run file.

Usage:
    from ppsi.config import Config, default_config

    # Use defaults
    print(default_config.coarse_frequencies)  # 10

    # Override for a run
    my_config = Config(strategy="unidirectional", directions_deg=(0.0,))

    # Load from file
    cfg = Config.from_yaml("run.yaml")
"""

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml

RANSAC_DIRECTIONS = (0.0, 45.0, 90.0, 135.0)
UNIDIRECTIONAL_DIRECTIONS = (0.0,)
STRATEGIES = ("ransac4", "three_direction", "unidirectional")

# YAML section -> fields it holds. Flat dataclass, sectioned file.
_SECTIONS: Dict[str, Tuple[str, ...]] = {
    "run": ("scene_path", "output_dir", "seed", "strategy", "directions_deg"),
    "patterns": (
        "phase_steps", "pattern_mean", "pattern_contrast",
        "coarse_frequencies", "eta", "fine_period", "projector_fps",
    ),
    "recon": (
        "kaiser_beta", "mask_relative_threshold", "mask_noise_factor",
        "mask_merge_gap", "mask_min_run",
    ),
    "matching": (
        "peak_relative_threshold", "ransac_tolerance_px",
        "epipolar_tolerance_px", "rank_tolerance", "keep_pair_tuples",
    ),
    "continuity": ("continuity_radius_mm", "continuity_min_points"),
    "sweep": ("sweep_etas", "knee_sme_px"),
}


@dataclass
class Config:
    """
    Central configuration for a pPSI run.

    Defaults follow the values stated for the reference system wherever one
    exists (N_c = 10, beta = 5, eps_R = 0.5 px, four directions). Desk-scale
    continuity parameters are scaled to the synthetic point pitch.
    """

    # === Run ===
    scene_path: Optional[str] = None
    output_dir: str = "ppsi_output"
    seed: int = 0
    strategy: str = "ransac4"
    directions_deg: Tuple[float, ...] = RANSAC_DIRECTIONS

    # === Patterns ===
    phase_steps: int = 3              # S
    pattern_mean: float = 0.5         # a
    pattern_contrast: float = 0.4     # b
    coarse_frequencies: int = 10      # N_c
    eta: float = 1.0                  # capture ratio of the fine step
    fine_period: Optional[int] = None  # M_theta; None derives it from the coarse masks
    projector_fps: float = 165.0      # only used for capture-time estimates

    # === Reconstruction ===
    kaiser_beta: float = 5.0
    mask_relative_threshold: float = 0.05
    mask_noise_factor: float = 3.0
    mask_merge_gap: int = 3           # runs closer than this are merged
    mask_min_run: int = 2             # shorter runs are dropped

    # === Matching ===
    peak_relative_threshold: float = 0.1
    ransac_tolerance_px: float = 0.5  # eps_R
    epipolar_tolerance_px: float = 1.0  # eps_epi
    rank_tolerance: float = 1e-3      # eps_rank
    keep_pair_tuples: bool = False

    # === Continuity constraint ===
    continuity_radius_mm: float = 1.0   # r_th, ~2x the desk-scale point pitch
    continuity_min_points: int = 200    # N_th

    # === Sweep ===
    sweep_etas: Tuple[float, ...] = (0.25, 0.30, 0.35, 0.40, 0.50, 0.80, 1.00)
    knee_sme_px: float = 0.05

    # === Output Files ===
    pattern_manifest_file: str = "patterns.yaml"
    stack_file: str = "stack.f32"
    stack_manifest_file: str = "stack.yaml"
    projection_file: str = "projections.f32"
    projection_manifest_file: str = "projections.yaml"
    matches_file: str = "matches.csv"
    cloud_file: str = "cloud.ply"
    filtered_cloud_file: str = "cloud_filtered.ply"
    metrics_file: str = "metrics.csv"
    sweep_file: str = "sweep.csv"

    def __post_init__(self):
        self.directions_deg = tuple(float(d) for d in self.directions_deg)
        self.sweep_etas = tuple(float(e) for e in self.sweep_etas)

    def validate(self) -> "Config":
        """Check the RunConfig invariants. Returns self for chaining."""
        if self.strategy not in STRATEGIES:
            raise ValueError(f"Unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if not self.directions_deg:
            raise ValueError("Direction list is empty")
        dirs = tuple(sorted(self.directions_deg))
        if self.strategy == "ransac4" and dirs != RANSAC_DIRECTIONS:
            raise ValueError(f"ransac4 requires directions {RANSAC_DIRECTIONS}, got {dirs}")
        if self.strategy == "unidirectional" and dirs != UNIDIRECTIONAL_DIRECTIONS:
            raise ValueError(f"unidirectional requires directions {UNIDIRECTIONAL_DIRECTIONS}, got {dirs}")
        if self.strategy == "three_direction" and len(set(d % 180.0 for d in dirs)) != 3:
            raise ValueError(f"three_direction requires three distinct directions, got {dirs}")
        for d in dirs:
            if not 0.0 <= d < 180.0:
                raise ValueError(f"Direction {d} deg outside [0, 180)")
        if self.phase_steps < 3:
            raise ValueError(f"Phase step count S must be >= 3, got {self.phase_steps}")
        a, b = self.pattern_mean, self.pattern_contrast
        if not (0.0 < b <= min(a, 1.0 - a)):
            raise ValueError(f"Pattern contrast b={b} must satisfy 0 < b <= min(a, 1-a) for a={a}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"Capture ratio eta must be in (0, 1], got {self.eta}")
        if self.coarse_frequencies < 2:
            raise ValueError(f"N_c must be >= 2, got {self.coarse_frequencies}")
        if self.continuity_radius_mm <= 0 or self.continuity_min_points < 1:
            raise ValueError("Continuity parameters must satisfy r_th > 0 and N_th >= 1")
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Sectioned dictionary matching the YAML layout."""
        flat = asdict(self)
        out: Dict[str, Any] = {}
        placed = set()
        for section, names in _SECTIONS.items():
            out[section] = {}
            for name in names:
                value = flat[name]
                out[section][name] = list(value) if isinstance(value, tuple) else value
                placed.add(name)
        out["files"] = {k: v for k, v in flat.items() if k not in placed}
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config":
        known = {f.name for f in fields(cls)}
        kwargs: Dict[str, Any] = {}
        for section, values in (data or {}).items():
            if not isinstance(values, dict):
                raise ValueError(f"Config section {section!r} must be a mapping")
            for key, value in values.items():
                if key not in known:
                    raise ValueError(f"Unknown config key {section}.{key}")
                kwargs[key] = value
        return cls(**kwargs)

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "Config":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(yaml.safe_load(f))

    def save_yaml(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.to_dict(), f, sort_keys=False)

    @property
    def directions_rad(self) -> Tuple[float, ...]:
        return tuple(math.radians(d) for d in self.directions_deg)


# Default configuration instance
default_config = Config()
