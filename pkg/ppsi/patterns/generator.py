"""Oblique phase-shifted sinusoidal patterns.

Pattern i of frequency k and direction theta is

    P_i(u', v') = a + b * cos(2*pi*k/period * rho_hat + 2*pi*i/S)

where rho_hat is the projection bin of the projector pixel:

    rho_hat = rint((u' cos(theta) + v' sin(theta)) / pitch) + offset
    pitch   = max(|cos(theta)|, |sin(theta)|)

With this pitch every bin collects exactly one pixel per raster row (or
column), so binned projections of smooth lobes stay smooth at oblique
angles. For theta in {0, 45, 90, 135} deg the bin is exact (no rounding)
and the pattern is the plain cosine of the projection coordinate.
Coarse/full sets use period L (bin count), fine sets the reception-field
period M_theta. Geometric offsets are rho = (rho_hat - offset) * pitch.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Iterator, List, Tuple, Union

import numpy as np
import yaml
from PIL import Image

from ..geometry.rig import DeviceSpec
from .budget import fine_frequency_count

logger = logging.getLogger(__name__)

STAGES = ("coarse", "fine", "full")


def _check_theta(theta: float) -> None:
    if not 0.0 <= theta < math.pi:
        raise ValueError(f"Direction theta={theta} outside [0, pi)")


def equivalent_resolution(theta: float, M: int, N: int) -> int:
    """
    L_theta, the projector extent along direction theta in pixels.

    Raises:
        ValueError: theta outside [0, pi).
    """
    _check_theta(theta)
    if theta <= math.pi / 2:
        return int(math.ceil(M * math.cos(theta) + N * math.sin(theta) - 1e-9))
    return int(math.ceil(-M * math.cos(theta) + N * math.sin(theta) - 1e-9))


def projection_pitch(theta: float) -> float:
    """Geometric width of one projection bin, max(|cos|, |sin|)."""
    _check_theta(theta)
    return max(abs(math.cos(theta)), abs(math.sin(theta)))


def _bin_coordinate(theta: float, u, v):
    pitch = projection_pitch(theta)
    return (np.multiply(u, math.cos(theta)) + np.multiply(v, math.sin(theta))) / pitch


def _corner_bins(theta: float, M: int, N: int) -> Tuple[int, int]:
    corners = _bin_coordinate(theta, np.array([0, M - 1, 0, M - 1]), np.array([0, 0, N - 1, N - 1]))
    bins = np.rint(corners).astype(np.int64)
    return int(bins.min()), int(bins.max())


def rho_offset(theta: float, M: int, N: int) -> int:
    """Bin shift that keeps projection indices non-negative (zero for theta <= pi/2)."""
    return -_corner_bins(theta, M, N)[0]


def projection_length(theta: float, M: int, N: int) -> int:
    """Number of projection bins L covering the M x N raster along theta."""
    lo, hi = _corner_bins(theta, M, N)
    return hi - lo + 1


def bin_to_rho(theta: float, index, M: int, N: int):
    """Geometric projection offset rho of a (fractional) bin index."""
    return (np.asarray(index, dtype=np.float64) - rho_offset(theta, M, N)) * projection_pitch(theta)


def rho_to_bin(theta: float, rho, M: int, N: int):
    """Fractional bin index of a geometric projection offset."""
    return np.asarray(rho, dtype=np.float64) / projection_pitch(theta) + rho_offset(theta, M, N)


@lru_cache(maxsize=32)
def _projection_index_cached(theta: float, M: int, N: int) -> np.ndarray:
    v, u = np.mgrid[0:N, 0:M].astype(np.float64)
    index = np.rint(_bin_coordinate(theta, u, v)).astype(np.int64) + rho_offset(theta, M, N)
    index.setflags(write=False)
    return index


def projection_index(theta: float, M: int, N: int) -> np.ndarray:
    """(N, M) integer map from projector pixel to projection bin in [0, L)."""
    _check_theta(theta)
    return _projection_index_cached(float(theta), int(M), int(N))


@dataclass
class PatternSpec:
    """
    One direction's pattern family.

    Attributes:
        theta: Direction angle in radians
        period: projection_length for coarse/full sets, M_theta for fine sets
        frequencies: Captured integer frequencies k
        phase_steps: S >= 3
        mean: a
        contrast: b, with 0 < b <= min(a, 1 - a)
        stage: "coarse", "fine" or "full"
    """
    theta: float
    period: int
    frequencies: List[int] = field(default_factory=list)
    phase_steps: int = 3
    mean: float = 0.5
    contrast: float = 0.4
    stage: str = "coarse"

    def __post_init__(self):
        _check_theta(self.theta)
        self.frequencies = [int(k) for k in self.frequencies]
        if self.period < 1:
            raise ValueError(f"Pattern period must be >= 1, got {self.period}")
        if self.phase_steps < 3:
            raise ValueError(f"Phase step count must be >= 3, got {self.phase_steps}")
        if not (0.0 < self.contrast <= min(self.mean, 1.0 - self.mean)):
            raise ValueError(
                f"Contrast {self.contrast} violates 0 < b <= min(a, 1-a) for mean {self.mean}"
            )
        for k in self.frequencies:
            if not 0 <= k < self.period:
                raise ValueError(f"Frequency {k} outside [0, {self.period - 1}]")
        if self.stage not in STAGES:
            raise ValueError(f"Unknown pattern stage {self.stage!r}")

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta)

    @property
    def pattern_count(self) -> int:
        return len(self.frequencies) * self.phase_steps

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theta_deg": round(self.theta_deg, 9),
            "period": self.period,
            "frequencies": list(self.frequencies),
            "phase_steps": self.phase_steps,
            "mean": self.mean,
            "contrast": self.contrast,
            "stage": self.stage,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PatternSpec":
        return cls(
            theta=math.radians(float(data["theta_deg"])),
            period=int(data["period"]),
            frequencies=list(data["frequencies"]),
            phase_steps=int(data["phase_steps"]),
            mean=float(data["mean"]),
            contrast=float(data["contrast"]),
            stage=data.get("stage", "coarse"),
        )


def _check_indices(spec: PatternSpec, k: int, i: int) -> None:
    if not 0 <= i < spec.phase_steps:
        raise ValueError(f"Phase index {i} outside [0, {spec.phase_steps})")
    if k not in spec.frequencies:
        raise ValueError(f"Frequency {k} not in the pattern set")


def pattern_profile(spec: PatternSpec, k: int, i: int, length: int) -> np.ndarray:
    """Pattern value for each projection-line index 0..length-1."""
    _check_indices(spec, k, i)
    rho = np.arange(length, dtype=np.float64)
    return spec.mean + spec.contrast * np.cos(
        2.0 * np.pi * k / spec.period * rho + 2.0 * np.pi * i / spec.phase_steps
    )


def generate_pattern(spec: PatternSpec, k: int, i: int, device: DeviceSpec) -> np.ndarray:
    """
    Projector raster (N rows x M cols) of pattern (k, i), values in [a-b, a+b].

    Raises:
        ValueError: i outside [0, S) or k not in spec.frequencies.
    """
    index = projection_index(spec.theta, device.M, device.N)
    length = projection_length(spec.theta, device.M, device.N)
    return pattern_profile(spec, k, i, length)[index]


def iter_patterns(spec: PatternSpec, device: DeviceSpec) -> Iterator[Tuple[int, int, np.ndarray]]:
    for k in spec.frequencies:
        for i in range(spec.phase_steps):
            yield k, i, generate_pattern(spec, k, i, device)


def pattern_filename(theta_deg: float, k: int, i: int, fmt: str = "pgm") -> str:
    return f"pat_t{theta_deg:g}_k{k}_i{i}.{fmt}"


def _save_image(image: np.ndarray, path: Path, fmt: str) -> None:
    if fmt == "pgm":
        quantized = np.clip(np.rint(image * 65535.0), 0, 65535).astype(np.uint16)
        Image.fromarray(quantized).save(path)
    elif fmt == "pfm":
        Image.fromarray(image.astype(np.float32)).save(path)
    else:
        raise ValueError(f"Unsupported pattern format {fmt!r}; use 'pgm' or 'pfm'")


def write_pattern_set(
    specs: List[PatternSpec],
    device: DeviceSpec,
    output_dir: Union[str, Path],
    fmt: str = "pgm",
    manifest_name: str = "patterns.yaml",
    extra: Dict[str, Any] = None,
) -> Path:
    """
    Write every pattern to output_dir/<stage>/pat_t{deg}_k{k}_i{i}.<fmt> and a
    YAML manifest listing the specs. Returns the manifest path.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written = 0
    for spec in specs:
        stage_dir = output_dir / spec.stage
        stage_dir.mkdir(exist_ok=True)
        for k, i, image in iter_patterns(spec, device):
            _save_image(image, stage_dir / pattern_filename(spec.theta_deg, k, i, fmt), fmt)
            written += 1

    manifest = {
        "device": device.to_dict(),
        "format": fmt,
        "pattern_count": written,
        "sets": [spec.to_dict() for spec in specs],
    }
    if extra:
        manifest.update(extra)
    manifest_path = output_dir / manifest_name
    with open(manifest_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(manifest, f, sort_keys=False)
    logger.info("Wrote %d patterns (%s) to %s", written, fmt, output_dir)
    return manifest_path


# ---------------------------------------------------------------------------
# Per-stage pattern sets
# ---------------------------------------------------------------------------

def coarse_spec(
    theta: float,
    device: DeviceSpec,
    coarse_count: int = 10,
    phase_steps: int = 3,
    mean: float = 0.5,
    contrast: float = 0.4,
) -> PatternSpec:
    """Lowest N_c frequencies (DC included) at period L."""
    length = projection_length(theta, device.M, device.N)
    if not 2 <= coarse_count <= length:
        raise ValueError(f"Coarse frequency count {coarse_count} outside [2, {length}]")
    return PatternSpec(theta, length, list(range(coarse_count)), phase_steps, mean, contrast, "coarse")


def fine_spec(
    theta: float,
    period: int,
    eta: float = 1.0,
    phase_steps: int = 3,
    mean: float = 0.5,
    contrast: float = 0.4,
) -> PatternSpec:
    """
    Fine frequencies 1..r-1 at period M_theta, r = fine_frequency_count.

    The DC pattern is not repeated: the fine step reuses the coarse DC image.
    """
    retained = fine_frequency_count(period, eta)
    return PatternSpec(theta, period, list(range(1, retained)), phase_steps, mean, contrast, "fine")


def full_spec(
    theta: float,
    device: DeviceSpec,
    phase_steps: int = 3,
    mean: float = 0.5,
    contrast: float = 0.4,
) -> PatternSpec:
    """Conjugate-symmetric half spectrum k = 0..L//2, the full-frequency reference."""
    length = projection_length(theta, device.M, device.N)
    return PatternSpec(theta, length, list(range(length // 2 + 1)), phase_steps, mean, contrast, "full")
