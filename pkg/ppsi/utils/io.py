"""File I/O for stage artifacts.

Binary arrays are raw little-endian float32, concatenated in manifest order;
each binary file has a YAML manifest next to it. Tables are CSV with a
header row.
"""

import csv
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np
import yaml

from ..contracts import CandidateMatch, PeakTuple, SweepReport
from ..geometry.rig import DeviceSpec
from ..ltc_sim.render import IntensityStack, StackBlock
from ..patterns.generator import PatternSpec
from ..recon.lse import ProjectionFunction, mask_span

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
_DTYPE = np.dtype("<f4")

MATCH_COLUMNS = (
    "u", "v", "u_proj", "v_proj", "consensus", "residual",
    "reprojection_residual", "amplitude", "tuple", "strategy",
)
SWEEP_COLUMNS = ("eta", "patterns", "mean_sme_px", "coverage", "rms_mm")


def require_file(path: PathLike, what: str) -> Path:
    """Path to an existing artifact, or FileNotFoundError naming it."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"missing {what}: {path}")
    return path


def _load_manifest(path: PathLike, what: str) -> Dict[str, Any]:
    with open(require_file(path, what), "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: {what} is not a mapping")
    return data


def _read_block(raw: np.ndarray, offset: int, shape: Sequence[int], path: Path) -> Tuple[np.ndarray, int]:
    size = int(np.prod(shape))
    if offset + size > raw.size:
        raise ValueError(f"{path}: truncated binary, need {offset + size} values, have {raw.size}")
    return raw[offset:offset + size].astype(np.float64).reshape(shape), offset + size


# ---------------------------------------------------------------------------
# Intensity stacks
# ---------------------------------------------------------------------------

def write_stack(stack: IntensityStack, data_path: PathLike, manifest_path: PathLike) -> None:
    """Blocks in capture order, each (frequency, phase, row, col)."""
    data_path, manifest_path = Path(data_path), Path(manifest_path)
    data_path.parent.mkdir(parents=True, exist_ok=True)
    with open(data_path, "wb") as f:
        for block in stack.blocks:
            f.write(block.data.astype(_DTYPE).tobytes())
    manifest = stack.to_dict()
    manifest["data_file"] = data_path.name
    manifest["dtype"] = "float32-le"
    with open(manifest_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(manifest, f, sort_keys=False)
    logger.info("Wrote %d images to %s", stack.image_count, data_path)


def read_stack(data_path: PathLike, manifest_path: PathLike) -> IntensityStack:
    """
    Raises:
        FileNotFoundError: stack or manifest missing.
        ValueError: binary shorter than the manifest describes.
    """
    manifest = _load_manifest(manifest_path, "stack manifest")
    data_path = require_file(data_path, "intensity stack")
    raw = np.fromfile(data_path, dtype=_DTYPE)
    device = DeviceSpec(**manifest["device"])
    blocks: List[StackBlock] = []
    offset = 0
    for entry in manifest.get("blocks", []):
        data, offset = _read_block(raw, offset, entry["shape"], data_path)
        blocks.append(StackBlock(spec=PatternSpec.from_dict(entry["spec"]), data=data))
    return IntensityStack(device=device, blocks=blocks, scene_id=manifest.get("scene_id", "scene"))


# ---------------------------------------------------------------------------
# Projection functions
# ---------------------------------------------------------------------------

def write_projections(
    projections: Sequence[ProjectionFunction],
    camera_shape: Tuple[int, int],
    data_path: PathLike,
    manifest_path: PathLike,
) -> None:
    """Per direction: values (pixels, L), then the mask as 0/1 when present."""
    data_path, manifest_path = Path(data_path), Path(manifest_path)
    data_path.parent.mkdir(parents=True, exist_ok=True)
    entries = []
    with open(data_path, "wb") as f:
        for projection in projections:
            f.write(projection.values.astype(_DTYPE).tobytes())
            has_mask = projection.mask is not None
            if has_mask:
                f.write(projection.mask.astype(_DTYPE).tobytes())
            entry = projection.to_dict()
            entry["theta"] = projection.theta
            entry["has_mask"] = has_mask
            entries.append(entry)
    manifest = {
        "camera_shape": list(camera_shape),
        "data_file": data_path.name,
        "dtype": "float32-le",
        "directions": entries,
    }
    with open(manifest_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(manifest, f, sort_keys=False)
    logger.info("Wrote %d projection directions to %s", len(projections), data_path)


def read_projections(data_path: PathLike, manifest_path: PathLike) -> Tuple[List[ProjectionFunction], Tuple[int, int]]:
    """Projection functions and the camera (rows, cols) they cover."""
    manifest = _load_manifest(manifest_path, "projection manifest")
    data_path = require_file(data_path, "projection functions")
    raw = np.fromfile(data_path, dtype=_DTYPE)
    rows, cols = (int(x) for x in manifest["camera_shape"])
    out: List[ProjectionFunction] = []
    offset = 0
    for entry in manifest.get("directions", []):
        shape = (int(entry["pixels"]), int(entry["length"]))
        values, offset = _read_block(raw, offset, shape, data_path)
        mask = support = None
        if entry.get("has_mask"):
            flags, offset = _read_block(raw, offset, shape, data_path)
            mask = flags > 0.5
            support = np.array([mask_span(m) for m in mask], dtype=np.int64)
        out.append(ProjectionFunction(
            theta=float(entry["theta"]), values=values, mask=mask, support=support,
            scale=float(entry["scale"]), stage=entry["stage"],
        ))
    return out, (rows, cols)


# ---------------------------------------------------------------------------
# CSV tables
# ---------------------------------------------------------------------------

def write_matches(matches: Mapping[Tuple[int, int], Sequence[CandidateMatch]], path: PathLike) -> int:
    """One row per candidate, pixels in row-major order. Returns the row count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=MATCH_COLUMNS)
        writer.writeheader()
        for pixel in sorted(matches, key=lambda p: (p[1], p[0])):
            for match in matches[pixel]:
                writer.writerow({k: _cell(v) for k, v in match.to_dict().items()})
                count += 1
    logger.info("Wrote %d candidate matches to %s", count, path)
    return count


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return value


def _parse_tuple(text: str):
    text = text.strip()
    if not text:
        return None
    return PeakTuple(tuple(int(x) for x in text.strip("()").split(",")))


def read_matches(path: PathLike) -> Dict[Tuple[int, int], List[CandidateMatch]]:
    out: Dict[Tuple[int, int], List[CandidateMatch]] = {}
    with open(require_file(path, "candidate matches"), "r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            pixel = (int(row["u"]), int(row["v"]))
            out.setdefault(pixel, []).append(CandidateMatch(
                camera_pixel=pixel,
                projector_point=(float(row["u_proj"]), float(row["v_proj"])),
                source=_parse_tuple(row.get("tuple", "")),
                epipolar_residual=float(row["residual"]),
                consensus=int(row["consensus"]),
                reprojection_residual=float(row.get("reprojection_residual") or 0.0),
                amplitude=float(row.get("amplitude") or 0.0),
                strategy=row.get("strategy") or "ransac4",
            ))
    return out


def write_metrics(rows: Iterable[Mapping[str, Any]], path: PathLike) -> None:
    """Key/value metrics table: columns metric, value."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["metric", "value"])
        for row in rows:
            for key, value in row.items():
                writer.writerow([key, _cell(value)])


def read_metrics(path: PathLike) -> Dict[str, str]:
    with open(require_file(path, "metrics"), "r", encoding="utf-8", newline="") as f:
        return {row["metric"]: row["value"] for row in csv.DictReader(f)}


def write_sweep(report: SweepReport, path: PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in report.rows:
            writer.writerow({k: _cell(v) for k, v in row.to_dict().items()})
    logger.info("Wrote %d sweep rows to %s", len(report.rows), path)


def read_sweep(path: PathLike) -> List[Dict[str, float]]:
    with open(require_file(path, "sweep report"), "r", encoding="utf-8", newline="") as f:
        return [
            {k: (int(v) if k == "patterns" else float(v) if v not in ("", "nan") else math.nan) for k, v in row.items()}
            for row in csv.DictReader(f)
        ]
