"""Triangulated point clouds with per-point provenance, and ASCII PLY I/O."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from ..contracts import CandidateMatch
from ..geometry.lines import DegenerateGeometryError
from ..geometry.rig import StereoRig

logger = logging.getLogger(__name__)

_PLY_PROPERTIES = (
    ("x", "double"),
    ("y", "double"),
    ("z", "double"),
    ("cam_u", "int"),
    ("cam_v", "int"),
    ("candidate", "int"),
    ("consensus", "int"),
)


@dataclass
class PointCloud:
    """
    Attributes:
        points: (n, 3) coordinates in mm
        camera_pixels: (n, 2) camera pixel (u, v) each point came from
        candidates: (n,) index of the candidate within its pixel's match list
        consensus: (n,) consensus count of the originating match
    """
    points: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    camera_pixels: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64))
    candidates: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    consensus: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        n = self.points.shape[0]
        self.camera_pixels = np.asarray(self.camera_pixels, dtype=np.int64).reshape(-1, 2)
        self.candidates = np.asarray(self.candidates, dtype=np.int64).reshape(-1)
        self.consensus = np.asarray(self.consensus, dtype=np.int64).reshape(-1)
        if self.consensus.size == 0 and n:
            self.consensus = np.ones(n, dtype=np.int64)
        if not (self.camera_pixels.shape[0] == self.candidates.size == self.consensus.size == n):
            raise ValueError("Point cloud arrays have inconsistent lengths")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("Point cloud contains non-finite coordinates")

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def subset(self, indices: Iterable[int]) -> "PointCloud":
        idx = np.asarray(sorted(indices), dtype=np.int64)
        return PointCloud(
            points=self.points[idx],
            camera_pixels=self.camera_pixels[idx],
            candidates=self.candidates[idx],
            consensus=self.consensus[idx],
        )

    def provenance(self) -> List[Tuple[int, int, int]]:
        return [(int(u), int(v), int(c)) for (u, v), c in zip(self.camera_pixels, self.candidates)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "points": len(self),
            "pixels": len({(int(u), int(v)) for u, v in self.camera_pixels}),
            "bounds_mm": (
                [self.points.min(axis=0).tolist(), self.points.max(axis=0).tolist()] if len(self) else None
            ),
        }

    # ------------------------------------------------------------------
    # PLY
    # ------------------------------------------------------------------

    def save_ply(self, path: Union[str, Path], comments: Sequence[str] = ()) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = ["ply", "format ascii 1.0"]
        header += [f"comment {c}" for c in comments]
        header.append(f"element vertex {len(self)}")
        header += [f"property {kind} {name}" for name, kind in _PLY_PROPERTIES]
        header.append("end_header")
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(header) + "\n")
            for p, (u, v), c, k in zip(self.points, self.camera_pixels, self.candidates, self.consensus):
                f.write(f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r} {int(u)} {int(v)} {int(c)} {int(k)}\n")
        logger.info("Wrote %d points to %s", len(self), path)
        return path

    @classmethod
    def load_ply(cls, path: Union[str, Path]) -> "PointCloud":
        """
        Read an ASCII PLY written by save_ply (x y z required, provenance optional).

        Raises:
            FileNotFoundError: missing file.
            ValueError: not an ASCII PLY or truncated body.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Point cloud not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
        if not lines or lines[0].strip() != "ply":
            raise ValueError(f"{path} is not a PLY file")

        vertex_count = 0
        names: List[str] = []
        header_end = None
        for i, line in enumerate(lines):
            if line.startswith("format") and "ascii" not in line:
                raise ValueError(f"{path}: only ASCII PLY is supported")
            if line.startswith("element vertex"):
                vertex_count = int(line.split()[2])
            elif line.startswith("property"):
                names.append(line.split()[-1])
            elif line.strip() == "end_header":
                header_end = i + 1
                break
        if header_end is None or len(lines) < header_end + vertex_count:
            raise ValueError(f"{path}: truncated PLY")

        rows = np.array(
            [[float(x) for x in line.split()] for line in lines[header_end:header_end + vertex_count]]
        ).reshape(vertex_count, len(names))
        column = {name: rows[:, i] for i, name in enumerate(names)}
        n = vertex_count
        zeros = np.zeros(n)
        return cls(
            points=np.stack([column["x"], column["y"], column["z"]], axis=1) if n else np.empty((0, 3)),
            camera_pixels=np.stack([column.get("cam_u", zeros), column.get("cam_v", zeros)], axis=1).astype(np.int64),
            candidates=column.get("candidate", zeros).astype(np.int64),
            consensus=column.get("consensus", np.ones(n)).astype(np.int64),
        )


def build_cloud(
    matches: Union[Mapping[Tuple[int, int], Sequence[CandidateMatch]], Sequence[CandidateMatch]],
    rig: StereoRig,
) -> PointCloud:
    """
    Triangulate every candidate match.

    Virtual candidates (from global-illumination peaks) become virtually
    matched points here; the continuity filter removes them later.
    Degenerate triangulations are skipped and logged.
    """
    if isinstance(matches, Mapping):
        groups = [matches[pixel] for pixel in sorted(matches, key=lambda p: (p[1], p[0]))]
    else:
        groups = [list(matches)]

    points, pixels, candidates, consensus = [], [], [], []
    skipped = 0
    for group in groups:
        per_pixel: Dict[Tuple[int, int], int] = {}
        for match in group:
            pixel = tuple(match.camera_pixel)
            index = per_pixel.get(pixel, 0)
            per_pixel[pixel] = index + 1
            try:
                result = rig.triangulate(pixel, match.projector_point)
            except (DegenerateGeometryError, ValueError) as exc:
                skipped += 1
                logger.debug("Pixel %s candidate %d skipped: %s", pixel, index, exc)
                continue
            points.append(result.point)
            pixels.append(pixel)
            candidates.append(index)
            consensus.append(match.consensus)

    if skipped:
        logger.warning("Skipped %d degenerate triangulations", skipped)
    logger.info("Triangulated %d points", len(points))
    if not points:
        return PointCloud()
    return PointCloud(
        points=np.asarray(points),
        camera_pixels=np.asarray(pixels),
        candidates=np.asarray(candidates),
        consensus=np.asarray(consensus),
    )
