"""Inter-stage data contracts for the pPSI pipeline."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

# Index value marking a direction excluded from a peak tuple (suspected mixed peak).
EXCLUDED = -1


@dataclass(frozen=True)
class PeakTuple:
    """
    Peak indices per direction, in the capture direction order.

    EXCLUDED (-1) marks a direction whose re-projected line found no peak
    within tolerance.
    """
    indices: Tuple[int, ...]

    @property
    def consensus(self) -> int:
        return sum(1 for i in self.indices if i != EXCLUDED)

    def valid_directions(self) -> List[int]:
        return [d for d, i in enumerate(self.indices) if i != EXCLUDED]

    def subsumes(self, other: "PeakTuple") -> bool:
        """True when every valid entry of other is equal here and this tuple has more valid entries."""
        if len(other.indices) != len(self.indices) or self.consensus <= other.consensus:
            return False
        return all(o == EXCLUDED or o == s for s, o in zip(self.indices, other.indices))

    def __str__(self) -> str:
        return "(" + ",".join(str(i) for i in self.indices) + ")"


@dataclass
class CandidateMatch:
    """One projector correspondence hypothesis for a camera pixel."""
    camera_pixel: Tuple[int, int]
    projector_point: Tuple[float, float]
    source: Optional[PeakTuple] = None
    epipolar_residual: float = 0.0
    consensus: int = 1
    reprojection_residual: float = 0.0  # max |rho_d - projected rho| over valid directions
    amplitude: float = 0.0              # mean peak height over valid directions
    strategy: str = "ransac4"

    @property
    def low_confidence(self) -> bool:
        return self.strategy == "ransac4" and self.consensus < 3

    def to_dict(self) -> Dict[str, Any]:
        return {
            "u": self.camera_pixel[0],
            "v": self.camera_pixel[1],
            "u_proj": self.projector_point[0],
            "v_proj": self.projector_point[1],
            "consensus": self.consensus,
            "residual": self.epipolar_residual,
            "reprojection_residual": self.reprojection_residual,
            "amplitude": self.amplitude,
            "tuple": str(self.source) if self.source is not None else "",
            "strategy": self.strategy,
        }


@dataclass
class SweepRow:
    """One capture ratio of a sweep."""
    eta: float
    patterns: int
    mean_sme_px: float
    coverage: float
    rms_mm: float
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eta": self.eta,
            "patterns": self.patterns,
            "mean_sme_px": self.mean_sme_px,
            "coverage": self.coverage,
            "rms_mm": self.rms_mm,
        }


@dataclass
class SweepReport:
    """Capture-ratio sweep of one scene."""
    scene_id: str
    strategy: str
    directions_deg: List[float]
    rows: List[SweepRow] = field(default_factory=list)
    knee_eta: Optional[float] = None
    spearman_rho: Optional[float] = None
    cumulative_ned: Optional[float] = None

    @property
    def etas(self) -> List[float]:
        return [row.eta for row in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scene_id": self.scene_id,
            "strategy": self.strategy,
            "directions_deg": list(self.directions_deg),
            "knee_eta": self.knee_eta,
            "spearman_rho": self.spearman_rho,
            "cumulative_ned": self.cumulative_ned,
            "rows": [row.to_dict() for row in self.rows],
            "failures": {str(row.eta): row.error for row in self.rows if row.error},
        }
