"""Pattern budget of the coarse-to-fine capture.

Per direction the capture projects N_c coarse frequencies and the retained
half spectrum of the fine step, S phases each. The fine DC pattern is the
same constant image as the coarse DC pattern, hence the trailing -S.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict

# Capture ratios whose reference pattern counts do not follow the budget
# formula with N_c = 10 (35 patterns are quoted at 10%).
MISMATCHED_COUNT_ETAS = (0.10,)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def fine_frequency_count(period: int, eta: float) -> int:
    """Number of lowest fine frequencies (DC included) kept at capture ratio eta."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"Capture ratio eta must be in (0, 1], got {eta}")
    return max(1, round_half_up(eta * (period // 2 + 1)))


@dataclass(frozen=True)
class CaptureBudget:
    """
    Attributes:
        coarse_count: N_c
        fine_size: N_f, the fine period M_theta
        eta: capture ratio, 0 < eta <= 1
        phase_steps: S
        directions: D
    """
    coarse_count: int
    fine_size: int
    eta: float
    phase_steps: int = 3
    directions: int = 1


@dataclass(frozen=True)
class PatternCount:
    per_direction: int
    total: int
    fine_frequencies: int

    def capture_seconds(self, projector_fps: float) -> float:
        """Projection time estimate from the pattern count alone."""
        return self.total / projector_fps

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_direction": self.per_direction,
            "total": self.total,
            "fine_frequencies": self.fine_frequencies,
        }


def pattern_count(budget: CaptureBudget) -> PatternCount:
    """
    Patterns needed per direction and in total.

    The three branches follow the parity of S and N_f; the fine-frequency
    count is rounded to the nearest integer.

    Raises:
        ValueError: eta outside (0, 1].
    """
    eta = budget.eta
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"Capture ratio eta must be in (0, 1], got {eta}")
    S, N_c, N_f = budget.phase_steps, budget.coarse_count, budget.fine_size

    if S % 2 == 0:
        fine = round_half_up(eta * N_f / 2.0)
    elif N_f % 2 == 1:
        fine = round_half_up(eta * (N_f + 1) / 2.0)
    else:
        fine = round_half_up(eta * (N_f / 2.0 + 1))

    per_direction = S * N_c + S * fine - S
    if per_direction <= 0:
        raise ValueError(f"Budget {budget} yields a non-positive pattern count")
    return PatternCount(
        per_direction=per_direction,
        total=per_direction * budget.directions,
        fine_frequencies=fine,
    )
