"""Subpixel matching error between two sets of correspondences."""

import logging
import math
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..contracts import CandidateMatch

logger = logging.getLogger(__name__)

Pixel = Tuple[int, int]


def sme(ref_point: Sequence[float], test_point: Sequence[float]) -> float:
    """Half the squared distance between two projector points."""
    du = float(ref_point[0]) - float(test_point[0])
    dv = float(ref_point[1]) - float(test_point[1])
    return 0.5 * (du * du + dv * dv)


def primary_candidate(candidates: Sequence[CandidateMatch]) -> Optional[CandidateMatch]:
    """Highest-consensus candidate, ties broken by peak amplitude."""
    if not candidates:
        return None
    return max(candidates, key=lambda m: (m.consensus, m.amplitude))


def match_errors(
    reference: Mapping[Pixel, Sequence[CandidateMatch]],
    test: Mapping[Pixel, Sequence[CandidateMatch]],
) -> Tuple[Dict[Pixel, float], float]:
    """
    SME of the primary candidates, per pixel matched in both runs.

    Returns:
        (errors, coverage) where coverage is the fraction of reference-matched
        pixels that the test run also matched.
    """
    errors: Dict[Pixel, float] = {}
    matched_reference = 0
    for pixel, candidates in reference.items():
        ref = primary_candidate(candidates)
        if ref is None:
            continue
        matched_reference += 1
        other = primary_candidate(test.get(pixel, ()))
        if other is None:
            continue
        errors[pixel] = sme(ref.projector_point, other.projector_point)
    coverage = len(errors) / matched_reference if matched_reference else 0.0
    return errors, coverage


def mean_sme(errors: Mapping[Pixel, float]) -> float:
    """Mean over the matched pixels; NaN when none matched."""
    if not errors:
        logger.warning("No pixel matched in both runs; mean SME undefined")
        return math.nan
    return float(np.mean(list(errors.values())))
