"""Tests for peak extraction and the matching strategies."""

import math

import numpy as np
import pytest

from ppsi.contracts import EXCLUDED, CandidateMatch, PeakTuple
from ppsi.geometry import point_line_distance, project_point
from ppsi.ltc_sim import Lobe, projected_transport
from ppsi.matching import (
    PeakList,
    direction_peaks,
    epipolar_filter,
    find_peaks,
    naive_intersection,
    ransac_match,
    three_direction_match,
    unidirectional_match,
)
from ppsi.patterns import projection_pitch, rho_offset
from ppsi.recon import ProjectionFunction

from .conftest import LOBE_RANGE, degrees, lobe_scene

FOUR = degrees(0, 45, 90, 135)

# Camera pixel (0, 0) of a 1x1 camera sees the plane Z = 500 mm at
# projector (128, 127.5), which lies on its epipolar line.
DIRECT = (128.0, 127.5)


def oracle_peaks(scene, thetas, pixel_index=0):
    """PeakList per direction from the exact projection functions."""
    out = []
    for theta in thetas:
        projection = ProjectionFunction(theta=theta, values=projected_transport(scene, theta))
        out.append(direction_peaks(projection, scene.device)[pixel_index])
    return out


@pytest.fixture(scope="module")
def mixed_scene():
    """Speckle 3.5 px below the direct lobe: the 90 deg peaks merge, the others separate."""
    return lobe_scene({(0, 0): [Lobe(DIRECT, 1.0, 2.0), Lobe((168.0, 131.0), 0.9, 2.0)]}, camera=1)


@pytest.fixture(scope="module")
def clean_scene():
    return lobe_scene({(0, 0): [Lobe(DIRECT, 1.0, 1.5)]}, camera=1)


# ---------------------------------------------------------------------------
# Peaks
# ---------------------------------------------------------------------------

class TestFindPeaks:

    def test_gaussian_centroid(self):
        x = np.arange(256, dtype=np.float64)
        f = np.exp(-(x - 100.3) ** 2 / (2 * 1.5 ** 2))
        peaks = find_peaks(f, 0.0)
        assert peaks.count == 1
        assert peaks.positions[0] == pytest.approx(100.3, abs=0.1)
        assert peaks.amplitudes[0] == pytest.approx(f[100])

    def test_positions_sorted_and_thresholded(self):
        x = np.arange(256, dtype=np.float64)
        f = (0.6 * np.exp(-(x - 150) ** 2 / 4.5) + np.exp(-(x - 40) ** 2 / 4.5)
             + 0.05 * np.exp(-(x - 220) ** 2 / 4.5))
        peaks = find_peaks(f, 0.0)
        assert peaks.positions == pytest.approx([40.0, 150.0], abs=1e-9)
        assert peaks.strongest() == 0

    def test_bin_to_geometric_offset(self):
        f = np.zeros(64)
        f[[29, 30, 31]] = [0.75, 1.0, 0.75]
        peaks = find_peaks(f, math.pi / 4, offset=10, pitch=math.sqrt(0.5))
        assert peaks.positions[0] == pytest.approx(20 * math.sqrt(0.5))

    def test_flat_function_has_no_peaks(self):
        assert find_peaks(np.zeros(32), 0.0).count == 0

    def test_nearest(self):
        peaks = PeakList(theta=0.0, positions=[1.0, 5.0], amplitudes=[1.0, 2.0])
        assert peaks.nearest(4.2) == (1, pytest.approx(0.8))
        assert PeakList(theta=0.0).nearest(3.0) == (-1, math.inf)

    def test_unreconstructable_pixels_get_empty_lists(self, clean_scene):
        projection = ProjectionFunction(
            theta=0.0,
            values=projected_transport(clean_scene, 0.0),
            mask=np.zeros((1, 256), dtype=bool),
            support=np.zeros(1, dtype=np.int64),
        )
        assert direction_peaks(projection, clean_scene.device)[0].count == 0


class TestLocalMaxAccuracy:

    def test_direct_peak_within_half_pixel(self):
        rng = np.random.default_rng(77)
        lo, hi = LOBE_RANGE
        errors = []
        for _ in range(100):
            direct = Lobe(tuple(rng.uniform(lo, hi, size=2)), 1.0, 1.5)
            speckles = [
                Lobe(tuple(rng.uniform(lo, hi, size=2)), float(rng.uniform(0.3, 0.8)), 1.5)
                for _ in range(int(rng.integers(0, 3)))
            ]
            scene = lobe_scene({(0, 0): [direct] + speckles}, camera=1)
            for theta in FOUR:
                rho = project_point(theta, direct.center)
                # collinear speckles merge with the direct lobe; skip those directions
                if any(abs(project_point(theta, s.center) - rho) <= 11.0 for s in speckles):
                    continue
                values = projected_transport(scene, theta)[0]
                peaks = find_peaks(
                    values, theta, offset=rho_offset(theta, 256, 256), pitch=projection_pitch(theta),
                )
                _, distance = peaks.nearest(rho)
                assert distance < 0.5
                errors.append(distance)
        assert len(errors) > 200
        assert np.mean(errors) < 0.2


# ---------------------------------------------------------------------------
# Four-direction RANSAC
# ---------------------------------------------------------------------------

class TestRansacMatch:

    def test_naive_intersection_is_pulled_by_mixed_peak(self, mixed_scene):
        peaks = oracle_peaks(mixed_scene, FOUR)
        assert peaks[2].count == 1
        naive = naive_intersection(peaks, mixed_scene.rig, (0, 0))
        assert abs(naive.projector_point[1] - DIRECT[1]) > 0.5

    def test_mixed_direction_is_excluded(self, mixed_scene):
        peaks = oracle_peaks(mixed_scene, FOUR)
        matches = ransac_match(peaks, mixed_scene.rig, (0, 0))
        assert len(matches) == 1
        match = matches[0]
        assert match.source.indices == (0, 0, EXCLUDED, 1)
        assert match.consensus == 3
        assert match.projector_point == pytest.approx(DIRECT, abs=0.2)
        assert not match.low_confidence

    def test_clean_pixel_uses_all_directions(self, clean_scene):
        matches = ransac_match(oracle_peaks(clean_scene, FOUR), clean_scene.rig, (0, 0))
        assert [m.consensus for m in matches] == [4]
        assert matches[0].epipolar_residual < 0.1

    def test_requires_canonical_directions(self, clean_scene):
        peaks = oracle_peaks(clean_scene, degrees(0, 45, 90))
        with pytest.raises(ValueError):
            ransac_match(peaks, clean_scene.rig, (0, 0))

    def test_collinear_speckles_off_epipolar_line(self):
        # every pairwise intersection lands >= 12.5 px from v' = 127.5
        scene = lobe_scene({(0, 0): [Lobe((u, 140.0), 1.0, 1.5) for u in (80.0, 130.0, 180.0)]}, camera=1)
        peaks = oracle_peaks(scene, FOUR)
        assert len(peaks[0].positions) == 3
        assert ransac_match(peaks, scene.rig, (0, 0)) == []
        assert ransac_match(peaks, scene.rig, (0, 0), keep_pair_tuples=True) == []

    def test_naive_needs_a_peak_per_direction(self):
        peaks = [PeakList(theta=t, positions=[1.0], amplitudes=[1.0]) for t in FOUR[:3]]
        peaks.append(PeakList(theta=FOUR[3]))
        assert naive_intersection(peaks) is None


class TestPeakTuple:

    def test_consensus_counts_valid_entries(self):
        assert PeakTuple((0, EXCLUDED, 2, 1)).consensus == 3

    def test_subsumption(self):
        full = PeakTuple((0, 0, EXCLUDED, 1))
        pair = PeakTuple((0, 0, EXCLUDED, EXCLUDED))
        assert full.subsumes(pair)
        assert not pair.subsumes(full)
        assert not full.subsumes(PeakTuple((1, 0, EXCLUDED, EXCLUDED)))

    def test_string_form(self):
        assert str(PeakTuple((0, EXCLUDED, 3))) == "(0,-1,3)"


# ---------------------------------------------------------------------------
# Three-direction and unidirectional
# ---------------------------------------------------------------------------

class TestThreeDirection:

    def test_clean_pixel(self, clean_scene):
        peaks = oracle_peaks(clean_scene, degrees(0, 45, 90))
        matches = three_direction_match(peaks, clean_scene.rig, (0, 0))
        assert len(matches) == 1
        assert matches[0].projector_point == pytest.approx(DIRECT, abs=0.2)
        assert matches[0].strategy == "three_direction"

    def test_needs_three_lists(self, clean_scene):
        with pytest.raises(ValueError):
            three_direction_match(oracle_peaks(clean_scene, degrees(0, 90)), clean_scene.rig, (0, 0))


class TestUnidirectional:

    def test_every_peak_becomes_a_candidate(self, clean_scene):
        peaks = PeakList(theta=0.0, positions=[128.0, 160.0], amplitudes=[1.0, 0.4])
        line = clean_scene.rig.epipolar_line((0, 0))
        matches = unidirectional_match(peaks, line, (0, 0))
        assert [m.projector_point[0] for m in matches] == pytest.approx([128.0, 160.0])
        assert all(point_line_distance(m.projector_point, line) < 1e-9 for m in matches)
        assert all(m.consensus == 1 for m in matches)

    def test_parallel_peak_is_skipped(self, clean_scene):
        peaks = PeakList(theta=math.pi / 2, positions=[127.5], amplitudes=[1.0])
        assert unidirectional_match(peaks, clean_scene.rig.epipolar_line((0, 0))) == []

    def test_epipolar_filter(self, clean_scene):
        peaks = PeakList(theta=0.0, positions=[128.0], amplitudes=[1.0])
        matches = unidirectional_match(peaks, (0.0, 1.0, -120.0), (0, 0))
        assert epipolar_filter(matches, clean_scene.rig, (0, 0)) == []

    def test_epipolar_filter_copies_kept_candidates(self, clean_scene):
        candidate = CandidateMatch((0, 0), (128.0, 127.9), strategy="unidirectional")
        kept = epipolar_filter([candidate], clean_scene.rig, (0, 0))
        assert len(kept) == 1
        assert kept[0] is not candidate
        assert kept[0].epipolar_residual == pytest.approx(0.4)
        assert candidate.epipolar_residual == 0.0
