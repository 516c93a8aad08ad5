"""Tests for projection-line intersection and the rectified rig."""

import math

import numpy as np
import pytest

from ppsi.geometry import (
    DegenerateGeometryError,
    Line2D,
    intersect_projection_lines,
    intersect_two_lines,
    point_line_distance,
    project_point,
)
from ppsi.geometry.rig import DeviceSpec, StereoRig

from .conftest import degrees, make_device, make_rig

FOUR = degrees(0, 45, 90, 135)


# ---------------------------------------------------------------------------
# Projection lines
# ---------------------------------------------------------------------------

class TestProjectionLines:

    def test_project_point(self):
        assert project_point(0.0, (3.0, 7.0)) == pytest.approx(3.0)
        assert project_point(math.pi / 2, (3.0, 7.0)) == pytest.approx(7.0)
        assert project_point(math.pi / 4, (1.0, 1.0)) == pytest.approx(math.sqrt(2.0))

    def test_line_coefficients(self):
        a, b, c = Line2D(0.0, 5.0).coefficients()
        assert (a, b, c) == pytest.approx((1.0, 0.0, -5.0))

    def test_line_rejects_theta_out_of_range(self):
        with pytest.raises(ValueError):
            Line2D(math.pi, 1.0)

    def test_two_orthogonal_lines(self):
        point = intersect_projection_lines([(0.0, 3.0), (math.pi / 2, 5.0)])
        assert point == pytest.approx((3.0, 5.0))

    def test_four_lines_through_one_point(self):
        target = (110.5, 120.25)
        lines = [(t, project_point(t, target)) for t in FOUR]
        assert intersect_projection_lines(lines) == pytest.approx(target, abs=1e-9)

    def test_row_scaling_leaves_point_unchanged(self):
        target = (110.5, 120.25)
        rows = [Line2D(t, project_point(t, target)).coefficients() for t in FOUR]
        scaled = [rows[0] * 7.5, rows[1], rows[2] * -2.0, rows[3]]
        assert intersect_projection_lines(scaled) == pytest.approx(intersect_projection_lines(rows), abs=1e-9)
        assert intersect_projection_lines(scaled) == pytest.approx(target, abs=1e-9)

    def test_repeated_direction_in_bundle(self):
        target = (64.0, 200.5)
        lines = [(0.0, target[0]), (0.0, target[0]), (math.pi / 2, target[1]), (math.pi / 2, target[1])]
        assert intersect_projection_lines(lines) == pytest.approx(target, abs=1e-9)

    def test_inconsistent_bundle_returns_none(self):
        lines = [(0.0, 0.0), (math.pi / 2, 0.0), (math.pi / 4, 50.0)]
        assert intersect_projection_lines(lines) is None

    def test_inconsistent_bundle_without_rank_test_is_least_squares(self):
        lines = [(0.0, 0.0), (math.pi / 2, 0.0), (math.pi / 4, 50.0)]
        point = intersect_projection_lines(lines, rank_tolerance=None)
        assert point is not None
        assert point[0] == pytest.approx(point[1])

    def test_identical_directions_raise(self):
        with pytest.raises(DegenerateGeometryError):
            intersect_projection_lines([(0.3, 1.0), (0.3, 2.0), (0.3, 5.0)])

    def test_single_line_raises(self):
        with pytest.raises(DegenerateGeometryError):
            intersect_projection_lines([(0.3, 1.0)])

    def test_parallel_pair_raises(self):
        with pytest.raises(DegenerateGeometryError):
            intersect_two_lines((1.0, 0.0, -2.0), (1.0, 0.0, -5.0))

    def test_two_line_intersection(self):
        assert intersect_two_lines((1.0, 0.0, -2.0), (0.0, 1.0, -5.0)) == pytest.approx((2.0, 5.0))

    def test_point_line_distance_normalizes(self):
        assert point_line_distance((0.0, 0.0), (0.0, 2.0, -4.0)) == pytest.approx(2.0)


# ---------------------------------------------------------------------------
# Rig
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def rig64():
    return make_rig(make_device(64))


class TestStereoRig:

    def test_device_rejects_empty_raster(self):
        with pytest.raises(ValueError):
            DeviceSpec(0, 256, 64, 64)

    def test_rectified_epipolar_line_is_a_projector_row(self, rig64):
        a, b, c = rig64.epipolar_line((10, 20))
        assert a == pytest.approx(0.0, abs=1e-12)
        assert b == pytest.approx(1.0)
        # camera principal row 31.5 maps to projector row 127.5
        assert -c == pytest.approx(20 - 31.5 + 127.5)

    def test_correspondence_lies_on_epipolar_line(self, rig64):
        origin, direction = rig64.camera_ray((20, 30))
        point = origin + direction * (480.0 / direction[2])
        projected = rig64.project_projector(point)
        assert point_line_distance(projected, rig64.epipolar_line((20, 30))) < 1e-9

    def test_triangulation_round_trip(self, rig64):
        point = np.array([4.0, -3.0, 480.0])
        result = rig64.triangulate(rig64.project_camera(point), rig64.project_projector(point))
        np.testing.assert_allclose(result.point, point, atol=1e-6)
        assert result.residual_px < 1e-6

    def test_triangulation_rejects_non_finite(self, rig64):
        with pytest.raises(ValueError):
            rig64.triangulate((10, 10), (float("nan"), 100.0))

    def test_pixel_outside_raster(self, rig64):
        with pytest.raises(IndexError):
            rig64.epipolar_line((64, 0))

    def test_scene_file_form_round_trip(self, rig64):
        rebuilt = StereoRig.from_dict(rig64.device, rig64.to_dict())
        np.testing.assert_allclose(rebuilt.fundamental, rig64.fundamental, atol=1e-12)

    def test_desk_correspondences_land_mid_projector(self, rig64):
        origin, direction = rig64.camera_ray((32, 32))
        uv = rig64.project_projector(origin + direction * (500.0 / direction[2]))
        assert 96.0 < uv[0] < 160.0
        assert 96.0 < uv[1] < 160.0
