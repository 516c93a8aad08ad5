"""Tests for cloud building, PLY files, continuity filtering and shape fits."""

import math

import numpy as np
import pytest

from ppsi.contracts import CandidateMatch
from ppsi.pointcloud import (
    ContinuityParams,
    PointCloud,
    build_cloud,
    cloud_distance_rms,
    connected_components,
    continuity_filter,
    fit_plane_rms,
    fit_sphere,
    union_find_components,
)

from .conftest import make_device, make_rig


def grid_patch(rows: int, cols: int, pitch: float = 0.5, z: float = 500.0, origin=(0.0, 0.0)) -> np.ndarray:
    v, u = np.mgrid[0:rows, 0:cols].astype(np.float64)
    return np.stack([origin[0] + u.ravel() * pitch, origin[1] + v.ravel() * pitch, np.full(u.size, z)], axis=1)


def sphere_points(rng, radius: float, count: int, center=(0.0, 0.0, 500.0)) -> np.ndarray:
    d = rng.normal(size=(count, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return np.asarray(center) + radius * d


# ---------------------------------------------------------------------------
# PointCloud
# ---------------------------------------------------------------------------

class TestPointCloud:

    def test_consensus_defaults_to_one(self):
        cloud = PointCloud(points=np.zeros((2, 3)), camera_pixels=[(0, 0), (1, 0)], candidates=[0, 0])
        assert cloud.consensus.tolist() == [1, 1]

    def test_inconsistent_lengths(self):
        with pytest.raises(ValueError):
            PointCloud(points=np.zeros((2, 3)), camera_pixels=[(0, 0)], candidates=[0, 0])

    def test_non_finite_points(self):
        with pytest.raises(ValueError):
            PointCloud(points=[[0.0, math.nan, 1.0]], camera_pixels=[(0, 0)], candidates=[0])

    def test_ply_round_trip(self, tmp_path):
        cloud = PointCloud(
            points=[[0.1, -2.5, 500.25], [1.0 / 3.0, 4.0, 499.0]],
            camera_pixels=[(3, 4), (3, 4)],
            candidates=[0, 1],
            consensus=[4, 3],
        )
        path = cloud.save_ply(tmp_path / "out" / "cloud.ply", comments=["scene test"])
        assert "comment scene test" in path.read_text().splitlines()
        loaded = PointCloud.load_ply(path)
        np.testing.assert_array_equal(loaded.points, cloud.points)
        assert loaded.provenance() == [(3, 4, 0), (3, 4, 1)]
        assert loaded.consensus.tolist() == [4, 3]

    def test_empty_ply(self, tmp_path):
        path = PointCloud().save_ply(tmp_path / "empty.ply")
        assert len(PointCloud.load_ply(path)) == 0

    def test_missing_ply(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            PointCloud.load_ply(tmp_path / "nope.ply")

    def test_not_a_ply(self, tmp_path):
        path = tmp_path / "bad.ply"
        path.write_text("solid cube\n")
        with pytest.raises(ValueError):
            PointCloud.load_ply(path)


class TestBuildCloud:

    def test_triangulates_every_candidate(self):
        rig = make_rig(make_device(1))
        matches = {(0, 0): [
            CandidateMatch((0, 0), (128.0, 127.5), consensus=4),
            CandidateMatch((0, 0), (148.0, 127.5), consensus=1),
        ]}
        cloud = build_cloud(matches, rig)
        assert len(cloud) == 2
        np.testing.assert_allclose(cloud.points[0], [0.0, 0.0, 500.0], atol=1e-6)
        assert cloud.points[1][2] == pytest.approx(1000.0 * 200.0 / 380.0)
        assert cloud.candidates.tolist() == [0, 1]
        assert cloud.consensus.tolist() == [4, 1]

    def test_non_finite_correspondence_is_skipped(self):
        rig = make_rig(make_device(1))
        cloud = build_cloud([CandidateMatch((0, 0), (math.inf, 127.5))], rig)
        assert len(cloud) == 0


# ---------------------------------------------------------------------------
# Continuity
# ---------------------------------------------------------------------------

def cloud_of(points: np.ndarray) -> PointCloud:
    return PointCloud(points=points, camera_pixels=np.zeros((len(points), 2)), candidates=np.zeros(len(points)))


def patches_and_strays(rng) -> np.ndarray:
    """A 400-point and a 100-point patch 20 mm apart, plus 40 isolated strays."""
    strays = np.column_stack([
        rng.uniform(0.0, 10.0, 40), rng.uniform(0.0, 10.0, 40), rng.uniform(520.0, 560.0, 40),
    ])
    return np.concatenate([grid_patch(20, 20), grid_patch(10, 10, origin=(30.0, 0.0)), strays])


class TestContinuity:

    def test_matches_union_find(self, rng):
        clusters = [grid_patch(10, 10, origin=(x, 0.0)) for x in (0.0, 20.0)]
        scattered = rng.uniform(-50.0, 50.0, size=(300, 3)) + [0.0, 0.0, 500.0]
        points = np.concatenate(clusters + [scattered])[rng.permutation(500)]
        np.testing.assert_array_equal(
            connected_components(points, 1.0), union_find_components(points, 1.0),
        )

    def test_random_cloud_partition(self, rng):
        points = rng.uniform(0.0, 20.0, size=(2000, 3))
        np.testing.assert_array_equal(
            connected_components(points, 1.2), union_find_components(points, 1.2),
        )

    def test_filter_keeps_dense_domains(self, rng):
        surface = grid_patch(20, 20)
        strays = np.column_stack([
            rng.uniform(0.0, 10.0, 40), rng.uniform(0.0, 10.0, 40), rng.uniform(520.0, 560.0, 40),
        ])
        points = np.concatenate([surface, strays])
        cloud = PointCloud(points=points, camera_pixels=np.zeros((440, 2)), candidates=np.zeros(440))
        filtered = continuity_filter(cloud, ContinuityParams(radius=1.0, min_points=200))
        assert len(filtered) == 400
        assert filtered.points[:, 2].max() == 500.0

    def test_domain_must_exceed_minimum(self):
        cloud = PointCloud(points=grid_patch(10, 10), camera_pixels=np.zeros((100, 2)), candidates=np.zeros(100))
        assert len(continuity_filter(cloud, ContinuityParams(1.0, 100))) == 0
        assert len(continuity_filter(cloud, ContinuityParams(1.0, 99))) == 100

    def test_filter_is_idempotent(self, rng):
        cloud = cloud_of(patches_and_strays(rng))
        params = ContinuityParams(radius=1.0, min_points=50)
        once = continuity_filter(cloud, params)
        twice = continuity_filter(once, params)
        assert 0 < len(once) < len(cloud)
        np.testing.assert_array_equal(twice.points, once.points)

    def test_larger_minimum_keeps_fewer_points(self, rng):
        cloud = cloud_of(patches_and_strays(rng))
        kept = [len(continuity_filter(cloud, ContinuityParams(1.0, n))) for n in (1, 10, 50, 99, 150, 400, 1000)]
        assert all(later <= earlier for earlier, later in zip(kept, kept[1:]))
        assert kept[0] > kept[-1] == 0

    def test_unbounded_radius_keeps_all_or_nothing(self, rng):
        cloud = cloud_of(patches_and_strays(rng))
        assert len(continuity_filter(cloud, ContinuityParams(1e9, 200))) == len(cloud)
        assert len(continuity_filter(cloud, ContinuityParams(1e9, len(cloud)))) == 0

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            ContinuityParams(radius=0.0)
        with pytest.raises(ValueError):
            ContinuityParams(min_points=0)


# ---------------------------------------------------------------------------
# Fits
# ---------------------------------------------------------------------------

class TestFits:

    def test_plane_rms_matches_noise(self, rng):
        points = grid_patch(40, 40)
        points[:, 2] += rng.normal(0.0, 0.05, size=len(points))
        fit, rms = fit_plane_rms(points)
        assert rms == pytest.approx(0.05, rel=0.1)
        assert abs(fit.normal[2]) == pytest.approx(1.0, abs=1e-3)

    def test_collinear_plane(self):
        with pytest.raises(ValueError):
            fit_plane_rms([[0, 0, 0], [1, 1, 1], [2, 2, 2]])

    def test_sphere_diameter(self, rng):
        fit = fit_sphere(sphere_points(rng, 12.7245, 500))
        assert fit.diameter == pytest.approx(25.449, abs=1e-6)
        np.testing.assert_allclose(fit.center, [0.0, 0.0, 500.0], atol=1e-6)
        assert fit.rms < 1e-6

    def test_sphere_cap(self, rng):
        points = sphere_points(rng, 10.0, 2000)
        cap = points[points[:, 2] < 495.0]
        assert fit_sphere(cap).diameter == pytest.approx(20.0, abs=1e-6)

    def test_coplanar_sphere(self):
        with pytest.raises(ValueError):
            fit_sphere(grid_patch(3, 3))

    def test_cloud_distance(self):
        reference = grid_patch(40, 40, pitch=0.1)
        test = grid_patch(5, 5, origin=(1.0, 1.0), z=500.2)
        assert cloud_distance_rms(reference, test) == pytest.approx(0.2)
