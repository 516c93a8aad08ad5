"""End-to-end in-memory runs on the bundled scenes."""

from dataclasses import replace

import numpy as np
import pytest

from ppsi.config import Config
from ppsi.ltc_sim import SceneModel, load_scene
from ppsi.pipeline import StageError, capture_scene, reconstruct_stack, run_pipeline, stage
from ppsi.pointcloud import connected_components, union_find_components

from .conftest import make_device, scene_path

SINGLE = Config(strategy="unidirectional", directions_deg=(0.0,))


def truth_distances(scene, cloud) -> np.ndarray:
    truth = np.array([scene.transports[(int(u), int(v))].truth for u, v in cloud.camera_pixels])
    return np.linalg.norm(cloud.points - truth, axis=1)


@pytest.fixture(scope="module")
def plane_scene():
    return load_scene(scene_path("plane"))


@pytest.fixture(scope="module")
def plane_run(plane_scene):
    return run_pipeline(plane_scene, SINGLE)


@pytest.fixture(scope="module")
def sphere_scene():
    return load_scene(scene_path("sphere"))


# ---------------------------------------------------------------------------
# Single direction with the continuity filter
# ---------------------------------------------------------------------------

class TestUnidirectionalPlane:

    def test_every_pixel_matched(self, plane_scene, plane_run):
        assert len(plane_run.matches) == len(plane_scene.transports)
        assert all(len(c) == 2 for c in plane_run.matches.values())

    def test_raw_cloud_holds_virtual_points(self, plane_scene, plane_run):
        assert np.sum(truth_distances(plane_scene, plane_run.cloud) > 5.0) > 0.9 * len(plane_scene.transports)

    def test_filter_keeps_surface_and_drops_strays(self, plane_scene, plane_run):
        distances = truth_distances(plane_scene, plane_run.filtered)
        assert np.all(distances < 0.5)
        pixels = {tuple(p) for p in plane_run.filtered.camera_pixels.tolist()}
        assert len(pixels) >= 0.99 * len(plane_scene.transports)

    def test_plane_metrics(self, plane_run):
        assert plane_run.metrics["points"] == len(plane_run.filtered)
        assert plane_run.metrics["plane_rms_mm"] < 0.2
        assert set(plane_run.timing) == {"capture", "reconstruct", "match", "cloud"}

    def test_flood_fill_matches_union_find(self, plane_run):
        points = plane_run.cloud.points[:2000]
        np.testing.assert_array_equal(
            connected_components(points, 1.0), union_find_components(points, 1.0),
        )


# ---------------------------------------------------------------------------
# Four directions
# ---------------------------------------------------------------------------

class TestSphere:

    def test_diameter(self, sphere_scene):
        result = run_pipeline(sphere_scene)
        assert result.metrics["diameter_error_mm"] < 0.05
        assert result.metrics["points"] > 1500
        assert all(m.consensus == 4 for c in result.matches.values() for m in c)


class TestCompound:

    def test_ransac_run_is_bit_identical(self):
        scene = load_scene(scene_path("compound"))
        first, second = run_pipeline(scene, Config()), run_pipeline(scene, Config())
        assert len(first.matches) > 0
        assert first.matches == second.matches
        assert np.array_equal(first.cloud.points, second.cloud.points)
        assert np.array_equal(first.filtered.points, second.filtered.points)


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

class TestStages:

    def test_capture_layout(self, plane_scene):
        stack = capture_scene(plane_scene, SINGLE)
        assert [b.spec.stage for b in stack.blocks] == ["coarse", "fine"]
        assert stack.blocks[0].spec.frequencies == list(range(10))
        assert stack.blocks[1].spec.frequencies[0] == 1

    def test_fixed_fine_period(self, plane_scene):
        stack = capture_scene(plane_scene, replace(SINGLE, fine_period=120, eta=0.5))
        fine = stack.block(0.0, "fine").spec
        assert fine.period == 120
        assert fine.frequencies == list(range(1, 31))

    def test_noise_is_seeded(self, plane_scene):
        noisy = replace(plane_scene, noise_sigma=0.01)
        a = capture_scene(noisy, replace(SINGLE, seed=4))
        b = capture_scene(noisy, replace(SINGLE, seed=4))
        c = capture_scene(noisy, replace(SINGLE, seed=5))
        assert all(np.array_equal(x.data, y.data) for x, y in zip(a.blocks, b.blocks))
        assert not np.array_equal(a.blocks[0].data, c.blocks[0].data)

    def test_reconstruction_is_deterministic(self, plane_scene):
        stack = capture_scene(plane_scene, SINGLE)
        first = reconstruct_stack(stack, SINGLE)[0]
        second = reconstruct_stack(stack, SINGLE)[0]
        assert np.array_equal(first.values, second.values)

    def test_missing_direction(self, plane_scene):
        stack = capture_scene(plane_scene, SINGLE)
        with pytest.raises(StageError) as info:
            with stage("reconstruct"):
                reconstruct_stack(stack, Config())
        assert info.value.stage == "reconstruct"
        assert str(info.value).startswith("[reconstruct] IncompleteStackError")

    def test_capture_ratio_too_low(self, plane_scene):
        with pytest.raises(StageError) as info:
            run_pipeline(plane_scene, replace(SINGLE, eta=0.01, fine_period=20))
        assert info.value.stage == "capture"

    def test_scene_without_rig(self):
        with pytest.raises(StageError) as info:
            run_pipeline(SceneModel(device=make_device(2)))
        assert info.value.stage == "match"
