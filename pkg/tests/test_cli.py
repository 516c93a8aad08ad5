"""Tests for the command-line stages."""

import numpy as np
import pytest
import yaml

from ppsi.cli import EXIT_OK, EXIT_STAGE, EXIT_USAGE, build_parser, load_config, main
from ppsi.utils import io

from .conftest import scene_path

PLANE = str(scene_path("plane"))


def run(*argv) -> int:
    return main([str(a) for a in argv])


# ---------------------------------------------------------------------------
# Config and budget
# ---------------------------------------------------------------------------

class TestConfig:

    def test_unidirectional_defaults_to_zero_degrees(self):
        args = build_parser().parse_args(["capture", "--strategy", "unidirectional"])
        assert load_config(args).directions_deg == (0.0,)

    def test_config_file_with_overrides(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(yaml.safe_dump({"run": {"seed": 3}, "patterns": {"eta": 0.5}}))
        args = build_parser().parse_args(["capture", "--config", str(path), "--eta", "0.4"])
        config = load_config(args)
        assert (config.seed, config.eta) == (3, 0.4)

    def test_unknown_key_is_usage_error(self, tmp_path, capsys):
        path = tmp_path / "run.yaml"
        path.write_text(yaml.safe_dump({"run": {"colour": "red"}}))
        assert run("capture", "--config", path) == EXIT_USAGE
        assert "usage error" in capsys.readouterr().err


class TestBudget:

    def test_four_directions(self, capsys):
        code = run("patterns", "--budget-only", "--fine-period", 150, "--eta", 0.25)
        assert code == EXIT_OK
        assert "84 per direction, 336 total" in capsys.readouterr().out

    def test_single_direction_full_ratio(self, capsys):
        code = run("patterns", "--budget-only", "--fine-period", 150, "--strategy", "unidirectional")
        assert code == EXIT_OK
        assert "255 per direction, 255 total" in capsys.readouterr().out

    def test_adaptive_period(self, capsys):
        assert run("patterns", "--budget-only") == EXIT_OK
        assert "derived from the coarse capture" in capsys.readouterr().out

    def test_empty_direction_list(self, capsys):
        assert run("patterns", "--budget-only", "--directions", "") == EXIT_USAGE
        assert "Direction list is empty" in capsys.readouterr().err

    def test_ransac_needs_four_directions(self):
        assert run("patterns", "--budget-only", "--directions", "0,90") == EXIT_USAGE

    def test_eta_out_of_range(self):
        assert run("patterns", "--budget-only", "--eta", 1.5) == EXIT_USAGE


# ---------------------------------------------------------------------------
# Stage failures
# ---------------------------------------------------------------------------

class TestStageErrors:

    def test_missing_stack(self, tmp_path, capsys):
        assert run("reconstruct", "--out", tmp_path) == EXIT_STAGE
        err = capsys.readouterr().err
        assert err.startswith("[reconstruct] FileNotFoundError: missing stack")

    def test_missing_scene(self, tmp_path, capsys):
        assert run("capture", "--out", tmp_path) == EXIT_STAGE
        assert "[capture]" in capsys.readouterr().err

    def test_missing_scene_file(self, tmp_path, capsys):
        assert run("capture", "--out", tmp_path, "--scene", tmp_path / "nope.yaml") == EXIT_STAGE
        assert "Scene file not found" in capsys.readouterr().err

    def test_missing_cloud(self, tmp_path, capsys):
        assert run("eval", "--out", tmp_path) == EXIT_STAGE
        assert "missing filtered cloud" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# File stages
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def plane_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("plane")
    common = ["--scene", PLANE, "--out", out, "--strategy", "unidirectional"]
    codes = {command: run(command, *common) for command in ("patterns", "capture", "reconstruct", "match", "cloud", "eval")}
    return out, codes


class TestFileStages:

    def test_every_stage_succeeds(self, plane_run):
        _, codes = plane_run
        assert codes == dict.fromkeys(codes, EXIT_OK)

    def test_artifacts(self, plane_run):
        out, _ = plane_run
        for name in ("patterns/patterns.yaml", "stack.f32", "stack.yaml", "projections.f32",
                     "projections.yaml", "matches.csv", "cloud.ply", "cloud_filtered.ply", "metrics.csv"):
            assert (out / name).exists(), name

    def test_coarse_patterns_only(self, plane_run):
        out, _ = plane_run
        manifest = yaml.safe_load((out / "patterns" / "patterns.yaml").read_text())
        assert manifest["budget"]["budget"] is None
        assert len(list((out / "patterns").rglob("*.pgm"))) == 30

    def test_metrics(self, plane_run):
        out, _ = plane_run
        metrics = io.read_metrics(out / "metrics.csv")
        assert float(metrics["plane_rms_mm"]) < 0.2
        assert int(metrics["points"]) >= 0.99 * 64 * 64

    def test_matches_file(self, plane_run):
        out, _ = plane_run
        matches = io.read_matches(out / "matches.csv")
        assert len(matches) == 64 * 64
        assert all(m.strategy == "unidirectional" for c in matches.values() for m in c)

    def test_capture_is_bit_identical(self, plane_run, tmp_path):
        out, _ = plane_run
        assert run("capture", "--scene", PLANE, "--out", tmp_path, "--strategy", "unidirectional") == EXIT_OK
        assert (tmp_path / "stack.f32").read_bytes() == (out / "stack.f32").read_bytes()

    def test_eval_against_reference(self, plane_run, capsys):
        out, _ = plane_run
        code = run("eval", "--scene", PLANE, "--out", out, "--strategy", "unidirectional",
                   "--reference", out / "cloud_filtered.ply")
        assert code == EXIT_OK
        assert io.read_metrics(out / "metrics.csv")["cloud_rms_mm"] == "0.0"

    def test_sweep(self, tmp_path):
        scene = str(scene_path("subsurface"))
        code = run("sweep", "--scene", scene, "--out", tmp_path, "--strategy", "unidirectional", "--etas", "0.25,1")
        assert code == EXIT_OK
        rows = io.read_sweep(tmp_path / "sweep.csv")
        assert [r["eta"] for r in rows] == [0.25, 1.0]
        assert rows[-1]["mean_sme_px"] == 0.0
        assert np.isfinite(rows[0]["mean_sme_px"])
