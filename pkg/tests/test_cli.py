"""Tests for the command-line interface."""

import json

import pytest
import yaml

from src.cli import RunConfig, build_app_config, build_parser, main, run
from src.decision import NOT, OPENLY
from src.errors import GalleryFailure
from src.gallery import GALLERY_DIR
from src.sampling import DensityEstimate

ROT2 = {
    "name": "rot2",
    "presentation": {
        "kind": "vector_by_compact",
        "vector_dim": 2,
        "compact": {"rank": 1, "dim": 2, "generators": [[[0, -1], [1, 0]]]},
    },
}

HEISENBERG_SOLVABLE = {
    "algebra": {"dim": 3, "c": [[0, 1, 2, 1]]},
    "realization_dim": 3,
    "realization": [
        [[0, 1, 0], [0, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 0, 1], [0, 0, 0]],
        [[0, 0, 1], [0, 0, 0], [0, 0, 0]],
    ],
}


@pytest.fixture
def cli(temp_dir):
    """Run the CLI against a small configuration and return (exit code, parsed report)."""
    config_path = temp_dir / "config.yaml"
    config_path.write_text(
        yaml.safe_dump(
            {
                "sampling": {"samples": 400},
                "decision": {"condition_samples": 400, "cross_validate": False},
                "log_level": "WARNING",
            }
        )
    )
    output = temp_dir / "report.json"

    def invoke(*args):
        code = main([*args, "--config", str(config_path), "--output", str(output)])
        return code, json.loads(output.read_text())

    return invoke


def write_input(temp_dir, data, name="input.json"):
    path = temp_dir / name
    path.write_text(json.dumps(data, indent=2))
    return str(path)


class TestParser:
    """Tests for argument parsing."""

    def test_decide_arguments(self):
        args = build_parser().parse_args(["decide", "--input", "x.json", "--seed", "7", "--layer", "1"])
        assert args.command == "decide"
        assert args.seed == 7
        assert args.layer == 1
        assert args.samples == 10000

    def test_gallery_name_optional(self):
        assert build_parser().parse_args(["gallery"]).name is None
        assert build_parser().parse_args(["gallery", "rot2"]).name == "rot2"

    def test_no_command(self):
        assert main([]) == 1

    def test_overrides(self):
        run_config = RunConfig("sample", seed=3, samples=500, scale=2.0, tol_spectral=1e-6, kmax=50, workers=2)
        config = build_app_config(run_config)
        assert (config.sampling.seed, config.sampling.samples, config.sampling.scale) == (3, 500, 2.0)
        assert config.sampling.workers == 2
        assert config.tolerances.spectral == 1e-6
        assert config.power_norms.kmax == 50


class TestDecide:
    """Tests for the decide subcommand."""

    def test_rotation_plane(self, cli, temp_dir):
        code, report = cli("decide", "--input", write_input(temp_dir, ROT2))
        assert code == 0
        assert report["status"] == "ok"
        assert report["result"]["decision"]["verdict"] == OPENLY
        assert report["seed"] == 0
        assert "spectral" in report["tolerances"]

    def test_gallery_file_as_input(self, cli):
        code, report = cli("decide", "--input", str(GALLERY_DIR / "triv_line.json"))
        assert code == 0
        assert report["result"]["decision"]["verdict"] == NOT

    def test_permanence_layer(self, cli):
        code, report = cli("decide", "--input", str(GALLERY_DIR / "heis_rot.json"), "--layer", "1")
        assert code == 0
        assert report["result"]["permanence"]["quotient"] == OPENLY
        assert report["result"]["permanence"]["consistent"] is True

    def test_malformed_input_names_field(self, cli, temp_dir):
        data = json.loads(json.dumps(ROT2))
        data["presentation"]["compact"]["generators"] = [[[0, -1, 0], [1, 0, 0], [0, 0, 0]]]
        code, report = cli("decide", "--input", write_input(temp_dir, data))
        assert code == 1
        assert report["status"] == "error"
        assert report["error"]["details"]["field"] == "presentation.compact.generators[0]"
        assert report["error"]["details"]["line"] is not None

    def test_missing_input(self, cli, temp_dir):
        code, report = cli("decide", "--input", str(temp_dir / "absent.json"))
        assert code == 1
        assert report["error"]["type"] == "InputError"

    def test_text_format(self, temp_dir):
        output = temp_dir / "report.txt"
        code = main(["weights", "--input", write_input(temp_dir, ROT2), "--format", "text", "--output", str(output)])
        assert code == 0
        text = output.read_text()
        assert "weights (ok)" in text
        assert "result.negation_closed" in text


class TestOtherCommands:
    """Tests for validate, weights, sample, solve-delta, gallery and power-norms."""

    def test_validate_rejects_non_derivation(self, cli, temp_dir):
        data = {
            "kind": "solvable_by_compact",
            "solvable": HEISENBERG_SOLVABLE,
            "compact": {"rank": 1, "dim": 3, "generators": [[[0, 0, 0], [0, 0, -1], [0, 1, 0]]]},
        }
        code, report = cli("validate", "--input", write_input(temp_dir, data))
        assert code == 2
        assert report["exit_code"] == 2

    @pytest.mark.parametrize(
        "algebra, field",
        [
            ({"dim": 2, "c": [[0, 5, 1, 1.0]]}, "presentation.algebra.c[0]"),
            ({"dim": 3, "c": [[0, 1, 2, 1.0], [1, 0, 2, 1.0]]}, "presentation.algebra.c[1]"),
        ],
    )
    def test_validate_malformed_structure_constants(self, temp_dir, algebra, field):
        path = write_input(temp_dir, {"kind": "general", "algebra": algebra})
        output = temp_dir / "out.json"
        code, report = run(RunConfig("validate", input_path=path, output=str(output)))
        assert code == 1
        assert report["error"]["type"] == "SchemaError"
        assert report["error"]["details"]["field"] == field

    def test_validate_accepts(self, cli):
        code, report = cli("validate", "--input", str(GALLERY_DIR / "heis_rot.json"))
        assert code == 0
        assert report["result"]["accepted"] is True

    def test_weights(self, cli):
        code, report = cli("weights", "--input", str(GALLERY_DIR / "heis_rot.json"))
        assert code == 0
        assert report["result"]["trivial_weight"] is True
        assert report["result"]["fixed_dim"] == 1

    def test_sample_is_reproducible(self, cli, temp_dir):
        path = write_input(temp_dir, ROT2)
        first = cli("sample", "--input", path, "--samples", "200", "--seed", "5")
        second = cli("sample", "--input", path, "--samples", "200", "--seed", "5")
        assert first == second
        assert first[1]["result"]["estimate"]["fraction"] == 1.0
        assert first[1]["samples"] == 200

    def test_sample_undetermined_exit_code(self, cli, temp_dir, mocker):
        estimate = DensityEstimate(fraction=1.0, ci95=(0.98, 1.0), n=200, hits=195, undetermined=5, seed=0)
        mocker.patch("src.cli.elliptic_density", return_value=estimate)
        code, report = cli("sample", "--input", write_input(temp_dir, ROT2))
        assert code == 2
        assert report["result"]["estimate"]["undetermined"] == 5

    def test_solve_delta(self, cli, temp_dir):
        data = {
            "presentation": {"kind": "solvable_by_compact", "solvable": HEISENBERG_SOLVABLE},
            "automorphism": [[0.5, 0.2, 0], [-0.1, 0.3, 0], [0.4, -0.3, 0.17]],
            "target": [0.5, -0.4, 1.1],
        }
        code, report = cli("solve-delta", "--input", write_input(temp_dir, data))
        assert code == 0
        assert report["result"]["delta"] == pytest.approx([0.5, -0.4, 1.1], abs=1e-9)

    def test_unknown_gallery_entry(self, cli):
        code, report = cli("gallery", "nonexistent")
        assert code == 1
        assert report["error"]["type"] == "InputError"

    def test_gallery_entry(self, cli):
        code, report = cli("gallery", "rot2", "--samples", "400")
        assert code == 0
        [result] = report["result"]["results"]
        assert result["passed"] is True

    def test_gallery_failure_exit_code(self, cli, mocker):
        mocker.patch("src.cli.GalleryRunner.run", side_effect=GalleryFailure("gallery entries failed: rot2"))
        code, report = cli("gallery", "rot2")
        assert code == 3
        assert report["error"]["type"] == "GalleryFailure"

    def test_power_norms(self, cli, temp_dir):
        path = write_input(temp_dir, {"family": {"n": 2, "thetas": [1 / 3], "tilts": [1.5707963267948966]}})
        code, report = cli("power-norms", "--input", path, "--kmax", "10")
        assert code == 0
        assert report["result"]["members"][0]["sup"] == pytest.approx(3**0.5)

    def test_run_returns_report(self, temp_dir):
        output = temp_dir / "out.json"
        code, report = run(RunConfig("battery", input_path=None, output=str(output)))
        assert code == 1
        assert json.loads(output.read_text()) == report
