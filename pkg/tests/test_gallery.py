"""Tests for the bundled gallery."""

import json
from dataclasses import replace

import pytest

from src.config import PowerNormConfig
from src.decision import NOT, OPENLY
from src.errors import GalleryFailure, InputError
from src.gallery import GALLERY_DIR, GALLERY_NAMES, GalleryRunner, run_gallery


@pytest.fixture
def runner(test_config):
    config = replace(test_config, power_norms=PowerNormConfig(kmax=2000))
    return GalleryRunner(config, seed=0, samples=2000)


class TestGalleryEntries:
    """Every bundled entry meets its expectations."""

    @pytest.mark.parametrize("name", GALLERY_NAMES)
    def test_entry_passes(self, runner, name):
        result = runner.run_entry(name)
        assert result.passed, result.failures

    def test_every_entry_has_a_file(self):
        assert sorted(path.stem for path in GALLERY_DIR.glob("*.json")) == sorted(GALLERY_NAMES)

    def test_run_all(self, runner):
        results = runner.run()
        assert [result.name for result in results] == list(GALLERY_NAMES)


class TestGalleryRunner:
    """Tests for runner behaviour."""

    def test_unknown_entry(self, runner):
        with pytest.raises(InputError):
            runner.run(["rot2", "nonexistent"])

    def test_deterministic(self, runner):
        first = runner.run_entry("z2inv").checks["global_density"]
        second = runner.run_entry("z2inv").checks["global_density"]
        assert first.hits == second.hits

    def test_checks_recorded(self, runner):
        result = runner.run_entry("z2inv")
        assert result.checks["decide_error"] == "DisconnectedCompactPart"
        assert result.checks["local_density"].fraction == 0.0

    def test_failing_expectation(self, test_config, temp_dir):
        entry = json.loads((GALLERY_DIR / "rot2.json").read_text())
        entry["expect"] = {"verdict": "not_almost_elliptic"}
        (temp_dir / "rot2.json").write_text(json.dumps(entry))
        failing = GalleryRunner(test_config, seed=0, gallery_dir=temp_dir)

        with pytest.raises(GalleryFailure) as exc_info:
            failing.run(["rot2"])
        assert exc_info.value.exit_code == 3
        [result] = exc_info.value.details["results"]
        assert not result.passed
        assert "verdict" in result.failures[0]

    def test_permanence_verdicts_compared(self, test_config, temp_dir):
        entry = json.loads((GALLERY_DIR / "heis_rot.json").read_text())
        entry["expect"] = {"permanence": {"layer": 1, "verdicts": {"group": NOT, "quotient": NOT, "layer": NOT}}}
        (temp_dir / "heis_rot.json").write_text(json.dumps(entry))
        result = GalleryRunner(test_config, seed=0, gallery_dir=temp_dir).run_entry("heis_rot")
        assert result.checks["permanence"].quotient == OPENLY
        assert result.failures == [f"permanence quotient verdict {OPENLY}, expected {NOT}"]

    def test_permanence_verdicts_recorded(self, runner):
        report = runner.run_entry("heis_rot").checks["permanence"]
        assert (report.group, report.quotient, report.layer) == (NOT, OPENLY, NOT)

    def test_error_becomes_failure(self, test_config, temp_dir):
        (temp_dir / "su2.json").write_text(json.dumps({"presentation": {"kind": "general"}, "expect": {}}))
        result = GalleryRunner(test_config, gallery_dir=temp_dir).run_entry("su2")
        assert not result.passed
        assert result.checks["error"]["type"] == "SchemaError"

    def test_run_gallery_single_entry(self, test_config):
        [result] = run_gallery("rot2", test_config, seed=0)
        assert result.name == "rot2"
        assert result.checks["elliptic_density"].fraction == 1.0
