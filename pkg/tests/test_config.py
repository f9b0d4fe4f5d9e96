"""Tests for configuration module."""

import dataclasses

import pytest
import yaml

from src.config import (
    DEFAULT_TOLERANCES,
    AppConfig,
    DecisionConfig,
    PowerNormConfig,
    SamplingConfig,
    SolverConfig,
    ToleranceConfig,
    get_config_path,
)


class TestToleranceConfig:
    """Tests for ToleranceConfig."""

    def test_default_values(self):
        """Test default tolerance values."""
        tolerances = ToleranceConfig()
        assert tolerances.structure == 1e-10
        assert tolerances.jacobi == 1e-10
        assert tolerances.rank_rtol == 1e-8
        assert tolerances.integrality == 1e-6
        assert tolerances.free_action == 1e-8
        assert tolerances.group_residual == 1e-9

    def test_frozen(self):
        """Tolerances cannot be mutated in place."""
        with pytest.raises(dataclasses.FrozenInstanceError):
            DEFAULT_TOLERANCES.spectral = 1.0

    def test_as_dict(self):
        """Test tolerance mapping used in reports."""
        mapping = ToleranceConfig(spectral=1e-6).as_dict()
        assert mapping["spectral"] == 1e-6
        assert set(mapping) == {f.name for f in dataclasses.fields(ToleranceConfig)}


class TestSectionDefaults:
    """Tests for the sampling, solver, decision and power-norm sections."""

    def test_sampling_defaults(self):
        config = SamplingConfig()
        assert config.samples == 10000
        assert config.seed == 0
        assert config.scale == 1.0
        assert config.workers == 1
        assert config.density_threshold == 0.999
        assert config.probe_levels == 20
        assert config.probe_samples == 16
        assert config.quadrature_points == 64

    def test_solver_defaults(self):
        config = SolverConfig()
        assert config.newton_tol == 1e-12
        assert config.max_iterations == 100
        assert config.damping == 0.5

    def test_decision_and_power_norm_defaults(self):
        assert DecisionConfig().condition_samples == 2000
        assert DecisionConfig().cross_validate is True
        assert PowerNormConfig().kmax == 10000


class TestAppConfig:
    """Tests for AppConfig."""

    def test_missing_file_gives_defaults(self, temp_dir):
        """Test loading from a path that does not exist."""
        config = AppConfig.load(str(temp_dir / "absent.yaml"))
        assert config.tolerances == ToleranceConfig()
        assert config.sampling.samples == 10000
        assert config.log_level == "INFO"

    def test_save_and_load_config(self, temp_dir):
        """Test saving and loading configuration."""
        config_path = temp_dir / "config.yaml"
        original = AppConfig(
            tolerances=ToleranceConfig(spectral=1e-7),
            sampling=SamplingConfig(samples=500, workers=4),
            power_norms=PowerNormConfig(kmax=100),
            log_level="DEBUG",
        )
        original.save(str(config_path))

        assert config_path.exists()
        loaded = AppConfig.load(str(config_path))
        assert loaded.tolerances.spectral == 1e-7
        assert loaded.sampling.samples == 500
        assert loaded.sampling.workers == 4
        assert loaded.power_norms.kmax == 100
        assert loaded.log_level == "DEBUG"

    def test_partial_file(self, temp_dir):
        """Sections absent from the file keep their defaults."""
        config_path = temp_dir / "partial.yaml"
        config_path.write_text(yaml.dump({"solver": {"max_iterations": 7}}))
        loaded = AppConfig.load(str(config_path))
        assert loaded.solver.max_iterations == 7
        assert loaded.solver.damping == 0.5
        assert loaded.decision == DecisionConfig()

    def test_config_path_from_environment(self, monkeypatch, temp_dir):
        """Test ALMELL_CONFIG selects the configuration file."""
        config_path = temp_dir / "env.yaml"
        AppConfig(sampling=SamplingConfig(seed=42)).save(str(config_path))
        monkeypatch.setenv("ALMELL_CONFIG", str(config_path))

        assert get_config_path() == str(config_path)
        assert AppConfig.load().sampling.seed == 42

    def test_default_config_path(self, monkeypatch):
        monkeypatch.delenv("ALMELL_CONFIG", raising=False)
        assert get_config_path() == "config.yaml"
