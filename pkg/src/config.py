"""Configuration management for the almost-ellipticity toolkit."""

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import yaml


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical cutoffs used by every decision in the toolkit."""

    structure: float = 1e-10  # antisymmetry of structure constants
    jacobi: float = 1e-10
    rank_rtol: float = 1e-8  # relative to the largest singular value
    ambiguity_factor: float = 10.0
    ideal: float = 1e-9
    commutation: float = 1e-10
    skew: float = 1e-10
    integrality: float = 1e-6
    weight_rounding: float = 1e-6
    orthogonality: float = 1e-10
    normalizer: float = 1e-8
    free_action: float = 1e-8  # smallest singular value of rho(t) - 1
    spectral: float = 1e-8
    eigen_cluster: float = 1e-6
    eigenvector_independence: float = 1e-4  # smallest singular value of unit eigenvectors in a cluster
    elliptic_residual: float = 1e-8
    group_residual: float = 1e-9
    automorphism: float = 1e-8
    derivation: float = 1e-8
    invariant_subspace: float = 1e-8
    compact_type: float = 1e-8

    def as_dict(self) -> Dict[str, float]:
        """Tolerances as a plain mapping, embedded in every report."""
        return asdict(self)


DEFAULT_TOLERANCES = ToleranceConfig()


@dataclass
class SamplingConfig:
    """Monte Carlo sampling configuration."""

    samples: int = 10000
    seed: int = 0
    scale: float = 1.0  # Gaussian scale on translation coordinates
    workers: int = 1
    min_samples: int = 100
    density_threshold: float = 0.999
    probe_levels: int = 20  # cluster-point balls of radius 2^-k, k = 1..probe_levels
    probe_samples: int = 16
    quadrature_points: int = 64  # per circle, for generator orthogonalization


@dataclass
class SolverConfig:
    """Newton refinement settings for the twisted-coboundary solver."""

    newton_tol: float = 1e-12
    max_iterations: int = 100
    damping: float = 0.5


@dataclass
class DecisionConfig:
    """Decision procedure settings."""

    condition_samples: int = 2000
    cross_validate: bool = True
    cross_validation_samples: int = 1000


@dataclass
class PowerNormConfig:
    """Power-norm divergence settings."""

    kmax: int = 10000


@dataclass
class AppConfig:
    """Main application configuration."""

    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    decision: DecisionConfig = field(default_factory=DecisionConfig)
    power_norms: PowerNormConfig = field(default_factory=PowerNormConfig)
    log_level: str = "INFO"
    log_file: Optional[str] = None

    @classmethod
    def load(cls, config_path: Optional[str] = None) -> "AppConfig":
        """Load configuration from file, falling back to defaults when absent."""
        if config_path is None:
            config_path = get_config_path()

        config_file = Path(config_path)
        if not config_file.exists():
            return cls()

        with open(config_file, "r") as f:
            config_data: Dict[str, Any] = yaml.safe_load(f) or {}

        return cls(
            tolerances=ToleranceConfig(**config_data.get("tolerances", {})),
            sampling=SamplingConfig(**config_data.get("sampling", {})),
            solver=SolverConfig(**config_data.get("solver", {})),
            decision=DecisionConfig(**config_data.get("decision", {})),
            power_norms=PowerNormConfig(**config_data.get("power_norms", {})),
            log_level=config_data.get("log_level", "INFO"),
            log_file=config_data.get("log_file"),
        )

    def save(self, config_path: str = "config.yaml") -> None:
        """Save configuration to file."""
        config_dict = asdict(self)

        with open(config_path, "w") as f:
            yaml.dump(config_dict, f, default_flow_style=False, indent=2)


def load_environment_variables() -> None:
    """Load environment variables from .env file."""
    from dotenv import load_dotenv

    load_dotenv()


def get_config_path() -> str:
    """Get configuration path from environment or default."""
    return os.getenv("ALMELL_CONFIG", "config.yaml")
