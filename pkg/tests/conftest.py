"""Pytest configuration and fixtures."""

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from src.config import AppConfig, DecisionConfig, SamplingConfig
from src.gallery import GALLERY_DIR
from src.lie_algebra import LieAlgebra
from src.presentation import GroupPresentation
from src.presentation_io import load_presentation
from src.solvable_group import SolvablePresentation
from src.torus_rep import CompactPartPresentation, TorusRep

J = np.array([[0.0, -1.0], [1.0, 0.0]])
ROTATE_XY = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


def block_rotation_generators(plane_weights, fixed_dims=0, rank=None):
    """Generators acting on R^(2p + fixed_dims): plane k rotates with weight plane_weights[k]."""
    plane_weights = [tuple(w) for w in plane_weights]
    r = rank if rank is not None else len(plane_weights[0])
    n = 2 * len(plane_weights) + fixed_dims
    generators = np.zeros((r, n, n))
    for k, weight in enumerate(plane_weights):
        for i, w in enumerate(weight):
            generators[i, 2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = w * J
    return generators


def random_orthogonal(rng, n):
    """Haar-distributed orthogonal matrix from the QR decomposition of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def conjugate(generators, q):
    """q X q^T for each generator; keeps skew matrices skew."""
    return np.einsum("ij,rjk,lk->ril", q, np.asarray(generators, dtype=float), q)


def vector_presentation(generators, components=(), name=""):
    generators = np.asarray(generators, dtype=float)
    part = CompactPartPresentation(TorusRep(generators), tuple(components))
    return GroupPresentation(kind="vector_by_compact", compact=part, vector_dim=generators.shape[1], name=name)


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    temp_path = Path(tempfile.mkdtemp())
    yield temp_path
    # Cleanup after test
    if temp_path.exists():
        shutil.rmtree(temp_path)


@pytest.fixture
def test_config():
    """Configuration with smaller sample counts and no cross-validation."""
    return AppConfig(
        sampling=SamplingConfig(samples=400, seed=0),
        decision=DecisionConfig(condition_samples=400, cross_validate=False, cross_validation_samples=200),
        log_level="DEBUG",
    )


@pytest.fixture
def heisenberg():
    """Heisenberg algebra [x, y] = z."""
    return LieAlgebra.from_triples(3, [(0, 1, 2, 1.0)], labels=("x", "y", "z"))


@pytest.fixture
def su2():
    return LieAlgebra.from_triples(3, [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)])


@pytest.fixture
def sl2r():
    """Basis h, e, f."""
    return LieAlgebra.from_triples(3, [(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)])


@pytest.fixture
def e2():
    """R^2 x| R: [r, e1] = e2, [r, e2] = -e1 with basis e1, e2, r."""
    return LieAlgebra.from_triples(3, [(2, 0, 1, 1.0), (2, 1, 0, -1.0)])


@pytest.fixture
def heisenberg_presentation(heisenberg):
    realization = np.zeros((3, 3, 3))
    realization[0, 0, 1] = 1.0
    realization[1, 1, 2] = 1.0
    realization[2, 0, 2] = 1.0
    return SolvablePresentation(heisenberg, realization, (0, 1, 2))


@pytest.fixture
def rot2():
    return vector_presentation(block_rotation_generators([(1,)]), name="rot2")


@pytest.fixture
def triv_line():
    return vector_presentation(np.zeros((1, 1, 1)), name="triv_line")


@pytest.fixture
def gallery_presentation():
    """Loader for bundled gallery presentations by name."""

    def load(name):
        return load_presentation(GALLERY_DIR / f"{name}.json")

    return load


@pytest.fixture
def heis_rot(heisenberg_presentation):
    """Heisenberg group with the circle rotating (x, y) and fixing the centre."""
    return GroupPresentation(
        kind="solvable_by_compact",
        compact=CompactPartPresentation(TorusRep(ROTATE_XY[None])),
        solvable=heisenberg_presentation,
        adjoint_action=ROTATE_XY[None],
        name="heis_rot",
    )
