"""Tests for torus representations, weights and the free-action set."""

import numpy as np
import pytest

from src.config import SamplingConfig
from src.errors import DimensionMismatch, InvalidPresentation, NonIntegralGenerator
from src.torus_rep import (
    CompactPartPresentation,
    TorusRep,
    WeightMultiset,
    compact_matrix,
    fixed_subspace,
    fr_density_estimate,
    fr_membership,
    has_trivial_weight,
    orthogonalize_generators,
    rho_of,
    validate_compact_part,
    validate_torus_rep,
    weight_margin,
    weights,
)

from .conftest import J, block_rotation_generators, random_orthogonal

SMALL = SamplingConfig(samples=200)


def so3_generator(axis):
    generator = np.zeros((3, 3))
    i, j = [k for k in range(3) if k != axis]
    generator[i, j], generator[j, i] = -1.0, 1.0
    return generator


class TestTorusRep:
    """Tests for construction and validation."""

    def test_shape_checks(self):
        with pytest.raises(DimensionMismatch):
            TorusRep(np.zeros((1, 2, 3)))
        with pytest.raises(InvalidPresentation):
            TorusRep(np.zeros((0, 2, 2)))

    def test_valid_rotation(self):
        report = validate_torus_rep(TorusRep(J[None]))
        assert report.accepted
        assert report.residuals["integrality"] < 1e-12

    def test_non_integral_generator(self):
        """Half-speed rotation does not close up on the circle."""
        with pytest.raises(NonIntegralGenerator):
            validate_torus_rep(TorusRep(0.5 * J[None]))

    def test_non_commuting_generators(self):
        rep = TorusRep(np.stack([so3_generator(0), so3_generator(2)]))
        report = validate_torus_rep(rep)
        assert not report.accepted
        assert report.residuals["commutation"] > 0.1

    def test_non_skew_generator_orthogonalized(self):
        q = np.diag([2.0, 1.0])
        skewed = (q @ J @ np.linalg.inv(q))[None]
        assert not validate_torus_rep(TorusRep(skewed)).accepted

        skew, s = orthogonalize_generators(skewed)
        assert np.allclose(skew[0], -skew[0].T, atol=1e-10)
        assert np.allclose(skew[0], s @ skewed[0] @ np.linalg.inv(s))
        assert weights(TorusRep(skew)) == weights(TorusRep(J[None]))

    def test_rho_is_periodic(self):
        rep = TorusRep(J[None])
        assert np.allclose(rho_of(rep, [1.0]), np.eye(2))
        assert np.allclose(rho_of(rep, [0.25]), J)
        with pytest.raises(DimensionMismatch):
            rho_of(rep, [0.1, 0.2])


class TestWeights:
    """Tests for the weight multiset."""

    def test_rotation_weights(self):
        multiset = weights(TorusRep(J[None]))
        assert multiset.entries == (((-1,), 1), ((1,), 1))
        assert multiset.is_negation_closed()
        assert not multiset.has_zero()

    def test_rank_two_with_fixed_line(self):
        rep = TorusRep(block_rotation_generators([(1, 0), (0, 1)], fixed_dims=1))
        multiset = weights(rep)
        assert multiset.weights() == [(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)]
        assert multiset.total == 5
        assert multiset.multiplicity((0, 0)) == 1
        assert has_trivial_weight(rep)
        assert fixed_subspace(rep).shape == (1, 5)

    def test_repeated_weight(self):
        rep = TorusRep(block_rotation_generators([(2,), (2,)]))
        multiset = weights(rep)
        assert multiset.entries == (((-2,), 2), ((2,), 2))
        assert not has_trivial_weight(rep)

    @pytest.mark.parametrize(
        "plane_weights, fixed",
        [([(1, 0), (0, 1)], 1), ([(2, -1), (2, -1), (0, 3)], 0), ([(1, 1, 1)], 2)],
    )
    def test_invariant_under_orthogonal_conjugation(self, plane_weights, fixed):
        rep = TorusRep(block_rotation_generators(plane_weights, fixed_dims=fixed))
        rng = np.random.default_rng(len(plane_weights))
        for _ in range(10):
            q = random_orthogonal(rng, rep.dim)
            conjugated = rep.conjugate(q)
            assert weights(conjugated) == weights(rep)
            assert has_trivial_weight(conjugated) == has_trivial_weight(rep)

    def test_to_dict(self):
        multiset = WeightMultiset((((-1,), 1), ((1,), 1)))
        assert multiset.to_dict() == {
            "entries": [{"weight": [-1], "multiplicity": 1}, {"weight": [1], "multiplicity": 1}]
        }


class TestFreeAction:
    """Tests for fr membership and density."""

    def test_membership(self):
        rep = TorusRep(J[None])
        assert fr_membership(rep, [0.25])
        assert not fr_membership(rep, [0.0])
        assert not fr_membership(TorusRep(np.zeros((1, 1, 1))), [0.3])

    def test_weight_margin(self):
        multiset = weights(TorusRep(J[None]))
        assert weight_margin(multiset, [0.25]) == pytest.approx(np.sqrt(2))
        assert weight_margin(WeightMultiset(()), [0.3]) == float("inf")

    def test_density_of_rotation(self):
        estimate = fr_density_estimate(TorusRep(J[None]), 200, seed=0, config=SMALL)
        assert estimate.fraction == 1.0
        assert estimate.hits == 200
        assert estimate.ci95[1] == pytest.approx(1.0)

    def test_density_of_trivial_line(self):
        estimate = fr_density_estimate(TorusRep(np.zeros((1, 1, 1))), 200, seed=0, config=SMALL)
        assert estimate.fraction == 0.0

    def test_density_is_deterministic(self):
        rep = TorusRep(block_rotation_generators([(1, 1), (1, -1)]))
        first = fr_density_estimate(rep, 300, seed=5, config=SMALL)
        second = fr_density_estimate(rep, 300, seed=5, config=SamplingConfig(workers=3))
        assert first.hits == second.hits


class TestCompactPart:
    """Tests for component generators."""

    def test_reflection_normalizes_rotation(self):
        part = CompactPartPresentation(TorusRep(J[None]), (np.diag([1.0, -1.0]),))
        report = validate_compact_part(part)
        assert report.accepted
        assert part.component_count == 2
        assert not part.connected
        assert np.allclose(compact_matrix(part, [0.0], 0), np.diag([1.0, -1.0]))

    def test_component_out_of_range(self):
        part = CompactPartPresentation(TorusRep(J[None]))
        with pytest.raises(DimensionMismatch):
            compact_matrix(part, [0.0], 0)

    def test_non_orthogonal_component(self):
        part = CompactPartPresentation(TorusRep(J[None]), (np.diag([2.0, 1.0]),))
        assert not validate_compact_part(part).accepted

    def test_component_shape(self):
        with pytest.raises(DimensionMismatch):
            CompactPartPresentation(TorusRep(J[None]), (np.eye(3),))
