"""Tests for group presentations and the presentations derived from them."""

import numpy as np
import pytest

from src.errors import DimensionMismatch, InvalidPresentation, NotAnIdeal, PreconditionError
from src.lie_algebra import Subspace
from src.presentation import (
    GroupPresentation,
    as_general,
    derivation_residual,
    quotient_by_layer,
    radical_terms,
    restrict_to_layer,
    validate_group_presentation,
)
from src.torus_rep import CompactPartPresentation, TorusRep, weights

from .conftest import ROTATE_XY, J

ROTATE_YZ = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])


def compact(generator):
    return CompactPartPresentation(TorusRep(generator[None]))


class TestGroupPresentation:
    """Tests for construction checks."""

    def test_unknown_kind(self):
        with pytest.raises(InvalidPresentation):
            GroupPresentation(kind="nilpotent")

    def test_vector_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            GroupPresentation(kind="vector_by_compact", compact=compact(J), vector_dim=3)

    def test_missing_parts(self):
        with pytest.raises(InvalidPresentation):
            GroupPresentation(kind="solvable_by_compact")
        with pytest.raises(InvalidPresentation):
            GroupPresentation(kind="general")

    def test_adjoint_action_shape(self, heisenberg_presentation):
        with pytest.raises(DimensionMismatch):
            GroupPresentation(
                kind="solvable_by_compact",
                compact=compact(ROTATE_XY),
                solvable=heisenberg_presentation,
                adjoint_action=np.zeros((1, 2, 2)),
            )

    def test_action_needs_derivations(self, heisenberg_presentation):
        presentation = GroupPresentation(
            kind="solvable_by_compact", compact=compact(ROTATE_XY), solvable=heisenberg_presentation
        )
        with pytest.raises(InvalidPresentation):
            presentation.action_generators()

    def test_trivial_compact_part(self, heisenberg_presentation):
        presentation = GroupPresentation(kind="solvable_by_compact", solvable=heisenberg_presentation)
        assert presentation.torus_rank == 0
        assert presentation.action_rep() is None
        assert presentation.action_generators().shape == (0, 3, 3)


class TestValidation:
    """Tests for validate_group_presentation."""

    def test_heis_rot_valid(self, heis_rot):
        reports = validate_group_presentation(heis_rot)
        assert [report.subject for report in reports] == ["compact_part", "solvable_presentation", "adjoint_action"]
        assert all(report.accepted for report in reports)

    def test_rotation_is_derivation(self, heisenberg):
        assert derivation_residual(heisenberg, ROTATE_XY) < 1e-12
        assert derivation_residual(heisenberg, ROTATE_YZ) > 0.5

    def test_non_derivation_rejected(self, heisenberg_presentation):
        presentation = GroupPresentation(
            kind="solvable_by_compact",
            compact=compact(ROTATE_YZ),
            solvable=heisenberg_presentation,
            adjoint_action=ROTATE_YZ[None],
        )
        reports = validate_group_presentation(presentation)
        assert not reports[-1].accepted

    def test_layer_directions(self, heisenberg):
        xy = Subspace(3, np.eye(3)[:2])
        good = GroupPresentation(
            kind="general",
            compact=compact(ROTATE_XY),
            adjoint_action=ROTATE_XY[None],
            algebra=heisenberg,
            layer_compact_directions={0: xy},
        )
        assert validate_group_presentation(good)[-1].accepted

        bad = GroupPresentation(
            kind="general",
            compact=compact(ROTATE_XY),
            adjoint_action=ROTATE_XY[None],
            algebra=heisenberg,
            layer_compact_directions={1: Subspace(3, np.eye(3)[:1])},
        )
        assert not validate_group_presentation(bad)[-1].accepted

    def test_declared_radical_must_be_ideal(self, heisenberg):
        presentation = GroupPresentation(kind="general", algebra=heisenberg, radical=Subspace(3, np.eye(3)[:1]))
        with pytest.raises(NotAnIdeal):
            radical_terms(presentation)


class TestDerivedPresentations:
    """Tests for as_general, quotients and layer restriction."""

    def test_as_general(self, rot2):
        general = as_general(rot2)
        assert general.kind == "general"
        assert general.algebra.dim == 2
        assert np.allclose(general.adjoint_action[0], J)
        assert as_general(general) is general

    def test_as_general_needs_connected(self):
        part = CompactPartPresentation(TorusRep(J[None]), (np.diag([1.0, -1.0]),))
        presentation = GroupPresentation(kind="vector_by_compact", compact=part, vector_dim=2)
        with pytest.raises(PreconditionError):
            as_general(presentation)

    def test_radical_terms(self, heis_rot):
        assert [term.dim for term in radical_terms(heis_rot)] == [3, 1, 0]

    def test_quotient_by_centre(self, heis_rot):
        quotient = quotient_by_layer(heis_rot, 1)
        assert quotient.algebra.dim == 2
        assert np.allclose(quotient.algebra.c, 0.0)
        assert quotient.radical.dim == 2
        assert weights(quotient.action_rep()).entries == (((-1,), 1), ((1,), 1))

    def test_quotient_layer_out_of_range(self, heis_rot):
        with pytest.raises(PreconditionError):
            quotient_by_layer(heis_rot, 5)

    def test_restrict_to_centre(self, heis_rot):
        layer = restrict_to_layer(heis_rot, 1)
        assert layer.kind == "vector_by_compact"
        assert layer.vector_dim == 1
        assert weights(layer.compact.torus).entries == (((0,), 1),)

    def test_restrict_to_non_abelian_term(self, heis_rot):
        with pytest.raises(PreconditionError):
            restrict_to_layer(heis_rot, 0)
