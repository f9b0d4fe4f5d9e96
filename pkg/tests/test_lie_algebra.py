"""Tests for structure constants, derived series, Killing form and radical.

The structure results are checked against a brute-force rational implementation kept here.
"""

from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from src.errors import MalformedTensor, NotAnIdeal, NotSemisimple
from src.lie_algebra import (
    LieAlgebra,
    Subspace,
    ad_matrix,
    bracket,
    change_basis,
    derived_series,
    direct_sum,
    is_compact_type,
    is_ideal,
    killing_form,
    quotient_algebra,
    radical,
    subalgebra_constants,
    validate,
)

HEISENBERG = [(0, 1, 2, 1)]
SU2 = [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1)]
SL2R = [(0, 1, 1, 2), (0, 2, 2, -2), (1, 2, 0, 1)]


# Brute-force rational oracle


def oracle_tensor(triples, n):
    c = {}
    for i, j, k, v in triples:
        c[(i, j, k)] = Fraction(v)
        c[(j, i, k)] = -Fraction(v)
    return [[[c.get((i, j, k), Fraction(0)) for k in range(n)] for j in range(n)] for i in range(n)]


def oracle_bracket(c, x, y):
    n = len(c)
    return [sum((x[i] * y[j] * c[i][j][k] for i in range(n) for j in range(n)), Fraction(0)) for k in range(n)]


def oracle_basis(vectors, n):
    """Row-reduced basis of the span, by plain Gaussian elimination."""
    rows = [list(v) for v in vectors]
    basis = []
    for col in range(n):
        pivot = next((r for r in rows if r[col] != 0), None)
        if pivot is None:
            continue
        rows.remove(pivot)
        pivot = [x / pivot[col] for x in pivot]
        rows = [[a - r[col] * b for a, b in zip(r, pivot)] for r in rows]
        basis = [[a - r[col] * b for a, b in zip(r, pivot)] for r in basis]
        basis.append(pivot)
    return basis


def oracle_derived_dims(triples, n):
    c = oracle_tensor(triples, n)
    current = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    dims = [n]
    while current:
        following = oracle_basis([oracle_bracket(c, a, b) for a in current for b in current], n)
        dims.append(len(following))
        if len(following) == len(current):
            return dims, True
        current = following
    return dims, False


def oracle_killing(triples, n):
    c = oracle_tensor(triples, n)
    return [
        [sum((c[i][m][k] * c[j][k][m] for m in range(n) for k in range(n)), Fraction(0)) for j in range(n)]
        for i in range(n)
    ]


def oracle_radical_dim(triples, n):
    """dim of the Killing-orthogonal complement of [L, L]."""
    c = oracle_tensor(triples, n)
    eye = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    derived = oracle_basis([oracle_bracket(c, a, b) for a in eye for b in eye], n)
    killing = oracle_killing(triples, n)
    rows = [[sum((d[i] * killing[i][j] for i in range(n)), Fraction(0)) for j in range(n)] for d in derived]
    return n - len(oracle_basis(rows, n))


class TestLieAlgebra:
    """Tests for building and validating structure constants."""

    def test_antisymmetric_completion(self):
        """Test that (i, j, k) implies (j, i, k) with opposite sign."""
        algebra = LieAlgebra.from_triples(3, HEISENBERG)
        assert algebra.c[0, 1, 2] == 1.0
        assert algebra.c[1, 0, 2] == -1.0
        assert validate(algebra).accepted

    def test_conflicting_pair_rejected(self):
        with pytest.raises(MalformedTensor):
            LieAlgebra.from_triples(3, [(0, 1, 2, 1.0), (1, 0, 2, 1.0)])

    def test_consistent_pair_accepted(self):
        algebra = LieAlgebra.from_triples(3, [(0, 1, 2, 1.0), (1, 0, 2, -1.0)])
        assert algebra.c[0, 1, 2] == 1.0

    def test_diagonal_and_range_rejected(self):
        with pytest.raises(MalformedTensor):
            LieAlgebra.from_triples(2, [(0, 0, 1, 1.0)])
        with pytest.raises(MalformedTensor):
            LieAlgebra.from_triples(2, [(0, 1, 2, 1.0)])

    def test_jacobi_violation_reported(self):
        """[e0, e1] = e1, [e0, e2] = e0, [e1, e2] = e0 violates Jacobi."""
        algebra = LieAlgebra.from_triples(3, [(0, 1, 1, 1.0), (0, 2, 0, 1.0), (1, 2, 0, 1.0)])
        report = validate(algebra)
        assert not report.accepted
        assert report.residuals["jacobi"] > 1e-10

    def test_zero_dimensional(self):
        algebra = LieAlgebra.from_triples(0, [])
        assert validate(algebra).accepted
        assert derived_series(algebra).dims == [0]
        assert radical(algebra).dim == 0

    def test_exact_mode(self):
        algebra = LieAlgebra.from_triples(3, [(0, 1, 2, "1/2")], exact_mode=True)
        assert algebra.is_exact
        assert algebra.exact_constants[(0, 1, 2)] == Fraction(1, 2)
        assert algebra.exact_constants[(1, 0, 2)] == Fraction(-1, 2)
        assert algebra.c[0, 1, 2] == 0.5


class TestBracketAndAd:
    """Tests for bracket and ad."""

    def test_su2_bracket(self, su2):
        eye = np.eye(3)
        assert np.allclose(bracket(su2, eye[0], eye[1]), eye[2])
        assert np.allclose(bracket(su2, eye[1], eye[0]), -eye[2])

    def test_ad_matches_bracket(self, sl2r):
        rng = np.random.default_rng(3)
        x, y = rng.standard_normal(3), rng.standard_normal(3)
        assert np.allclose(ad_matrix(sl2r, x) @ y, bracket(sl2r, x, y))


class TestDerivedSeries:
    """Tests for derived series against the rational oracle."""

    @pytest.mark.parametrize(
        "triples, n, dims, non_solvable",
        [
            (HEISENBERG, 3, [3, 1, 0], False),
            (SL2R, 3, [3, 3], True),
            (SU2, 3, [3, 3], True),
        ],
    )
    def test_dims(self, triples, n, dims, non_solvable):
        for exact_mode in (False, True):
            series = derived_series(LieAlgebra.from_triples(n, triples, exact_mode=exact_mode))
            assert series.dims == dims
            assert series.non_solvable is non_solvable
        assert oracle_derived_dims(triples, n) == (dims, non_solvable)

    def test_series_of_subalgebra(self, heisenberg):
        """The series of the centre inside the Heisenberg algebra."""
        centre = Subspace(3, np.array([[0.0, 0.0, 1.0]]))
        series = derived_series(heisenberg, start=centre)
        assert series.dims == [1, 0]

    def test_random_solvable_matches_oracle(self):
        """Upper triangular 3x3 matrices, in the basis E_ij with i <= j."""
        pairs = [(i, j) for i in range(3) for j in range(i, 3)]
        index = {pair: a for a, pair in enumerate(pairs)}
        triples = []
        for (a, (i, j)), (b, (k, l)) in product(enumerate(pairs), repeat=2):
            if a >= b:
                continue
            coefficients = {}
            if j == k:
                coefficients[index[(i, l)]] = coefficients.get(index[(i, l)], 0) + 1
            if l == i:
                coefficients[index[(k, j)]] = coefficients.get(index[(k, j)], 0) - 1
            triples.extend((a, b, target, v) for target, v in coefficients.items() if v)
        n = len(pairs)
        dims, non_solvable = oracle_derived_dims(triples, n)
        series = derived_series(LieAlgebra.from_triples(n, triples))
        assert series.dims == dims == [6, 3, 1, 0]
        assert series.non_solvable is non_solvable is False


class TestKillingAndRadical:
    """Tests for Killing form, compact type and radical."""

    def test_killing_su2(self, su2):
        assert np.allclose(killing_form(su2).matrix, -2.0 * np.eye(3), atol=1e-10)
        assert np.allclose(killing_form(su2).matrix, np.array(oracle_killing(SU2, 3), dtype=float))

    def test_killing_sl2r_signature(self, sl2r):
        assert np.allclose(killing_form(sl2r).matrix, np.array(oracle_killing(SL2R, 3), dtype=float))
        assert killing_form(sl2r).signature() == (2, 1, 0)

    def test_compact_type(self, su2, sl2r):
        assert is_compact_type(su2) is True
        assert is_compact_type(sl2r) is False

    def test_compact_type_needs_semisimple(self, heisenberg):
        with pytest.raises(NotSemisimple):
            is_compact_type(heisenberg)

    def test_radical_su2_plus_line(self, su2):
        """rad(su(2) + R) is the abelian line."""
        algebra = direct_sum(su2, LieAlgebra(np.zeros((1, 1, 1))))
        rad = radical(algebra)
        assert rad.dim == 1
        assert np.allclose(np.abs(rad.orthonormal_basis[0]), [0, 0, 0, 1])
        triples = SU2
        assert oracle_radical_dim(triples + [], 4) == 1

    def test_radical_exact(self):
        algebra = LieAlgebra.from_triples(4, SU2, exact_mode=True)
        rad = radical(algebra)
        assert rad.dim == 1
        assert rad.exact_basis == [[0, 0, 0, 1]]

    @pytest.mark.parametrize("triples, n", [(HEISENBERG, 3), (SU2, 3), (SL2R, 3)])
    def test_radical_dims_match_oracle(self, triples, n):
        assert radical(LieAlgebra.from_triples(n, triples)).dim == oracle_radical_dim(triples, n)

    def test_radical_of_e2(self, e2):
        assert radical(e2).dim == 3


class TestQuotientsAndBases:
    """Tests for ideals, quotients, subalgebras and basis changes."""

    def test_quotient_heisenberg_by_centre(self, heisenberg):
        centre = Subspace(3, np.array([[0.0, 0.0, 1.0]]))
        assert is_ideal(heisenberg, centre)
        quotient = quotient_algebra(heisenberg, centre)
        assert quotient.dim == 2
        assert np.allclose(quotient.c, 0.0)

    def test_quotient_by_non_ideal(self, heisenberg):
        line = Subspace(3, np.array([[1.0, 0.0, 0.0]]))
        assert not is_ideal(heisenberg, line)
        with pytest.raises(NotAnIdeal):
            quotient_algebra(heisenberg, line)

    def test_subalgebra_constants(self, su2):
        algebra = direct_sum(su2, su2)
        first = Subspace(6, np.eye(6)[:3])
        sub = subalgebra_constants(algebra, first)
        assert np.allclose(killing_form(sub).matrix, -2.0 * np.eye(3))

    def test_change_basis_preserves_structure(self, sl2r):
        rng = np.random.default_rng(7)
        transform = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        changed = change_basis(sl2r, transform)
        assert validate(changed).accepted
        assert killing_form(changed).signature() == (2, 1, 0)
