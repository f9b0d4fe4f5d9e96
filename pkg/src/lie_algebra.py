"""Finite-dimensional real Lie algebras given by structure constants.

Convention: ``c[i, j, k]`` is the coefficient of ``e_k`` in ``[e_i, e_j]``, and the adjoint
matrix of ``e_i`` is ``(ad e_i)[k, j] = c[i, j, k]``.

Derived series are computed at the Lie-algebra level; for the simply-connected solvable groups
handled here the closed derived series of the group is the connected subgroup series of these
ideals. When an algebra carries exact rational constants, `derived_series` and `radical` run in
exact arithmetic and only the final bases are converted to floats.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import exact
from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .errors import (
    DimensionMismatch,
    InternalDisagreement,
    InvalidPresentation,
    MalformedTensor,
    NotAnIdeal,
    NotSemisimple,
)
from .linalg import kernel_basis, residual_outside, span_basis
from .logger import get_logger
from .reports import ValidationReport

logger = get_logger(__name__)

ExactConstants = Dict[Tuple[int, int, int], Fraction]


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Real Lie algebra with structure-constant tensor ``c`` of shape (n, n, n)."""

    c: np.ndarray
    labels: Tuple[str, ...] = ()
    exact_constants: Optional[ExactConstants] = None

    def __post_init__(self) -> None:
        tensor = np.asarray(self.c, dtype=float)
        if tensor.ndim != 3 or not (tensor.shape[0] == tensor.shape[1] == tensor.shape[2]):
            raise MalformedTensor(f"structure constants must have shape (n, n, n), got {tensor.shape}")
        if self.labels and len(self.labels) != tensor.shape[0]:
            raise MalformedTensor(f"{len(self.labels)} labels for a {tensor.shape[0]}-dimensional algebra")
        object.__setattr__(self, "c", tensor)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        return int(self.c.shape[0])

    @property
    def scale(self) -> float:
        """Largest structure constant in absolute value; reference magnitude for rank cutoffs."""
        return float(np.max(np.abs(self.c))) if self.c.size else 0.0

    @property
    def is_exact(self) -> bool:
        return self.exact_constants is not None

    @classmethod
    def from_triples(
        cls,
        dim: int,
        triples: Iterable[Tuple[int, int, int, object]],
        labels: Sequence[str] = (),
        exact_mode: bool = False,
    ) -> "LieAlgebra":
        """Build an algebra from sparse ``(i, j, k, value)`` triples with antisymmetric completion.

        An explicit pair ``(i, j, k)`` / ``(j, i, k)`` whose values are not negatives of each other,
        or a nonzero ``(i, i, k)``, is rejected.
        """
        if dim < 0:
            raise MalformedTensor(f"dimension must be non-negative, got {dim}")
        explicit: Dict[Tuple[int, int, int], Fraction] = {}
        floats: Dict[Tuple[int, int, int], float] = {}
        for entry in triples:
            i, j, k, value = entry
            for index in (i, j, k):
                if not 0 <= index < dim:
                    raise MalformedTensor(f"index {index} out of range for dimension {dim} in triple {entry!r}")
            key = (int(i), int(j), int(k))
            numeric = exact.to_fraction(value) if exact_mode else float(value)  # type: ignore[arg-type]
            if i == j and numeric != 0:
                raise MalformedTensor(f"[e_{i}, e_{i}] must vanish, got coefficient {value} on e_{k}")
            if key in explicit or key in floats:
                raise MalformedTensor(f"duplicate triple {key}")
            if exact_mode:
                explicit[key] = numeric  # type: ignore[assignment]
            else:
                floats[key] = numeric  # type: ignore[assignment]

        source: Dict[Tuple[int, int, int], object] = dict(explicit) if exact_mode else dict(floats)
        completed: Dict[Tuple[int, int, int], object] = {}
        for (i, j, k), value in source.items():
            mirror = (j, i, k)
            slack = 0 if exact_mode else 1e-10
            if mirror in source and abs(source[mirror] + value) > slack:  # type: ignore[operator]
                raise MalformedTensor(
                    f"conflicting explicit pair: c{[i, j, k]} = {value} but c{[j, i, k]} = {source[mirror]}"
                )
            completed[(i, j, k)] = value
            completed[mirror] = -value  # type: ignore[operator]

        tensor = np.zeros((dim, dim, dim))
        for (i, j, k), value in completed.items():
            tensor[i, j, k] = float(value)  # type: ignore[arg-type]
        exact_constants = {key: value for key, value in completed.items() if value != 0} if exact_mode else None
        return cls(tensor, tuple(labels), exact_constants)  # type: ignore[arg-type]


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^n given by linearly independent basis rows."""

    ambient_dim: int
    basis: np.ndarray
    exact_basis: Optional[exact.Matrix] = None

    def __post_init__(self) -> None:
        rows = np.asarray(self.basis, dtype=float)
        rows = np.zeros((0, self.ambient_dim)) if rows.size == 0 else rows.reshape(-1, self.ambient_dim)
        object.__setattr__(self, "basis", rows)
        if rows.shape[0] > self.ambient_dim:
            raise InvalidPresentation(f"{rows.shape[0]} basis vectors in a {self.ambient_dim}-dimensional space")
        if rows.shape[0]:
            norms = np.linalg.norm(rows, axis=1)
            if np.any(norms == 0.0):
                raise InvalidPresentation("subspace basis contains a zero vector")
            smallest = np.linalg.svd(rows / norms[:, None], compute_uv=False)[-1]
            if smallest <= 1e-10:
                raise InvalidPresentation(
                    f"subspace basis is linearly dependent (smallest singular value {smallest:.1e})"
                )

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    @property
    def orthonormal_basis(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((0, self.ambient_dim))
        q, _ = np.linalg.qr(self.basis.T)
        return q.T[: self.dim]

    def contains(self, vector: np.ndarray, tol: float = 1e-9) -> bool:
        return residual_outside(vector, self.orthonormal_basis) <= tol * max(1.0, float(np.linalg.norm(vector)))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.zeros((0, ambient_dim)))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim))


@dataclass(frozen=True, eq=False)
class KillingForm:
    """Killing form matrix ``K[i, j] = trace(ad e_i ad e_j)``."""

    matrix: np.ndarray

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.asarray(x) @ self.matrix @ np.asarray(y))

    def signature(self, tol: float = 1e-8) -> Tuple[int, int, int]:
        """Counts of positive, negative and zero eigenvalues."""
        if self.matrix.size == 0:
            return (0, 0, 0)
        eigenvalues = np.linalg.eigvalsh((self.matrix + self.matrix.T) / 2)
        scale = max(1.0, float(np.max(np.abs(eigenvalues))))
        positive = int(np.sum(eigenvalues > tol * scale))
        negative = int(np.sum(eigenvalues < -tol * scale))
        return (positive, negative, len(eigenvalues) - positive - negative)


@dataclass(frozen=True, eq=False)
class DerivedSeries:
    """Derived series ``D^0 ⊇ D^1 ⊇ ...`` of an algebra or subalgebra."""

    terms: List[Subspace]
    non_solvable: bool

    @property
    def dims(self) -> List[int]:
        return [term.dim for term in self.terms]

    def to_dict(self) -> Dict[str, object]:
        return {"dims": self.dims, "non_solvable": self.non_solvable}


def validate(algebra: LieAlgebra, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> ValidationReport:
    """Report antisymmetry and Jacobi residuals; accept iff both are within tolerance."""
    c = algebra.c
    if c.ndim != 3 or len(set(c.shape)) != 1:
        raise MalformedTensor(f"structure constants must have shape (n, n, n), got {c.shape}")
    if algebra.dim == 0:
        return ValidationReport("lie_algebra", True, {"antisymmetry": 0.0, "jacobi": 0.0})

    antisymmetry = float(np.max(np.abs(c + c.transpose(1, 0, 2))))
    jacobi = float(np.max(np.abs(jacobi_tensor(c))))
    messages = []
    if antisymmetry > tolerances.structure:
        messages.append(f"antisymmetry residual {antisymmetry:.3e} exceeds {tolerances.structure:.0e}")
    if jacobi > tolerances.jacobi:
        messages.append(f"Jacobi residual {jacobi:.3e} exceeds {tolerances.jacobi:.0e}")
    return ValidationReport(
        "lie_algebra",
        not messages,
        {"antisymmetry": antisymmetry, "jacobi": jacobi},
        messages,
    )


def jacobi_tensor(c: np.ndarray) -> np.ndarray:
    """J[i, j, l, m]: coefficient of e_m in the cyclic sum [[e_i, e_j], e_l] + ..."""
    return (
        np.einsum("ijk,klm->ijlm", c, c) + np.einsum("jlk,kim->ijlm", c, c) + np.einsum("lik,kjm->ijlm", c, c)
    )


def _check_vector(algebra: LieAlgebra, vector: np.ndarray, name: str) -> np.ndarray:
    array = np.asarray(vector, dtype=float)
    if array.shape != (algebra.dim,):
        raise DimensionMismatch(f"{name} has shape {array.shape}, expected ({algebra.dim},)")
    return array


def bracket(algebra: LieAlgebra, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x = _check_vector(algebra, x, "x")
    y = _check_vector(algebra, y, "y")
    return np.einsum("i,j,ijk->k", x, y, algebra.c)


def ad_matrix(algebra: LieAlgebra, x: np.ndarray) -> np.ndarray:
    x = _check_vector(algebra, x, "x")
    return np.einsum("i,ijk->kj", x, algebra.c)


def killing_form(algebra: LieAlgebra) -> KillingForm:
    c = algebra.c
    return KillingForm(np.einsum("imk,jkm->ij", c, c))


def _exact_bracket(constants: ExactConstants, n: int, x: Sequence[Fraction], y: Sequence[Fraction]) -> List[Fraction]:
    out = [Fraction(0)] * n
    for (i, j, k), value in constants.items():
        if x[i] and y[j]:
            out[k] += x[i] * y[j] * value
    return out


def _exact_series(algebra: LieAlgebra) -> DerivedSeries:
    n = algebra.dim
    constants = algebra.exact_constants or {}
    current = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    terms = [Subspace(n, np.asarray(exact.to_float_rows(current)).reshape(-1, n), current)]
    while True:
        brackets = [
            _exact_bracket(constants, n, current[a], current[b])
            for a in range(len(current))
            for b in range(a + 1, len(current))
        ]
        following = exact.span_basis(brackets, n)
        terms.append(Subspace(n, np.asarray(exact.to_float_rows(following)).reshape(-1, n), following))
        if not following:
            return DerivedSeries(terms, False)
        if len(following) == len(current):
            return DerivedSeries(terms, True)
        current = following


def derived_series(
    algebra: LieAlgebra,
    start: Optional[Subspace] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> DerivedSeries:
    """Derived series of ``algebra`` (or of the subalgebra ``start``), stopping at 0 or at stabilization."""
    n = algebra.dim
    if start is None and algebra.is_exact:
        return _exact_series(algebra)

    first = start if start is not None else Subspace.full(n)
    terms = [first]
    current = first.orthonormal_basis
    while current.shape[0] > 0:
        brackets = [
            bracket(algebra, current[a], current[b])
            for a in range(current.shape[0])
            for b in range(a + 1, current.shape[0])
        ]
        following = span_basis(brackets, n, algebra.scale, tolerances, context="derived series")
        terms.append(Subspace(n, following))
        if following.shape[0] == 0:
            break
        if following.shape[0] == current.shape[0]:
            logger.debug(f"Derived series stabilized at dimension {following.shape[0]}")
            return DerivedSeries(terms, True)
        current = following
    return DerivedSeries(terms, False)


def is_ideal(algebra: LieAlgebra, subspace: Subspace, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    return ideal_residual(algebra, subspace) <= tolerances.ideal * max(1.0, algebra.scale)


def ideal_residual(algebra: LieAlgebra, subspace: Subspace) -> float:
    """Largest component of [e_i, b] outside the subspace, over basis vectors e_i and b."""
    basis = subspace.orthonormal_basis
    worst = 0.0
    for i in range(algebra.dim):
        for b in basis:
            worst = max(worst, residual_outside(bracket(algebra, np.eye(algebra.dim)[i], b), basis))
    return worst


def radical(algebra: LieAlgebra, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    """Solvable radical, as the Killing-orthogonal complement of [L, L]."""
    n = algebra.dim
    if n == 0:
        return Subspace.zero(0)

    if algebra.is_exact:
        constants = algebra.exact_constants or {}
        killing = [[Fraction(0)] * n for _ in range(n)]
        for (i, m, k), a in constants.items():
            for (j, k2, m2), b in constants.items():
                if k2 == k and m2 == m:
                    killing[i][j] += a * b
        derived = _exact_series(algebra).terms[1].exact_basis or []
        rows = exact.matmul(derived, killing) if derived else []
        kernel = exact.nullspace(rows, n) if rows else [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        result = Subspace(n, np.asarray(exact.to_float_rows(kernel)).reshape(-1, n), kernel)
    else:
        killing_matrix = killing_form(algebra).matrix
        derived_basis = derived_series_step(algebra, tolerances)
        if derived_basis.shape[0] == 0:
            result = Subspace.full(n)
        else:
            reference = float(np.max(np.abs(killing_matrix))) if killing_matrix.size else 0.0
            kernel = kernel_basis(derived_basis @ killing_matrix, reference, tolerances, context="radical")
            result = Subspace(n, kernel)

    _check_radical(algebra, result, tolerances)
    return result


def derived_series_step(algebra: LieAlgebra, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Orthonormal basis rows of [L, L]."""
    n = algebra.dim
    eye = np.eye(n)
    brackets = [bracket(algebra, eye[i], eye[j]) for i in range(n) for j in range(i + 1, n)]
    return span_basis(brackets, n, algebra.scale, tolerances, context="derived algebra")


def _check_radical(algebra: LieAlgebra, result: Subspace, tolerances: ToleranceConfig) -> None:
    if not is_ideal(algebra, result, tolerances):
        raise InternalDisagreement("computed radical is not an ideal", {"dim": result.dim})
    if result.dim and derived_series(algebra, start=result, tolerances=tolerances).non_solvable:
        raise InternalDisagreement("computed radical is not solvable", {"dim": result.dim})


def is_compact_type(algebra: LieAlgebra, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """True iff the (semisimple) algebra has negative definite Killing form."""
    rad = radical(algebra, tolerances)
    if rad.dim:
        raise NotSemisimple(f"radical has dimension {rad.dim}; pass the quotient by the radical instead")
    if algebra.dim == 0:
        return True
    matrix = killing_form(algebra).matrix
    eigenvalues = np.linalg.eigvalsh((matrix + matrix.T) / 2)
    return bool(np.all(eigenvalues < -tolerances.compact_type))


def quotient_basis(subspace: Subspace, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Orthonormal rows spanning the orthogonal complement; coordinates on the quotient."""
    n = subspace.ambient_dim
    if subspace.dim == 0:
        return np.eye(n)
    return kernel_basis(subspace.orthonormal_basis, 1.0, tolerances, context="quotient complement")


def quotient_algebra(
    algebra: LieAlgebra, ideal: Subspace, tolerances: ToleranceConfig = DEFAULT_TOLERANCES
) -> LieAlgebra:
    """Structure constants of L / I in the orthonormal complement basis of I."""
    if ideal.ambient_dim != algebra.dim:
        raise DimensionMismatch(f"ideal lives in R^{ideal.ambient_dim}, algebra has dimension {algebra.dim}")
    residual = ideal_residual(algebra, ideal)
    if residual > tolerances.ideal * max(1.0, algebra.scale):
        raise NotAnIdeal(f"subspace is not an ideal (residual {residual:.3e})", {"residual": residual})
    q = quotient_basis(ideal, tolerances)
    m = q.shape[0]
    constants = np.zeros((m, m, m))
    for a in range(m):
        for b in range(m):
            constants[a, b] = q @ bracket(algebra, q[a], q[b])
    return LieAlgebra(constants)


def subalgebra_constants(
    algebra: LieAlgebra, subspace: Subspace, tolerances: ToleranceConfig = DEFAULT_TOLERANCES
) -> LieAlgebra:
    """Structure constants of a subalgebra in its orthonormal basis."""
    basis = subspace.orthonormal_basis
    m = basis.shape[0]
    constants = np.zeros((m, m, m))
    for a in range(m):
        for b in range(m):
            value = bracket(algebra, basis[a], basis[b])
            if residual_outside(value, basis) > tolerances.ideal * max(1.0, algebra.scale):
                raise InvalidPresentation("subspace is not closed under the bracket")
            constants[a, b] = basis @ value
    return LieAlgebra(constants)


def change_basis(algebra: LieAlgebra, transform: np.ndarray) -> LieAlgebra:
    """Structure constants in the basis ``e'_a = sum_i transform[i, a] e_i``."""
    transform = np.asarray(transform, dtype=float)
    if transform.shape != (algebra.dim, algebra.dim):
        raise DimensionMismatch(f"basis change has shape {transform.shape}, expected {(algebra.dim, algebra.dim)}")
    brackets = np.einsum("ia,jb,ijk->abk", transform, transform, algebra.c)
    return LieAlgebra(np.einsum("lk,abk->abl", np.linalg.inv(transform), brackets))


def direct_sum(*algebras: LieAlgebra) -> LieAlgebra:
    n = sum(algebra.dim for algebra in algebras)
    constants = np.zeros((n, n, n))
    labels: List[str] = []
    offset = 0
    for algebra in algebras:
        d = algebra.dim
        constants[offset : offset + d, offset : offset + d, offset : offset + d] = algebra.c
        labels.extend(algebra.labels or [f"e{offset + i}" for i in range(d)])
        offset += d
    return LieAlgebra(constants, tuple(labels))


def abelian(dim: int) -> LieAlgebra:
    return LieAlgebra(np.zeros((dim, dim, dim)))
