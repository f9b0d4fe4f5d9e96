"""Simply-connected solvable Lie groups through faithful matrix realizations.

Elements carry second-kind exponential coordinates ``g = expm(x_1 M_1) ... expm(x_n M_n)``, the
product taken along the presentation's adapted order. Every derived-series term is spanned by a
suffix of that order, so coordinates can be peeled off one factor at a time from a matrix by
taking logarithms of successively shorter tails.

`delta_solve` inverts ``delta(s) = s^-1 * phi(s)`` when ``1 - phi`` is invertible: it solves one
derived layer at a time (each layer is abelian modulo the next, so the step is linear), then
polishes the result with damped Newton steps driven by ``Y = (phi - 1)^-1 Ad_s log(v delta(s)^-1)``.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm, logm

from .config import DEFAULT_TOLERANCES, SolverConfig, ToleranceConfig
from .errors import (
    DimensionMismatch,
    InvalidPresentation,
    NoConvergence,
    NotInvertible,
    RecoordinatizationFailure,
)
from .lie_algebra import LieAlgebra, bracket, derived_series
from .linalg import numerical_rank, residual_outside, smallest_singular_value
from .logger import get_logger
from .reports import ValidationReport

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class SolvablePresentation:
    """Solvable algebra, realization matrices M_a of shape (n, d, d), and an adapted basis order."""

    algebra: LieAlgebra
    realization: np.ndarray
    adapted_order: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        matrices = np.asarray(self.realization, dtype=float)
        n = self.algebra.dim
        if matrices.ndim != 3 or matrices.shape[0] != n or matrices.shape[1] != matrices.shape[2]:
            raise DimensionMismatch(f"realization must have shape ({n}, d, d), got {matrices.shape}")
        order = tuple(int(a) for a in self.adapted_order) if self.adapted_order else tuple(range(n))
        if sorted(order) != list(range(n)):
            raise InvalidPresentation(f"adapted order {list(order)} is not a permutation of 0..{n - 1}")
        object.__setattr__(self, "realization", matrices)
        object.__setattr__(self, "adapted_order", order)

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def matrix_dim(self) -> int:
        return int(self.realization.shape[1])

    @cached_property
    def _coordinate_map(self) -> np.ndarray:
        return np.linalg.pinv(self.realization.reshape(self.dim, -1).T)

    @cached_property
    def layer_dims(self) -> List[int]:
        """Dimensions of the derived series, ending in 0."""
        return derived_series(self.algebra).dims

    @cached_property
    def layers(self) -> List[List[int]]:
        """Basis indices of each derived layer D^k minus D^(k+1), in adapted order."""
        dims = self.layer_dims
        n = self.dim
        return [list(self.adapted_order[n - dims[k] : n - dims[k + 1]]) for k in range(len(dims) - 1)]

    def algebra_matrix(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("a,ajk->jk", np.asarray(x, dtype=float), self.realization)

    def algebra_coords(self, matrix: np.ndarray) -> Tuple[np.ndarray, float]:
        """Least-squares coordinates of a realized algebra element and the residual outside the span."""
        flat = np.asarray(matrix).ravel()
        coords = self._coordinate_map @ flat
        residual = float(np.linalg.norm(self.realization.reshape(self.dim, -1).T @ coords - flat))
        return coords, residual


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Second-kind coordinates (indexed by basis element) and the realized matrix."""

    coords: np.ndarray
    matrix: np.ndarray

    def to_dict(self) -> dict:
        return {"coords": self.coords, "matrix": self.matrix}


@dataclass(frozen=True, eq=False)
class AlgebraAutomorphism:
    """Linear map on algebra coordinates: ``phi(e_b) = sum_a matrix[a, b] e_a``."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))


@dataclass
class DeltaSolution:
    """Solution of delta(x) = v with its residual and the conditioning of 1 - phi."""

    element: GroupElement
    residual: float
    iterations: int
    condition_number: float

    def to_dict(self) -> dict:
        return {
            "element": self.element,
            "residual": self.residual,
            "iterations": self.iterations,
            "condition_number": self.condition_number,
        }


def validate_presentation(
    presentation: SolvablePresentation, tolerances: ToleranceConfig = DEFAULT_TOLERANCES
) -> ValidationReport:
    """Check the homomorphism property, faithfulness, solvability and adaptedness of the order."""
    algebra = presentation.algebra
    m = presentation.realization
    n = presentation.dim
    homomorphism = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            expected = np.einsum("k,kab->ab", algebra.c[i, j], m)
            homomorphism = max(homomorphism, float(np.linalg.norm(m[i] @ m[j] - m[j] @ m[i] - expected)))

    messages = []
    if homomorphism > tolerances.group_residual:
        messages.append(f"realization does not respect brackets (residual {homomorphism:.3e})")
    if n and numerical_rank(m.reshape(n, -1), 0.0, tolerances, context="realization") < n:
        messages.append("realization matrices are linearly dependent")

    series = derived_series(algebra, tolerances=tolerances)
    adaptedness = 0.0
    if series.non_solvable:
        messages.append(f"algebra is not solvable (derived dims {series.dims})")
    else:
        eye = np.eye(n)
        for term in series.terms[1:]:
            suffix = presentation.adapted_order[n - term.dim :] if term.dim else ()
            for a in suffix:
                adaptedness = max(adaptedness, residual_outside(eye[a], term.orthonormal_basis))
        if adaptedness > tolerances.invariant_subspace:
            messages.append(f"adapted order does not follow the derived series (residual {adaptedness:.3e})")

    return ValidationReport(
        "solvable_presentation",
        not messages,
        {"homomorphism": homomorphism, "adaptedness": adaptedness},
        messages,
    )


def matrix_of(presentation: SolvablePresentation, coords: Sequence[float]) -> np.ndarray:
    x = np.asarray(coords, dtype=float)
    result = np.eye(presentation.matrix_dim)
    for a in presentation.adapted_order:
        if x[a] != 0.0:
            result = result @ expm(x[a] * presentation.realization[a])
    return result


def element(presentation: SolvablePresentation, coords: Sequence[float]) -> GroupElement:
    x = np.asarray(coords, dtype=float)
    if x.shape != (presentation.dim,):
        raise DimensionMismatch(f"coordinates have shape {x.shape}, expected ({presentation.dim},)")
    return GroupElement(x, matrix_of(presentation, x))


def identity(presentation: SolvablePresentation) -> GroupElement:
    return element(presentation, np.zeros(presentation.dim))


def _matrix_log(h: np.ndarray, tolerances: ToleranceConfig) -> np.ndarray:
    d = h.shape[0]
    nilpotent = h - np.eye(d)
    if np.linalg.norm(np.linalg.matrix_power(nilpotent, d)) <= tolerances.group_residual:
        # unipotent: the log series terminates
        result = np.zeros_like(h)
        term = np.eye(d)
        for k in range(1, d):
            term = term @ nilpotent
            result += ((-1) ** (k + 1) / k) * term
        return result
    value = logm(h)
    if np.iscomplexobj(value):
        imaginary = float(np.max(np.abs(value.imag)))
        if imaginary > tolerances.group_residual * max(1.0, float(np.linalg.norm(value))):
            raise RecoordinatizationFailure(
                f"principal logarithm is not real (imaginary part {imaginary:.3e})", {"imaginary": imaginary}
            )
        value = value.real
    return np.asarray(value, dtype=float)


def algebra_log(
    presentation: SolvablePresentation, h: np.ndarray, tolerances: ToleranceConfig = DEFAULT_TOLERANCES
) -> np.ndarray:
    """Algebra coordinates of the principal logarithm of ``h``."""
    log_h = _matrix_log(h, tolerances)
    coords, residual = presentation.algebra_coords(log_h)
    if residual > tolerances.group_residual * max(1.0, float(np.linalg.norm(log_h))):
        raise RecoordinatizationFailure(
            f"logarithm leaves the realized algebra (residual {residual:.3e})", {"residual": residual}
        )
    return coords


def recoordinatize(
    presentation: SolvablePresentation, h: np.ndarray, tolerances: ToleranceConfig = DEFAULT_TOLERANCES
) -> GroupElement:
    """Second-kind coordinates of a realized group element, one leading factor at a time."""
    h = np.asarray(h, dtype=float)
    m = presentation.realization
    order = presentation.adapted_order
    coords = np.zeros(presentation.dim)
    remainder = h
    for position, a in enumerate(order):
        log_h = _matrix_log(remainder, tolerances)
        tail = list(order[position:])
        flat = m[tail].reshape(len(tail), -1).T
        coefficients, *_ = np.linalg.lstsq(flat, log_h.ravel(), rcond=None)
        outside = float(np.linalg.norm(flat @ coefficients - log_h.ravel()))
        if outside > tolerances.group_residual * max(1.0, float(np.linalg.norm(log_h))):
            raise RecoordinatizationFailure(
                f"logarithm of the tail at position {position} leaves its subalgebra (residual {outside:.3e})",
                {"position": position, "residual": outside},
            )
        coords[a] = coefficients[0]
        remainder = expm(-coords[a] * m[a]) @ remainder

    leftover = float(np.linalg.norm(remainder - np.eye(presentation.matrix_dim)))
    if leftover > tolerances.group_residual * max(1.0, float(np.linalg.norm(h))):
        raise RecoordinatizationFailure(f"peeled coordinates leave residual {leftover:.3e}", {"residual": leftover})
    return GroupElement(coords, h)


def multiply(
    presentation: SolvablePresentation,
    g: GroupElement,
    h: GroupElement,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> GroupElement:
    return recoordinatize(presentation, g.matrix @ h.matrix, tolerances)


def inverse(
    presentation: SolvablePresentation, g: GroupElement, tolerances: ToleranceConfig = DEFAULT_TOLERANCES
) -> GroupElement:
    return recoordinatize(presentation, np.linalg.inv(g.matrix), tolerances)


def check_automorphism(
    presentation: SolvablePresentation,
    phi: AlgebraAutomorphism,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> ValidationReport:
    """Bracket-preservation residual of ``phi`` over basis pairs."""
    algebra = presentation.algebra
    n = algebra.dim
    if phi.matrix.shape != (n, n):
        raise DimensionMismatch(f"automorphism has shape {phi.matrix.shape}, expected {(n, n)}")
    eye = np.eye(n)
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            lhs = phi.matrix @ bracket(algebra, eye[i], eye[j])
            rhs = bracket(algebra, phi.matrix[:, i], phi.matrix[:, j])
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    messages = []
    if worst > tolerances.automorphism:
        messages.append(f"map does not preserve brackets (residual {worst:.3e})")
    if n and smallest_singular_value(phi.matrix) <= tolerances.automorphism:  # type: ignore[operator]
        messages.append("map is not invertible")
    return ValidationReport("automorphism", not messages, {"bracket": worst}, messages)


def apply_automorphism(
    presentation: SolvablePresentation,
    phi: AlgebraAutomorphism,
    g: GroupElement,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> GroupElement:
    """Image of ``g`` under the group automorphism with differential ``phi``."""
    m = presentation.realization
    images = np.einsum("ab,ajk->bjk", phi.matrix, m)
    result = np.eye(presentation.matrix_dim)
    for b in presentation.adapted_order:
        if g.coords[b] != 0.0:
            result = result @ expm(g.coords[b] * images[b])
    return recoordinatize(presentation, result, tolerances)


def delta(
    presentation: SolvablePresentation,
    phi: AlgebraAutomorphism,
    s: GroupElement,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> GroupElement:
    """``s^-1 * phi(s)``."""
    image = apply_automorphism(presentation, phi, s, tolerances)
    return recoordinatize(presentation, np.linalg.inv(s.matrix) @ image.matrix, tolerances)


def adjoint_matrix(presentation: SolvablePresentation, s: GroupElement) -> np.ndarray:
    """Matrix of Ad_s on algebra coordinates."""
    s_inv = np.linalg.inv(s.matrix)
    columns = [presentation.algebra_coords(s.matrix @ m @ s_inv)[0] for m in presentation.realization]
    return np.array(columns).T if columns else np.zeros((0, 0))


def _layer_element(presentation: SolvablePresentation, layer: Sequence[int], alpha: np.ndarray) -> np.ndarray:
    coords = np.zeros(presentation.dim)
    coords[list(layer)] = alpha
    return matrix_of(presentation, coords)


def _relative_residual(current: np.ndarray, target: np.ndarray) -> float:
    return float(np.linalg.norm(current - target)) / max(1.0, float(np.linalg.norm(target)))


def delta_solve(
    presentation: SolvablePresentation,
    phi: AlgebraAutomorphism,
    v: GroupElement,
    solver: Optional[SolverConfig] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> DeltaSolution:
    """Find ``x`` with ``x^-1 * phi(x) = v``; requires ``1 - phi`` invertible."""
    solver = solver or SolverConfig()
    n = presentation.dim
    one_minus_phi = np.eye(n) - phi.matrix
    smallest = smallest_singular_value(one_minus_phi)
    if smallest is not None and smallest <= tolerances.free_action:
        raise NotInvertible(
            f"1 - phi is singular (smallest singular value {smallest:.3e})", {"smallest_singular_value": smallest}
        )
    condition = float(np.linalg.cond(one_minus_phi)) if n else 1.0
    phi_minus_one_inv = np.linalg.inv(-one_minus_phi) if n else np.zeros((0, 0))

    x = np.eye(presentation.matrix_dim)
    for layer in presentation.layers:
        current = delta(presentation, phi, recoordinatize(presentation, x, tolerances), tolerances)
        w = v.matrix @ np.linalg.inv(current.matrix)
        u = recoordinatize(presentation, x @ w @ np.linalg.inv(x), tolerances)
        block = phi.matrix[np.ix_(layer, layer)] - np.eye(len(layer))
        alpha = np.linalg.solve(block, u.coords[layer])
        x = _layer_element(presentation, layer, alpha) @ x

    s = recoordinatize(presentation, x, tolerances)
    residual = _relative_residual(delta(presentation, phi, s, tolerances).matrix, v.matrix)
    iterations = 0
    while residual > solver.newton_tol and iterations < solver.max_iterations:
        iterations += 1
        current = delta(presentation, phi, s, tolerances)
        error = algebra_log(presentation, v.matrix @ np.linalg.inv(current.matrix), tolerances)
        step = phi_minus_one_inv @ (adjoint_matrix(presentation, s) @ error)
        scale = 1.0
        while True:
            moved = expm(scale * presentation.algebra_matrix(step)) @ s.matrix
            candidate = recoordinatize(presentation, moved, tolerances)
            candidate_residual = _relative_residual(delta(presentation, phi, candidate, tolerances).matrix, v.matrix)
            if candidate_residual < residual or scale < 1e-6:
                break
            scale *= solver.damping
            logger.debug(f"Newton step increased the residual; damping to {scale:g}")
        if candidate_residual >= residual:
            break
        s, residual = candidate, candidate_residual

    if residual > tolerances.group_residual:
        raise NoConvergence(
            f"delta solver stalled at residual {residual:.3e} after {iterations} Newton steps",
            {"residual": residual, "iterations": iterations, "condition_number": condition},
        )
    return DeltaSolution(s, residual, iterations, condition)


def abelian_presentation(dim: int) -> SolvablePresentation:
    """R^dim realized as translations in (dim + 1) x (dim + 1) matrices."""
    realization = np.zeros((dim, dim + 1, dim + 1))
    for a in range(dim):
        realization[a, a, dim] = 1.0
    return SolvablePresentation(LieAlgebra(np.zeros((dim, dim, dim))), realization)
