"""Torus representations on R^n given by commuting skew generators.

``rho(t) = expm(2*pi * sum_i t_i A_i)`` for ``t`` in ``[0, 1)^r``. Weights are read off a joint
eigenbasis of the Hermitian matrices ``-1j * A_i``; each eigenvalue tuple is rounded to an integer
vector, and a tuple that misses Z^r by more than the rounding tolerance is an error.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm, sqrtm

from .config import DEFAULT_TOLERANCES, SamplingConfig, ToleranceConfig
from .errors import (
    DimensionMismatch,
    InternalDisagreement,
    InvalidPresentation,
    NonIntegralGenerator,
    WeightRoundingAmbiguity,
)
from .linalg import kernel_basis, smallest_singular_value
from .logger import get_logger
from .reports import ValidationReport
from .sampling import DensityEstimate, DensitySampler

logger = get_logger(__name__)

Weight = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class TorusRep:
    """Representation of T^r on R^n by generators of shape (r, n, n)."""

    generators: np.ndarray

    def __post_init__(self) -> None:
        stack = np.asarray(self.generators, dtype=float)
        if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
            raise DimensionMismatch(f"torus generators must have shape (r, n, n), got {stack.shape}")
        if stack.shape[0] == 0:
            raise InvalidPresentation("torus rank must be positive")
        object.__setattr__(self, "generators", stack)

    @property
    def rank(self) -> int:
        return int(self.generators.shape[0])

    @property
    def dim(self) -> int:
        return int(self.generators.shape[1])

    def conjugate(self, q: np.ndarray) -> "TorusRep":
        """The representation ``q A_i q^{-1}``."""
        q = np.asarray(q, dtype=float)
        return TorusRep(np.einsum("ab,ibc,cd->iad", q, self.generators, np.linalg.inv(q)))


@dataclass(frozen=True)
class WeightMultiset:
    """Integer weights with complex multiplicities, sorted by weight."""

    entries: Tuple[Tuple[Weight, int], ...]

    @property
    def total(self) -> int:
        return sum(multiplicity for _, multiplicity in self.entries)

    def multiplicity(self, weight: Sequence[int]) -> int:
        key = tuple(int(w) for w in weight)
        return next((m for w, m in self.entries if w == key), 0)

    def has_zero(self) -> bool:
        return any(not any(weight) for weight, _ in self.entries)

    def weights(self) -> List[Weight]:
        return [weight for weight, _ in self.entries]

    def is_negation_closed(self) -> bool:
        return all(self.multiplicity(tuple(-w for w in weight)) == m for weight, m in self.entries)

    def to_dict(self) -> Dict[str, object]:
        return {"entries": [{"weight": list(weight), "multiplicity": m} for weight, m in self.entries]}


@dataclass(frozen=True, eq=False)
class CompactPartPresentation:
    """A torus plus optional orthogonal component generators normalizing its image."""

    torus: TorusRep
    components: Tuple[np.ndarray, ...] = ()

    def __post_init__(self) -> None:
        components = tuple(np.asarray(g, dtype=float) for g in self.components)
        for index, g in enumerate(components):
            if g.shape != (self.torus.dim, self.torus.dim):
                raise DimensionMismatch(
                    f"component {index} has shape {g.shape}, expected {(self.torus.dim, self.torus.dim)}"
                )
        object.__setattr__(self, "components", components)

    @property
    def connected(self) -> bool:
        return not self.components

    @property
    def component_count(self) -> int:
        """Number of component choices, the identity component included."""
        return len(self.components) + 1


def commutation_residual(generators: np.ndarray) -> float:
    worst = 0.0
    for i in range(len(generators)):
        for j in range(i + 1, len(generators)):
            commutator = generators[i] @ generators[j] - generators[j] @ generators[i]
            worst = max(worst, float(np.linalg.norm(commutator, 2)))
    return worst


def integrality_residual(generators: np.ndarray) -> float:
    """Largest distance of a generator eigenvalue from i*Z."""
    worst = 0.0
    for a in generators:
        if a.size == 0:
            continue
        eigenvalues = np.linalg.eigvals(a)
        nearest = 1j * np.rint(eigenvalues.imag)
        worst = max(worst, float(np.max(np.abs(eigenvalues - nearest))))
    return worst


def validate_torus_rep(rep: TorusRep, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> ValidationReport:
    """Check commutation, skew-symmetry and 2*pi-integrality of the generators."""
    generators = rep.generators
    commutation = commutation_residual(generators)
    skew = max((float(np.linalg.norm(a + a.T, 2)) for a in generators if a.size), default=0.0)
    integrality = integrality_residual(generators)
    if integrality > tolerances.integrality:
        raise NonIntegralGenerator(
            f"generator eigenvalue misses i*Z by {integrality:.3e}; the generators do not define a torus action",
            {"integrality": integrality},
        )

    messages = []
    if commutation > tolerances.commutation:
        messages.append(f"generators do not commute (residual {commutation:.3e})")
    if skew > tolerances.skew:
        messages.append(f"generators are not skew-symmetric (residual {skew:.3e}); use orthogonalize")
    return ValidationReport(
        "torus_rep",
        not messages,
        {"commutation": commutation, "skew": skew, "integrality": integrality},
        messages,
    )


def orthogonalize_generators(generators: np.ndarray, quadrature_points: int = 64) -> Tuple[np.ndarray, np.ndarray]:
    """Conjugate commuting semisimple integral generators into skew form.

    The standard inner product is averaged over a ``quadrature_points`` grid on each circle in turn.
    For weight differences below ``quadrature_points`` the average is exactly torus-invariant.
    Returns ``(skew_generators, s)`` with ``skew_generators[i] = s @ generators[i] @ inv(s)``.
    """
    generators = np.asarray(generators, dtype=float)
    n = generators.shape[1]
    gram = np.eye(n)
    grid = np.arange(quadrature_points) / quadrature_points
    for a in generators:
        flows = [expm(2 * np.pi * theta * a) for theta in grid]
        gram = sum(flow.T @ gram @ flow for flow in flows) / quadrature_points
    gram = (gram + gram.T) / 2
    s = np.real(sqrtm(gram))
    s_inv = np.linalg.inv(s)
    skew = np.einsum("ab,ibc,cd->iad", s, generators, s_inv)
    residual = float(np.max(np.abs(skew + skew.transpose(0, 2, 1)))) if skew.size else 0.0
    logger.debug(f"Orthogonalized {len(generators)} generators, skew residual {residual:.2e}")
    return skew, s


def joint_eigenspaces(
    rep: TorusRep, tolerances: ToleranceConfig = DEFAULT_TOLERANCES
) -> List[Tuple[Weight, np.ndarray]]:
    """Weight spaces of the complexification as (weight, orthonormal columns) pairs."""
    n = rep.dim
    groups: List[Tuple[Weight, np.ndarray]] = [((), np.eye(n, dtype=complex))]
    if n == 0:
        return []
    for a in rep.generators:
        hermitian = -1j * a
        refined: List[Tuple[Weight, np.ndarray]] = []
        for weight, basis in groups:
            restricted = basis.conj().T @ hermitian @ basis
            values, vectors = np.linalg.eigh((restricted + restricted.conj().T) / 2)
            rounded = np.rint(values)
            miss = np.abs(values - rounded)
            if np.any(miss > tolerances.weight_rounding):
                raise WeightRoundingAmbiguity(
                    f"eigenvalues {values[miss > tolerances.weight_rounding].tolist()} miss the integers",
                    {"miss": float(np.max(miss))},
                )
            for value in np.unique(rounded):
                mask = rounded == value
                refined.append((weight + (int(value),), basis @ vectors[:, mask]))
        groups = refined
    return groups


def weights(rep: TorusRep, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> WeightMultiset:
    counts: Dict[Weight, int] = {}
    for weight, basis in joint_eigenspaces(rep, tolerances):
        counts[weight] = counts.get(weight, 0) + basis.shape[1]
    return WeightMultiset(tuple(sorted(counts.items())))


def fixed_subspace(rep: TorusRep, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Orthonormal rows spanning the joint kernel of the generators."""
    if rep.dim == 0:
        return np.zeros((0, 0))
    stacked = rep.generators.reshape(-1, rep.dim)
    reference = float(np.max(np.abs(stacked))) if stacked.size else 0.0
    return kernel_basis(stacked, reference, tolerances, context="joint kernel of torus generators")


def has_trivial_weight(
    rep: TorusRep,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    weight_multiset: Optional[WeightMultiset] = None,
) -> bool:
    """True iff the zero weight occurs; the weight count and the joint kernel must agree."""
    multiset = weight_multiset if weight_multiset is not None else weights(rep, tolerances)
    zero_multiplicity = multiset.multiplicity((0,) * rep.rank)
    kernel_dim = fixed_subspace(rep, tolerances).shape[0]
    if zero_multiplicity != kernel_dim:
        raise InternalDisagreement(
            f"zero weight has multiplicity {zero_multiplicity} but the joint kernel has dimension {kernel_dim}",
            {"zero_multiplicity": zero_multiplicity, "kernel_dim": kernel_dim},
        )
    return zero_multiplicity > 0


def _torus_coords(rep: TorusRep, t: Sequence[float]) -> np.ndarray:
    coords = np.atleast_1d(np.asarray(t, dtype=float))
    if coords.shape != (rep.rank,):
        raise DimensionMismatch(f"torus coordinates have shape {coords.shape}, expected ({rep.rank},)")
    return coords


def rho_of(rep: TorusRep, t: Sequence[float]) -> np.ndarray:
    coords = _torus_coords(rep, t)
    return expm(2 * np.pi * np.einsum("i,ijk->jk", coords, rep.generators))


def weight_margin(multiset: WeightMultiset, t: Sequence[float]) -> float:
    """``min_w |exp(2*pi*i w.t) - 1|``, the smallest singular value of rho(t) - 1 by weights."""
    coords = np.asarray(t, dtype=float)
    margins = [2.0 * abs(np.sin(np.pi * float(np.dot(weight, coords)))) for weight in multiset.weights()]
    return min(margins, default=float("inf"))


def fr_membership(
    rep: TorusRep,
    t: Sequence[float],
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    weight_multiset: Optional[WeightMultiset] = None,
) -> bool:
    """True iff rho(t) - 1 is invertible, checked by singular values and by weights."""
    coords = _torus_coords(rep, t)
    if rep.dim == 0:
        return True
    multiset = weight_multiset if weight_multiset is not None else weights(rep, tolerances)
    matrix_margin = smallest_singular_value(rho_of(rep, coords) - np.eye(rep.dim))
    by_matrix = bool(matrix_margin is not None and matrix_margin > tolerances.free_action)
    margin = weight_margin(multiset, coords)
    by_weights = margin > tolerances.free_action
    if by_matrix != by_weights and abs(float(matrix_margin or 0.0) - margin) > tolerances.free_action:
        raise InternalDisagreement(
            f"free-action test disagrees at t={coords.tolist()}: "
            f"singular value {matrix_margin}, weight margin {margin}",
            {"t": coords.tolist(), "singular_value": matrix_margin, "weight_margin": margin},
        )
    return bool(by_weights)


def fr_density_estimate(
    rep: TorusRep,
    n: int,
    seed: int,
    config: Optional[SamplingConfig] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> DensityEstimate:
    """Fraction of Haar-uniform torus points acting freely on nonzero vectors."""
    sampler = DensitySampler(config)
    sampler.check_sample_count(n)
    multiset = weights(rep, tolerances)

    def member(rng: np.random.Generator, index: int) -> Optional[bool]:
        return fr_membership(rep, rng.random(rep.rank), tolerances, multiset)

    return sampler.estimate(member, n, seed, {"kind": "torus_haar", "rank": rep.rank})


def validate_compact_part(
    part: CompactPartPresentation, tolerances: ToleranceConfig = DEFAULT_TOLERANCES
) -> ValidationReport:
    """Torus checks plus orthogonality and normalizer residuals of each component."""
    report = validate_torus_rep(part.torus, tolerances)
    residuals = dict(report.residuals)
    messages = list(report.messages)
    flat = part.torus.generators.reshape(part.torus.rank, -1).T
    orthogonality = 0.0
    normalizer = 0.0
    for g in part.components:
        orthogonality = max(orthogonality, float(np.max(np.abs(g.T @ g - np.eye(part.torus.dim)))))
        for a in part.torus.generators:
            image = (g @ a @ g.T).ravel()
            coeffs, *_ = np.linalg.lstsq(flat, image, rcond=None)
            normalizer = max(normalizer, float(np.linalg.norm(flat @ coeffs - image)))
    if orthogonality > tolerances.orthogonality:
        messages.append(f"component generator is not orthogonal (residual {orthogonality:.3e})")
    if normalizer > tolerances.normalizer:
        messages.append(f"component generator does not normalize the torus (residual {normalizer:.3e})")
    residuals.update({"orthogonality": orthogonality, "normalizer": normalizer})
    return ValidationReport("compact_part", not messages, residuals, messages)


def compact_matrix(part: CompactPartPresentation, t: Sequence[float], component: Optional[int] = None) -> np.ndarray:
    """Matrix of the compact element ``rho(t) * g_component`` (identity component when None)."""
    matrix = rho_of(part.torus, t)
    if component is None:
        return matrix
    if not 0 <= component < len(part.components):
        raise DimensionMismatch(f"component index {component} out of range for {len(part.components)} components")
    return matrix @ part.components[component]
