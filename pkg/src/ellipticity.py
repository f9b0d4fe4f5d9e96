"""Elliptic elements: spectral test, semidirect criteria, conjugation witnesses and density sampling.

An element ``(v, s)`` of a semidirect product ``L x| K`` with compact ``K`` is elliptic exactly when
it is conjugate into ``K``, which happens iff ``v = x^-1 * Ad_s(x)`` for some ``x`` in ``L``. For a
vector group this is the linear condition ``v in im(rho(s) - 1)``.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm, svdvals

from .config import DEFAULT_TOLERANCES, SamplingConfig, SolverConfig, ToleranceConfig
from .errors import (
    DimensionMismatch,
    NotInvertible,
    NoConvergence,
    NoWitness,
    PreconditionError,
    SpectralAmbiguity,
    Undetermined,
)
from .logger import get_logger
from .presentation import GroupPresentation
from .sampling import DensityEstimate, DensitySampler
from .solvable_group import (
    AlgebraAutomorphism,
    GroupElement,
    SolvablePresentation,
    delta,
    delta_solve,
    element,
    recoordinatize,
)
from .torus_rep import CompactPartPresentation, compact_matrix

logger = get_logger(__name__)

METHODS = ("spectral", "abelian_image", "solvable_delta")


@dataclass
class EllipticVerdict:
    """Elliptic or not, with the conjugation witness when one was constructed."""

    elliptic: bool
    residual: float
    method: str
    witness: Optional[np.ndarray] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "elliptic": self.elliptic,
            "residual": self.residual,
            "method": self.method,
            "witness": self.witness,
            "details": self.details,
        }


@dataclass(frozen=True, eq=False)
class SemidirectElement:
    """``(v, s)``: translation coordinates plus torus coordinates and an optional component index."""

    translation: np.ndarray
    t: np.ndarray
    component: Optional[int] = None

    def __post_init__(self) -> None:
        translation = np.atleast_1d(np.asarray(self.translation, dtype=float))
        t = np.atleast_1d(np.asarray(self.t, dtype=float))
        if not (np.all(np.isfinite(translation)) and np.all(np.isfinite(t))):
            raise PreconditionError("element coordinates must be finite")
        object.__setattr__(self, "translation", translation)
        object.__setattr__(self, "t", t)


@dataclass
class Conjugator:
    """``u = (x, 1)`` with ``u e u^-1`` in the compact factor."""

    translation: np.ndarray
    conjugated_translation: np.ndarray
    residual: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "translation": self.translation,
            "conjugated_translation": self.conjugated_translation,
            "residual": self.residual,
        }


def is_elliptic_matrix(
    g: np.ndarray, tol: Optional[float] = None, tolerances: ToleranceConfig = DEFAULT_TOLERANCES
) -> EllipticVerdict:
    """Elliptic iff diagonalizable with every eigenvalue on the unit circle."""
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {g.shape}")
    tol = tolerances.spectral if tol is None else tol
    n = g.shape[0]
    if n == 0:
        return EllipticVerdict(True, 0.0, "spectral")
    determinant = abs(np.linalg.det(g))
    if determinant <= 1e-12:
        raise PreconditionError(f"matrix is not invertible (|det| = {determinant:.3e})")

    eigenvalues, vectors = np.linalg.eig(g)
    deviation = np.abs(np.abs(eigenvalues) - 1.0)
    worst = float(np.max(deviation))
    factor = tolerances.ambiguity_factor
    if worst > tol * factor:
        return EllipticVerdict(False, worst, "spectral", details={"reason": "eigenvalue off the unit circle"})
    borderline = deviation[(deviation >= tol / factor) & (deviation <= tol * factor)]
    if borderline.size:
        raise SpectralAmbiguity(
            f"eigenvalue moduli within a factor {factor} of the tolerance {tol:.0e}",
            {"deviations": borderline.tolist()},
        )

    norm = float(svdvals(g)[0])
    remaining = list(range(n))
    while remaining:
        centre = eigenvalues[remaining[0]]
        cluster = [i for i in remaining if abs(eigenvalues[i] - centre) <= tolerances.eigen_cluster]
        remaining = [i for i in remaining if i not in cluster]
        mean = complex(np.mean(eigenvalues[cluster]))
        singular = svdvals(g - mean * np.eye(n))
        rank = int(np.sum(singular > tolerances.spectral * norm))
        if rank != n - len(cluster) and not _independent_eigenvectors(vectors[:, cluster], tolerances):
            return EllipticVerdict(
                False,
                worst,
                "spectral",
                details={"reason": "not diagonalizable", "eigenvalue": [mean.real, mean.imag]},
            )
    return EllipticVerdict(True, worst, "spectral")


def _independent_eigenvectors(vectors: np.ndarray, tolerances: ToleranceConfig) -> bool:
    """Close but distinct eigenvalues (a rotation by a tiny angle) fall into one cluster; their
    eigenvectors stay independent, while those of a Jordan block collapse onto one line."""
    if vectors.shape[1] < 2:
        return False
    unit = vectors / np.linalg.norm(vectors, axis=0)
    return bool(svdvals(unit)[-1] > tolerances.eigenvector_independence)


def _relative_residual(residual: float, v: np.ndarray) -> float:
    scale = float(np.linalg.norm(v))
    return residual / scale if scale > 0.0 else residual


def is_elliptic_abelian(
    v: Sequence[float],
    part: CompactPartPresentation,
    t: Sequence[float],
    component: Optional[int] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> EllipticVerdict:
    """Least-squares solve of ``(rho(s) - 1) x = v``; elliptic iff the relative residual is small."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (part.torus.dim,):
        raise DimensionMismatch(f"translation has shape {v.shape}, expected ({part.torus.dim},)")
    if not np.any(v):
        return EllipticVerdict(True, 0.0, "abelian_image", witness=np.zeros_like(v))
    rho = compact_matrix(part, t, component)
    system = rho - np.eye(len(v))
    x, *_ = np.linalg.lstsq(system, v, rcond=tolerances.rank_rtol)
    residual = _relative_residual(float(np.linalg.norm(system @ x - v)), v)
    if residual <= tolerances.elliptic_residual:
        return EllipticVerdict(True, residual, "abelian_image", witness=x)
    return EllipticVerdict(False, residual, "abelian_image")


def _layered_obstruction(
    presentation: SolvablePresentation,
    phi: AlgebraAutomorphism,
    v: GroupElement,
    tolerances: ToleranceConfig,
) -> Tuple[np.ndarray, float]:
    """Layer-by-layer least-squares solve of delta(x) = v; returns (x matrix, obstruction)."""
    x = np.eye(presentation.matrix_dim)
    obstruction = 0.0
    scale = max(1.0, float(np.linalg.norm(v.coords)))
    for layer in presentation.layers:
        current = delta(presentation, phi, recoordinatize(presentation, x, tolerances), tolerances)
        w = v.matrix @ np.linalg.inv(current.matrix)
        u = recoordinatize(presentation, x @ w @ np.linalg.inv(x), tolerances)
        block = phi.matrix[np.ix_(layer, layer)] - np.eye(len(layer))
        target = u.coords[layer]
        alpha, *_ = np.linalg.lstsq(block, target, rcond=tolerances.rank_rtol)
        obstruction = max(obstruction, float(np.linalg.norm(block @ alpha - target)) / scale)
        coords = np.zeros(presentation.dim)
        coords[layer] = alpha
        x = element(presentation, coords).matrix @ x
    return x, obstruction


def is_elliptic_solvable(
    v: GroupElement,
    phi: AlgebraAutomorphism,
    presentation: SolvablePresentation,
    solver: Optional[SolverConfig] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> EllipticVerdict:
    """Elliptic iff ``v = x^-1 * phi(x)`` for some ``x``; witness ``x`` in second-kind coordinates."""
    if not np.any(v.coords):
        return EllipticVerdict(True, 0.0, "solvable_delta", witness=np.zeros(presentation.dim))
    try:
        solution = delta_solve(presentation, phi, v, solver, tolerances)
        return EllipticVerdict(
            True,
            solution.residual,
            "solvable_delta",
            witness=solution.element.coords,
            details={"condition_number": solution.condition_number, "iterations": solution.iterations},
        )
    except NotInvertible:
        pass
    except NoConvergence as exc:
        raise Undetermined(f"delta solver did not converge: {exc.message}", exc.details) from exc

    x, obstruction = _layered_obstruction(presentation, phi, v, tolerances)
    tol = tolerances.elliptic_residual
    if obstruction > tol * tolerances.ambiguity_factor:
        return EllipticVerdict(False, obstruction, "solvable_delta", details={"obstruction": obstruction})
    if obstruction > tol:
        raise Undetermined(f"fixed-direction obstruction {obstruction:.3e} is borderline", {"obstruction": obstruction})
    s = recoordinatize(presentation, x, tolerances)
    achieved = delta(presentation, phi, s, tolerances)
    residual = float(np.linalg.norm(achieved.matrix - v.matrix)) / max(1.0, float(np.linalg.norm(v.matrix)))
    if residual > tolerances.group_residual:
        raise Undetermined(
            f"layered solution leaves residual {residual:.3e} with vanishing obstruction",
            {"obstruction": obstruction, "residual": residual},
        )
    return EllipticVerdict(True, residual, "solvable_delta", witness=s.coords, details={"obstruction": obstruction})


def conjugate_into_K(
    e: SemidirectElement,
    verdict: EllipticVerdict,
    part: CompactPartPresentation,
    solvable: Optional[SolvablePresentation] = None,
    phi: Optional[AlgebraAutomorphism] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> Conjugator:
    """Conjugator ``u = (x, 1)`` from the witness; ``u e u^-1`` has trivial translation part."""
    if not verdict.elliptic or verdict.witness is None:
        raise NoWitness("element has no elliptic witness to conjugate with")
    x = np.asarray(verdict.witness, dtype=float)

    if solvable is None:
        rho = compact_matrix(part, e.t, e.component)
        conjugated = x + e.translation - rho @ x
        residual = _relative_residual(float(np.linalg.norm(conjugated)), e.translation)
    else:
        if phi is None:
            raise NoWitness("solvable conjugation needs the automorphism Ad_s")
        u = element(solvable, x)
        v = element(solvable, e.translation)
        image = delta(solvable, phi, u, tolerances)
        # u v Ad_s(u)^-1 = u v (u delta(u))^-1
        product = u.matrix @ v.matrix @ np.linalg.inv(u.matrix @ image.matrix)
        conjugated = recoordinatize(solvable, product, tolerances).coords
        residual = float(np.linalg.norm(product - np.eye(solvable.matrix_dim)))

    if residual > tolerances.elliptic_residual:
        raise NoWitness(f"witness leaves translation residual {residual:.3e}", {"residual": residual})
    return Conjugator(x, conjugated, residual)


def adjoint_automorphism(presentation: GroupPresentation, t: Sequence[float]) -> AlgebraAutomorphism:
    """Ad_s on the solvable algebra for ``s`` the torus element with coordinates ``t``."""
    generators = presentation.action_generators()
    coords = np.atleast_1d(np.asarray(t, dtype=float))
    return AlgebraAutomorphism(expm(2 * np.pi * np.einsum("i,ijk->jk", coords, generators)))


def element_verdict(
    presentation: GroupPresentation,
    e: SemidirectElement,
    solver: Optional[SolverConfig] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> EllipticVerdict:
    """Elliptic verdict for an element of a vector or solvable presentation."""
    if presentation.kind == "vector_by_compact":
        if presentation.compact is None:
            elliptic = not np.any(e.translation)
            return EllipticVerdict(elliptic, 0.0 if elliptic else 1.0, "abelian_image")
        return is_elliptic_abelian(e.translation, presentation.compact, e.t, e.component, tolerances)
    if presentation.kind == "solvable_by_compact":
        solvable = presentation.solvable
        phi = adjoint_automorphism(presentation, e.t) if presentation.compact is not None else None
        if phi is None:
            phi = AlgebraAutomorphism(np.eye(solvable.dim))  # type: ignore[union-attr]
        v = element(solvable, e.translation)  # type: ignore[arg-type]
        return is_elliptic_solvable(v, phi, solvable, solver, tolerances)  # type: ignore[arg-type]
    raise PreconditionError("elliptic sampling needs a vector_by_compact or solvable_by_compact presentation")


def _translation_dim(presentation: GroupPresentation) -> int:
    if presentation.kind == "vector_by_compact":
        return presentation.vector_dim
    if presentation.kind == "solvable_by_compact":
        return presentation.solvable.dim  # type: ignore[union-attr]
    raise PreconditionError("elliptic sampling needs a vector_by_compact or solvable_by_compact presentation")


def _component_count(presentation: GroupPresentation) -> int:
    return presentation.compact.component_count if presentation.compact is not None else 1


def _draw_global(presentation: GroupPresentation, rng: np.random.Generator, scale: float) -> SemidirectElement:
    translation = scale * rng.standard_normal(_translation_dim(presentation))
    t = rng.random(presentation.torus_rank)
    choice = int(rng.integers(_component_count(presentation)))
    return SemidirectElement(translation, t, None if choice == 0 else choice - 1)


def _classify(
    presentation: GroupPresentation,
    e: SemidirectElement,
    solver: Optional[SolverConfig],
    tolerances: ToleranceConfig,
) -> Optional[bool]:
    try:
        return element_verdict(presentation, e, solver, tolerances).elliptic
    except (Undetermined, SpectralAmbiguity):
        return None


def elliptic_density(
    presentation: GroupPresentation,
    n: int,
    seed: int,
    config: Optional[SamplingConfig] = None,
    solver: Optional[SolverConfig] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> DensityEstimate:
    """Sampled fraction of elliptic elements under Gaussian x Haar x uniform-component measure."""
    config = config or SamplingConfig()
    sampler = DensitySampler(config)
    sampler.check_sample_count(n)
    _translation_dim(presentation)

    def member(rng: np.random.Generator, index: int) -> Optional[bool]:
        return _classify(presentation, _draw_global(presentation, rng, config.scale), solver, tolerances)

    info = {
        "kind": "gaussian_haar",
        "scale": config.scale,
        "torus_rank": presentation.torus_rank,
        "components": _component_count(presentation),
    }
    return sampler.estimate(member, n, seed, info)


def open_core_density(
    presentation: GroupPresentation,
    n: int,
    seed: int,
    config: Optional[SamplingConfig] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> DensityEstimate:
    """Sampled fraction of elements whose compact part acts with ``1 - phi_s`` invertible."""
    config = config or SamplingConfig()
    sampler = DensitySampler(config)
    sampler.check_sample_count(n)
    m = _translation_dim(presentation)

    def member(rng: np.random.Generator, index: int) -> Optional[bool]:
        e = _draw_global(presentation, rng, config.scale)
        if m == 0:
            return True
        if presentation.compact is None:
            return False
        if presentation.kind == "vector_by_compact":
            phi = compact_matrix(presentation.compact, e.t, e.component)
        else:
            phi = adjoint_automorphism(presentation, e.t).matrix
        return bool(svdvals(np.eye(m) - phi)[-1] > tolerances.free_action)

    return sampler.estimate(member, n, seed, {"kind": "open_core", "scale": config.scale})


def local_elliptic_density(
    presentation: GroupPresentation,
    center: SemidirectElement,
    radius: float,
    n: int,
    seed: int,
    config: Optional[SamplingConfig] = None,
    solver: Optional[SolverConfig] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> DensityEstimate:
    """Elliptic fraction on a translation ball x torus arc around ``center``, component fixed."""
    if radius <= 0:
        raise PreconditionError(f"radius must be positive, got {radius}")
    sampler = DensitySampler(config)
    sampler.check_sample_count(n)
    m = _translation_dim(presentation)
    if center.translation.shape != (m,) or center.t.shape != (presentation.torus_rank,):
        raise DimensionMismatch("center coordinates do not match the presentation")

    def member(rng: np.random.Generator, index: int) -> Optional[bool]:
        direction = rng.standard_normal(m)
        norm = float(np.linalg.norm(direction))
        offset = direction / norm * radius * rng.random() ** (1.0 / m) if m and norm > 0 else np.zeros(m)
        t = center.t + radius * (2.0 * rng.random(presentation.torus_rank) - 1.0)
        nearby = SemidirectElement(center.translation + offset, t, center.component)
        return _classify(presentation, nearby, solver, tolerances)

    info = {
        "kind": "local_ball",
        "radius": radius,
        "center": {
            "translation": center.translation.tolist(),
            "t": center.t.tolist(),
            "component": center.component,
        },
    }
    return sampler.estimate(member, n, seed, info)


@dataclass
class PowerNormResult:
    """``sup_k ||t^k - 1||`` for each member of a matrix family."""

    labels: List[str]
    suprema: List[float]
    argmax: List[int]
    elliptic: List[bool]
    kmax: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kmax": self.kmax,
            "members": [
                {"label": label, "sup": sup, "k": k, "elliptic": elliptic}
                for label, sup, k, elliptic in zip(self.labels, self.suprema, self.argmax, self.elliptic)
            ],
        }


def tilted_line_operator(n: int, lam: complex, tilt: float) -> np.ndarray:
    """Identity on C^(n-1) and ``lam`` on the line spanned by ``cos(tilt) e_1 + sin(tilt) e_n``."""
    if n < 2:
        raise PreconditionError("the tilted-line family needs n >= 2")
    if not 0 < tilt <= np.pi / 2:
        raise PreconditionError(f"tilt must lie in (0, pi/2], got {tilt}")
    basis = np.eye(n, dtype=complex)
    basis[:, n - 1] = 0.0
    basis[0, n - 1] = np.cos(tilt)
    basis[n - 1, n - 1] = np.sin(tilt)
    diagonal = np.ones(n, dtype=complex)
    diagonal[n - 1] = lam
    return basis @ np.diag(diagonal) @ np.linalg.inv(basis)


def power_norm_sup(t: np.ndarray, kmax: int, batch: int = 1024) -> Tuple[float, int]:
    """``(max_k ||t^k - 1||, argmax k)`` over ``1 <= k <= kmax`` in operator norm."""
    t = np.asarray(t)
    n = t.shape[0]
    identity = np.eye(n)
    best, best_k = 0.0, 1
    power = identity.astype(t.dtype)
    for start in range(1, kmax + 1, batch):
        stop = min(kmax, start + batch - 1)
        powers = np.empty((stop - start + 1, n, n), dtype=np.result_type(t, float))
        for offset in range(stop - start + 1):
            power = power @ t
            powers[offset] = power
        norms = np.linalg.norm(powers - identity, ord=2, axis=(1, 2))
        index = int(np.argmax(norms))
        if norms[index] > best:
            best, best_k = float(norms[index]), start + index
    return best, best_k


def power_norm_divergence(
    family: Sequence[np.ndarray],
    kmax: int,
    labels: Optional[Sequence[str]] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> PowerNormResult:
    """Per family member, ``max_{1 <= k <= kmax} ||t^k - 1||``."""
    if kmax < 1:
        raise PreconditionError(f"kmax must be at least 1, got {kmax}")
    names = list(labels) if labels is not None else [str(i) for i in range(len(family))]
    suprema, argmax, elliptic = [], [], []
    for matrix in family:
        sup, k = power_norm_sup(matrix, kmax)
        suprema.append(sup)
        argmax.append(k)
        elliptic.append(is_elliptic_matrix(matrix, tolerances=tolerances).elliptic)
    return PowerNormResult(names, suprema, argmax, elliptic, kmax)
