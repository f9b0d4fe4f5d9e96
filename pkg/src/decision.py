"""Decision procedures for (openly) almost-elliptic groups.

For ``V x| K`` and ``L x| K`` with connected compact ``K`` the group is almost-elliptic iff the
torus weights on V (resp. on the Lie algebra of L) are all non-trivial, and then it is openly so.
The conditions below are evaluated independently and must agree:

- (a) torus elements acting freely on nonzero vectors have full measure (sampled)
- (b) the identity is a cluster point of such elements (shrinking balls)
- (c) free torus elements are dense in the torus (checked at generic points)
- (d) free elements approach the identity along a generic ray
- (e) no weight is trivial
- (f) elliptic elements have full measure in the group (sampled)
- (g) elements whose compact part acts with ``1 - phi_s`` invertible have full measure (sampled)

For a general connected group the verdict combines compactness of the semisimple quotient with
trivial-weight-freeness of the torus action on the non-compact part of every derived layer of the
radical.
"""

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .config import AppConfig
from .errors import (
    DisconnectedCompactPart,
    EquivalenceViolation,
    InternalDisagreement,
    InvalidPresentation,
    PreconditionError,
    UndeclaredCompactDirections,
)
from .ellipticity import elliptic_density, open_core_density
from .lie_algebra import LieAlgebra, Subspace, ad_matrix, is_compact_type, quotient_algebra, validate
from .linalg import complement_within, kernel_basis, span_basis
from .logger import LoggerMixin
from .presentation import (
    GroupPresentation,
    quotient_by_layer,
    radical_terms,
    restrict_to_layer,
    validate_group_presentation,
)
from .reports import to_jsonable
from .sampling import DensityEstimate, sample_stream
from .torus_rep import (
    TorusRep,
    WeightMultiset,
    fr_density_estimate,
    fr_membership,
    has_trivial_weight,
    orthogonalize_generators,
    validate_torus_rep,
    weight_margin,
    weights,
)

OPENLY = "openly_almost_elliptic"
NOT = "not_almost_elliptic"

# Fractional parts of sqrt(p) for the first primes: a fixed generic point of the torus
GENERIC_POINT = np.array([np.sqrt(p) % 1.0 for p in (2, 3, 5, 7, 11, 13, 17, 19)])
RAY_LEVELS = 10

DESCRIPTIONS = {
    "a": "free torus elements have full measure",
    "b": "identity is a cluster point of free torus elements",
    "c": "free torus elements are dense in the torus",
    "d": "free elements approach the identity along a generic ray",
    "e": "no trivial weight",
    "f": "elliptic elements have full measure",
    "g": "open elliptic core has full measure",
}


@dataclass
class ConditionResult:
    label: str
    holds: bool
    evidence: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "description": DESCRIPTIONS.get(self.label, self.label),
            "holds": self.holds,
            "evidence": self.evidence,
        }


@dataclass
class LayerReport:
    """Torus action on the non-compact part of one derived layer of the radical."""

    index: int
    dim: int
    nc_dim: int
    compact_dim: int
    weights: WeightMultiset
    trivial_weight: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "dim": self.dim,
            "nc_dim": self.nc_dim,
            "compact_dim": self.compact_dim,
            "weights": self.weights,
            "trivial_weight": self.trivial_weight,
        }


@dataclass
class DecisionReport:
    kind: str
    verdict: str
    conditions: Dict[str, ConditionResult] = field(default_factory=dict)
    weights: Optional[WeightMultiset] = None
    layer_reports: List[LayerReport] = field(default_factory=list)
    sampling: Optional[DensityEstimate] = None
    semisimple_compact: Optional[bool] = None
    warnings: List[str] = field(default_factory=list)
    name: str = ""

    @property
    def almost_elliptic(self) -> bool:
        return self.verdict == OPENLY

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind,
            "verdict": self.verdict,
            "conditions": self.conditions,
            "weights": self.weights,
            "layer_reports": self.layer_reports,
            "sampling": self.sampling,
            "semisimple_compact": self.semisimple_compact,
            "warnings": self.warnings,
        }


@dataclass
class BatteryReport:
    """All seven conditions for one presentation; they agree or an error was raised."""

    conditions: Dict[str, ConditionResult]
    value: bool
    name: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "value": self.value, "consistent": True, "conditions": self.conditions}


@dataclass
class PermanenceReport:
    """Verdicts for G, G/L and L x| K with L the vector layer ``layer_index``."""

    layer_index: int
    group: str
    quotient: str
    layer: str

    @property
    def consistent(self) -> bool:
        return (self.group == OPENLY) == (self.quotient == OPENLY and self.layer == OPENLY)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layer_index": self.layer_index,
            "group": self.group,
            "quotient": self.quotient,
            "layer": self.layer,
            "consistent": self.consistent,
        }


def _verdict(value: bool) -> str:
    return OPENLY if value else NOT


class DecisionEngine(LoggerMixin):
    """Runs the decision procedures with one configuration and seed."""

    def __init__(self, config: Optional[AppConfig] = None, seed: Optional[int] = None):
        self.config = config or AppConfig()
        self.tolerances = self.config.tolerances
        self.seed = self.config.sampling.seed if seed is None else seed

    # Shared pieces

    def _require_valid(self, presentation: GroupPresentation) -> None:
        for report in validate_group_presentation(presentation, self.tolerances):
            if not report.accepted:
                raise InvalidPresentation(
                    f"{report.subject}: {'; '.join(report.messages)}",
                    {"subject": report.subject, "residuals": report.residuals},
                )

    def skew_rep(self, generators: np.ndarray) -> TorusRep:
        """TorusRep for commuting integral generators, orthogonalized when not already skew."""
        rep = TorusRep(generators)
        report = validate_torus_rep(rep, self.tolerances)
        if report.residuals["skew"] > self.tolerances.skew:
            self.logger.info("Torus action is not skew; averaging an invariant inner product")
            skew, _ = orthogonalize_generators(generators, self.config.sampling.quadrature_points)
            rep = TorusRep(skew)
            report = validate_torus_rep(rep, self.tolerances)
        if not report.accepted:
            raise InvalidPresentation(f"torus action: {'; '.join(report.messages)}", {"residuals": report.residuals})
        return rep

    def rep_conditions(self, rep: Optional[TorusRep], dim: int, samples: int) -> Dict[str, ConditionResult]:
        """Conditions (a) through (e) for a torus action on a space of dimension ``dim``."""
        labels = ("a", "b", "c", "d", "e")
        if dim == 0:
            return {label: ConditionResult(label, True, {"vacuous": True}) for label in labels}
        if rep is None:
            return {label: ConditionResult(label, False, {"torus_rank": 0}) for label in labels}

        tolerances = self.tolerances
        sampling = self.config.sampling
        multiset = weights(rep, tolerances)

        density = fr_density_estimate(rep, samples, self.seed, sampling, tolerances)
        a = ConditionResult("a", density.fraction >= sampling.density_threshold, {"estimate": density})

        members_per_level = []
        for level in range(1, sampling.probe_levels + 1):
            rng = sample_stream(self.seed, level)
            radius = 2.0 ** (-level)
            points = radius * (2.0 * rng.random((sampling.probe_samples, rep.rank)) - 1.0)
            members_per_level.append(sum(fr_membership(rep, t, tolerances, multiset) for t in points))
        b = ConditionResult(
            "b", all(count >= 1 for count in members_per_level), {"members_per_level": members_per_level}
        )

        generic = self._generic_point(rep.rank)
        extra = sample_stream(self.seed, sampling.probe_levels + 1).random((2, rep.rank))
        candidates = [generic] + list(extra)
        margins = [weight_margin(multiset, t) for t in candidates]
        c = ConditionResult("c", any(m > tolerances.free_action for m in margins), {"margins": margins})

        ray = [weight_margin(multiset, generic * 2.0 ** (-k)) for k in range(1, RAY_LEVELS + 1)]
        d = ConditionResult("d", all(m > tolerances.free_action for m in ray), {"ray_margins": ray})

        trivial = has_trivial_weight(rep, tolerances, multiset)
        e = ConditionResult("e", not trivial, {"weights": multiset})
        return {"a": a, "b": b, "c": c, "d": d, "e": e}

    def _generic_point(self, rank: int) -> np.ndarray:
        if rank <= len(GENERIC_POINT):
            return GENERIC_POINT[:rank].copy()
        tail = sample_stream(self.seed, -1 % (2**32)).random(rank - len(GENERIC_POINT))
        return np.concatenate([GENERIC_POINT, tail])

    def _check_agreement(self, conditions: Dict[str, ConditionResult], name: str) -> bool:
        values = {label: result.holds for label, result in conditions.items()}
        if len(set(values.values())) > 1:
            self.logger.error(f"Conditions disagree for {name or 'presentation'}: {values}")
            raise EquivalenceViolation(
                f"equivalent conditions disagree: {values}",
                {"conditions": to_jsonable(conditions)},
            )
        return next(iter(values.values())) if values else True

    def _action_rep(self, presentation: GroupPresentation) -> Optional[TorusRep]:
        if presentation.compact is None:
            return None
        if presentation.kind == "vector_by_compact":
            return presentation.compact.torus
        return self.skew_rep(presentation.action_generators())

    # Vector and solvable groups

    def decide_vector_by_compact(self, presentation: GroupPresentation) -> DecisionReport:
        if presentation.kind != "vector_by_compact":
            raise PreconditionError(f"expected a vector_by_compact presentation, got {presentation.kind}")
        if not presentation.connected:
            raise DisconnectedCompactPart(
                "the decision needs a connected compact part; use local_elliptic_density to probe components",
                {"components": len(presentation.compact.components)},  # type: ignore[union-attr]
            )
        self._require_valid(presentation)
        rep = self._action_rep(presentation)
        conditions = self.rep_conditions(rep, presentation.vector_dim, self.config.decision.condition_samples)
        value = self._check_agreement(conditions, presentation.name)
        self.logger.info(f"{presentation.name or 'vector presentation'}: {_verdict(value)}")
        return DecisionReport(
            kind=presentation.kind,
            verdict=_verdict(value),
            conditions=conditions,
            weights=conditions["e"].evidence.get("weights"),
            name=presentation.name,
        )

    def decide_solvable_by_compact(
        self, presentation: GroupPresentation, cross_validate: Optional[bool] = None
    ) -> DecisionReport:
        if presentation.kind != "solvable_by_compact":
            raise PreconditionError(f"expected a solvable_by_compact presentation, got {presentation.kind}")
        self._require_valid(presentation)
        rep = self._action_rep(presentation)
        dim = presentation.solvable.dim  # type: ignore[union-attr]
        conditions = self.rep_conditions(rep, dim, self.config.decision.condition_samples)
        value = self._check_agreement(conditions, presentation.name)

        sampling = None
        cross_validate = self.config.decision.cross_validate if cross_validate is None else cross_validate
        if cross_validate:
            sampling = elliptic_density(
                presentation,
                self.config.decision.cross_validation_samples,
                self.seed,
                self.config.sampling,
                self.config.solver,
                self.tolerances,
            )
            sampled = sampling.fraction >= self.config.sampling.density_threshold
            if sampled != value:
                raise EquivalenceViolation(
                    f"weight verdict {_verdict(value)} but sampled elliptic fraction {sampling.fraction:.4f}",
                    {"sampling": to_jsonable(sampling), "conditions": to_jsonable(conditions)},
                )
            if sampling.undetermined:
                self.logger.warning(f"{sampling.undetermined} undetermined samples in cross-validation")

        self.logger.info(f"{presentation.name or 'solvable presentation'}: {_verdict(value)}")
        return DecisionReport(
            kind=presentation.kind,
            verdict=_verdict(value),
            conditions=conditions,
            weights=conditions["e"].evidence.get("weights"),
            sampling=sampling,
            name=presentation.name,
        )

    # General connected groups

    def decide_general(self, presentation: GroupPresentation) -> DecisionReport:
        if presentation.kind != "general":
            raise PreconditionError(f"expected a general presentation, got {presentation.kind}")
        tolerances = self.tolerances
        algebra = presentation.lie_algebra
        check = validate(algebra, tolerances)
        if not check.accepted:
            raise InvalidPresentation(f"algebra: {'; '.join(check.messages)}", {"residuals": check.residuals})
        self._require_valid(presentation)

        terms = radical_terms(presentation, tolerances)
        semisimple_quotient = quotient_algebra(algebra, terms[0], tolerances)
        semisimple_compact = is_compact_type(semisimple_quotient, tolerances)
        if presentation.semisimple_part is not None:
            declared = is_compact_type(presentation.semisimple_part, tolerances)
            if declared != semisimple_compact:
                raise InternalDisagreement(
                    "declared semisimple part and g/rad disagree on compactness",
                    {"declared": declared, "quotient": semisimple_compact},
                )
        self.logger.debug(f"Radical dims {[t.dim for t in terms]}, semisimple quotient compact: {semisimple_compact}")

        layer_reports: List[LayerReport] = []
        messages: List[str] = []
        for index in range(len(terms) - 1):
            report, candidates = self._layer_report(presentation, terms, index)
            layer_reports.append(report)
            messages.extend(candidates)
        for message in messages:
            warnings.warn(message, UndeclaredCompactDirections, stacklevel=2)
            self.logger.warning(message)

        layers_free = not any(report.trivial_weight for report in layer_reports)
        conditions = {
            "semisimple_compact": ConditionResult("semisimple_compact", semisimple_compact),
            "layers_trivial_weight_free": ConditionResult(
                "layers_trivial_weight_free",
                layers_free,
                {"trivial_layers": [r.index for r in layer_reports if r.trivial_weight]},
            ),
        }
        verdict = _verdict(semisimple_compact and layers_free)
        self.logger.info(f"{presentation.name or 'general presentation'}: {verdict}")
        return DecisionReport(
            kind=presentation.kind,
            verdict=verdict,
            conditions=conditions,
            layer_reports=layer_reports,
            semisimple_compact=semisimple_compact,
            warnings=messages,
            name=presentation.name,
        )

    def _layer_report(
        self, presentation: GroupPresentation, terms: List[Subspace], index: int
    ) -> Tuple[LayerReport, List[str]]:
        tolerances = self.tolerances
        algebra = presentation.lie_algebra
        n = algebra.dim
        term = terms[index].orthonormal_basis
        below = terms[index + 1].orthonormal_basis
        declared = presentation.layer_compact_directions.get(index)
        compact_rows = list(declared.basis) if declared is not None else []
        removed = span_basis(compact_rows + list(below), n, 1.0, tolerances, context=f"layer {index}")
        nc = complement_within(removed, term, tolerances, context=f"layer {index} nc part")
        nc_dim = nc.shape[0]
        compact_dim = term.shape[0] - below.shape[0] - nc_dim

        if nc_dim == 0:
            multiset = WeightMultiset(())
            trivial = False
            zero_directions = np.zeros((0, n))
        elif presentation.compact is None:
            multiset = WeightMultiset((((), nc_dim),))
            trivial = True
            zero_directions = nc
        else:
            induced = np.einsum("ab,ibc,dc->iad", nc, presentation.action_generators(), nc)
            rep = self.skew_rep(induced)
            multiset = weights(rep, tolerances)
            trivial = has_trivial_weight(rep, tolerances, multiset)
            stacked = induced.reshape(-1, nc_dim)
            reference = float(np.max(np.abs(stacked))) if stacked.size else 0.0
            zero_directions = kernel_basis(stacked, reference, tolerances, context=f"layer {index} fixed") @ nc

        candidates = self._undeclared_candidates(algebra, zero_directions, index) if trivial else []
        report = LayerReport(index, term.shape[0] - below.shape[0], nc_dim, compact_dim, multiset, trivial)
        return report, candidates

    def _undeclared_candidates(self, algebra: LieAlgebra, directions: np.ndarray, index: int) -> List[str]:
        """Zero-weight directions whose ad acts like a rotation generator with rational speeds."""
        messages = []
        for vector in directions:
            eigenvalues = np.linalg.eigvals(ad_matrix(algebra, vector))
            scale = max(1.0, float(np.max(np.abs(eigenvalues)))) if eigenvalues.size else 1.0
            nonzero = eigenvalues[np.abs(eigenvalues) > self.tolerances.spectral * scale]
            if nonzero.size == 0 or np.any(np.abs(nonzero.real) > self.tolerances.spectral * scale):
                continue
            speeds = np.abs(nonzero.imag)
            ratios = speeds / speeds.min()
            rational = all(
                abs(r - float(Fraction(float(r)).limit_denominator(12))) <= self.tolerances.integrality for r in ratios
            )
            if rational:
                direction = np.round(vector, 6).tolist()
                messages.append(
                    f"layer {index}: direction {direction} acts by rotations with rational speeds; "
                    f"declare it in layer_compact_directions if it generates a compact subgroup"
                )
        return messages

    # Dispatch, battery, permanence

    def decide(self, presentation: GroupPresentation) -> DecisionReport:
        if presentation.kind == "vector_by_compact":
            return self.decide_vector_by_compact(presentation)
        if presentation.kind == "solvable_by_compact":
            return self.decide_solvable_by_compact(presentation)
        return self.decide_general(presentation)

    def equivalence_battery(self, presentation: GroupPresentation, samples: Optional[int] = None) -> BatteryReport:
        """Evaluate all seven conditions and require them to agree."""
        if presentation.kind not in ("vector_by_compact", "solvable_by_compact"):
            raise PreconditionError("the battery needs a vector_by_compact or solvable_by_compact presentation")
        if not presentation.connected:
            raise DisconnectedCompactPart("the battery needs a connected compact part")
        self._require_valid(presentation)
        n = samples if samples is not None else self.config.decision.condition_samples
        dim = presentation.acted_dim
        conditions = self.rep_conditions(self._action_rep(presentation), dim, n)

        threshold = self.config.sampling.density_threshold
        density = elliptic_density(
            presentation, n, self.seed, self.config.sampling, self.config.solver, self.tolerances
        )
        conditions["f"] = ConditionResult("f", density.fraction >= threshold, {"estimate": density})
        core = open_core_density(presentation, n, self.seed, self.config.sampling, self.tolerances)
        conditions["g"] = ConditionResult("g", core.fraction >= threshold, {"estimate": core})

        value = self._check_agreement(conditions, presentation.name)
        self.logger.info(f"Battery for {presentation.name or 'presentation'}: all conditions {value}")
        return BatteryReport(conditions, value, presentation.name)

    def permanence_check(self, presentation: GroupPresentation, layer_index: int) -> PermanenceReport:
        """G is almost-elliptic iff G/L is and L x| K is, for the vector layer L."""
        if presentation.kind == "vector_by_compact":
            raise PreconditionError("permanence needs a general or solvable_by_compact presentation")
        whole = self.decide(presentation)
        quotient = self.decide_general(quotient_by_layer(presentation, layer_index, self.tolerances))
        layer = self.decide_vector_by_compact(restrict_to_layer(presentation, layer_index, self.tolerances))
        report = PermanenceReport(layer_index, whole.verdict, quotient.verdict, layer.verdict)
        if not report.consistent:
            raise EquivalenceViolation(
                f"G is {whole.verdict} but G/L is {quotient.verdict} and L x| K is {layer.verdict}",
                to_jsonable(report),
            )
        return report


def decide_vector_by_compact(presentation: GroupPresentation, config: Optional[AppConfig] = None) -> DecisionReport:
    return DecisionEngine(config).decide_vector_by_compact(presentation)


def decide_solvable_by_compact(presentation: GroupPresentation, config: Optional[AppConfig] = None) -> DecisionReport:
    return DecisionEngine(config).decide_solvable_by_compact(presentation)


def decide_general(presentation: GroupPresentation, config: Optional[AppConfig] = None) -> DecisionReport:
    return DecisionEngine(config).decide_general(presentation)


def equivalence_battery(
    presentation: GroupPresentation, samples: int, seed: int, config: Optional[AppConfig] = None
) -> BatteryReport:
    return DecisionEngine(config, seed).equivalence_battery(presentation, samples)


def permanence_check(
    presentation: GroupPresentation, layer_index: int, config: Optional[AppConfig] = None
) -> PermanenceReport:
    return DecisionEngine(config).permanence_check(presentation, layer_index)


__all__ = [
    "OPENLY",
    "NOT",
    "BatteryReport",
    "ConditionResult",
    "DecisionEngine",
    "DecisionReport",
    "LayerReport",
    "PermanenceReport",
    "decide_general",
    "decide_solvable_by_compact",
    "decide_vector_by_compact",
    "equivalence_battery",
    "permanence_check",
]
