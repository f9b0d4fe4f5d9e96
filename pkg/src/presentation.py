"""Group presentations fed to the decision procedures, and presentations derived from them.

Three kinds are supported:

- ``vector_by_compact``: V = R^n with a compact part acting through its torus generators.
- ``solvable_by_compact``: a realized solvable group with the torus acting on its algebra by
  derivations (``adjoint_action``).
- ``general``: a full algebra g with torus derivations on g, an optional declared radical and
  semisimple part, and declared compact directions per derived layer of the radical.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .errors import DimensionMismatch, InvalidPresentation, NotAnIdeal, PreconditionError
from .lie_algebra import (
    LieAlgebra,
    Subspace,
    abelian,
    bracket,
    derived_series,
    is_ideal,
    quotient_algebra,
    quotient_basis,
    radical,
)
from .linalg import residual_outside, span_basis
from .logger import get_logger
from .reports import ValidationReport
from .solvable_group import SolvablePresentation, validate_presentation
from .torus_rep import CompactPartPresentation, TorusRep, orthogonalize_generators, validate_compact_part

logger = get_logger(__name__)

KINDS = ("vector_by_compact", "solvable_by_compact", "general")


@dataclass(frozen=True, eq=False)
class GroupPresentation:
    """Extension data for one connected Lie group (plus optional disconnected compact part)."""

    kind: str
    compact: Optional[CompactPartPresentation] = None
    vector_dim: int = 0
    solvable: Optional[SolvablePresentation] = None
    adjoint_action: Optional[np.ndarray] = None
    algebra: Optional[LieAlgebra] = None
    semisimple_part: Optional[LieAlgebra] = None
    radical: Optional[Subspace] = None
    layer_compact_directions: Dict[int, Subspace] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InvalidPresentation(f"unknown presentation kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "vector_by_compact":
            if self.compact is not None and self.compact.torus.dim != self.vector_dim:
                raise DimensionMismatch(
                    f"torus acts on R^{self.compact.torus.dim} but the vector part is R^{self.vector_dim}"
                )
        elif self.kind == "solvable_by_compact":
            if self.solvable is None:
                raise InvalidPresentation("solvable_by_compact presentation needs a solvable part")
            if self.compact is not None and self.compact.components:
                raise InvalidPresentation("component generators are only supported for vector_by_compact")
        elif self.algebra is None:
            raise InvalidPresentation("general presentation needs the full algebra")

        if self.adjoint_action is not None:
            action = np.asarray(self.adjoint_action, dtype=float)
            m = self.acted_dim
            if action.ndim != 3 or action.shape[1:] != (m, m):
                raise DimensionMismatch(f"adjoint action must have shape (r, {m}, {m}), got {action.shape}")
            if action.shape[0] != self.torus_rank:
                raise DimensionMismatch(f"{action.shape[0]} derivations for a torus of rank {self.torus_rank}")
            object.__setattr__(self, "adjoint_action", action)

    @property
    def torus_rank(self) -> int:
        return self.compact.torus.rank if self.compact is not None else 0

    @property
    def acted_dim(self) -> int:
        """Dimension of the space the torus acts on (V, the solvable algebra, or g)."""
        if self.kind == "vector_by_compact":
            return self.vector_dim
        if self.kind == "solvable_by_compact":
            return self.solvable.dim  # type: ignore[union-attr]
        return self.algebra.dim  # type: ignore[union-attr]

    @property
    def connected(self) -> bool:
        return self.compact is None or self.compact.connected

    def action_generators(self) -> np.ndarray:
        """Torus generators acting on the acted space, shape (r, m, m)."""
        m = self.acted_dim
        if self.compact is None:
            return np.zeros((0, m, m))
        if self.kind == "vector_by_compact":
            return self.compact.torus.generators
        if self.adjoint_action is None:
            raise InvalidPresentation(f"{self.kind} presentation with a compact part needs adjoint_action")
        return self.adjoint_action

    def action_rep(self) -> Optional[TorusRep]:
        """The torus action as a TorusRep, or None for a trivial (rank 0) compact part."""
        if self.compact is None:
            return None
        if self.kind == "vector_by_compact":
            return self.compact.torus
        return TorusRep(self.action_generators())

    @property
    def lie_algebra(self) -> LieAlgebra:
        """The algebra the torus acts on by derivations."""
        if self.kind == "vector_by_compact":
            return abelian(self.vector_dim)
        if self.kind == "solvable_by_compact":
            return self.solvable.algebra  # type: ignore[union-attr]
        return self.algebra  # type: ignore[return-value]


def derivation_residual(algebra: LieAlgebra, derivation: np.ndarray) -> float:
    """Largest ``|D[x, y] - [Dx, y] - [x, Dy]|`` over basis pairs."""
    n = algebra.dim
    eye = np.eye(n)
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            lhs = derivation @ bracket(algebra, eye[i], eye[j])
            rhs = bracket(algebra, derivation[:, i], eye[j]) + bracket(algebra, eye[i], derivation[:, j])
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def radical_terms(presentation: GroupPresentation, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> List[Subspace]:
    """Derived series of the radical inside g (declared radical if given)."""
    algebra = presentation.lie_algebra
    rad = presentation.radical if presentation.radical is not None else radical(algebra, tolerances)
    if presentation.radical is not None and not is_ideal(algebra, rad, tolerances):
        raise NotAnIdeal("declared radical is not an ideal")
    if rad.dim == 0:
        return [rad]
    series = derived_series(algebra, start=rad, tolerances=tolerances)
    if series.non_solvable:
        raise InvalidPresentation(f"declared radical is not solvable (derived dims {series.dims})")
    return series.terms


def validate_group_presentation(
    presentation: GroupPresentation, tolerances: ToleranceConfig = DEFAULT_TOLERANCES
) -> List[ValidationReport]:
    """Validate every part of a presentation; one report per part."""
    reports: List[ValidationReport] = []
    if presentation.compact is not None:
        reports.append(validate_compact_part(presentation.compact, tolerances))
    if presentation.solvable is not None:
        reports.append(validate_presentation(presentation.solvable, tolerances))

    if presentation.kind != "vector_by_compact" and presentation.compact is not None:
        algebra = presentation.lie_algebra
        generators = presentation.action_generators()
        derivation = max((derivation_residual(algebra, d) for d in generators), default=0.0)
        messages = []
        if derivation > tolerances.derivation:
            messages.append(f"adjoint action is not by derivations (residual {derivation:.3e})")
        reports.append(ValidationReport("adjoint_action", not messages, {"derivation": derivation}, messages))

    if presentation.layer_compact_directions:
        reports.append(_validate_layer_directions(presentation, tolerances))
    return reports


def _validate_layer_directions(presentation: GroupPresentation, tolerances: ToleranceConfig) -> ValidationReport:
    terms = radical_terms(presentation, tolerances)
    generators = presentation.action_generators()
    algebra = presentation.lie_algebra
    containment = 0.0
    invariance = 0.0
    messages = []
    for layer, directions in sorted(presentation.layer_compact_directions.items()):
        if not 0 <= layer < len(terms) - 1:
            messages.append(f"layer {layer} does not exist (radical has {len(terms) - 1} layers)")
            continue
        term = terms[layer].orthonormal_basis
        below = terms[layer + 1].orthonormal_basis
        allowed = span_basis(list(directions.basis) + list(below), algebra.dim, 1.0, tolerances, "layer directions")
        for vector in directions.basis:
            containment = max(containment, residual_outside(vector, term))
            for d in generators:
                invariance = max(invariance, residual_outside(d @ vector, allowed))
    if containment > tolerances.invariant_subspace:
        messages.append(f"declared compact directions leave their layer (residual {containment:.3e})")
    if invariance > tolerances.invariant_subspace:
        messages.append(f"declared compact directions are not Ad-invariant (residual {invariance:.3e})")
    return ValidationReport(
        "layer_compact_directions",
        not messages,
        {"containment": containment, "invariance": invariance},
        messages,
    )


def as_general(presentation: GroupPresentation) -> GroupPresentation:
    """Algebra-level view: g is V (abelian) or the solvable algebra, the torus acting by derivations."""
    if presentation.kind == "general":
        return presentation
    if not presentation.connected:
        raise PreconditionError("only connected compact parts have a general presentation")
    action = presentation.action_generators() if presentation.compact is not None else None
    return GroupPresentation(
        kind="general",
        compact=presentation.compact,
        adjoint_action=action,
        algebra=presentation.lie_algebra,
        name=f"{presentation.name} (general)" if presentation.name else "",
    )


def quotient_by_layer(
    presentation: GroupPresentation, layer_index: int, tolerances: ToleranceConfig = DEFAULT_TOLERANCES
) -> GroupPresentation:
    """The general presentation of G / L for L the connected subgroup of derived term ``layer_index``."""
    general = as_general(presentation)
    terms = radical_terms(general, tolerances)
    if not 0 <= layer_index < len(terms):
        raise PreconditionError(f"radical has derived terms 0..{len(terms) - 1}, got {layer_index}")
    ideal = terms[layer_index]
    algebra = general.lie_algebra
    q = quotient_basis(ideal, tolerances)
    quotient = quotient_algebra(algebra, ideal, tolerances)

    action = None
    if general.compact is not None:
        action = np.einsum("ab,ibc,dc->iad", q, general.action_generators(), q)

    projected_radical = _project(terms[0], q, tolerances)
    directions = {
        layer: _project(subspace, q, tolerances)
        for layer, subspace in general.layer_compact_directions.items()
        if layer < layer_index
    }
    directions = {layer: subspace for layer, subspace in directions.items() if subspace.dim}
    return replace(
        general,
        algebra=quotient,
        adjoint_action=action,
        radical=projected_radical,
        layer_compact_directions=directions,
        name=f"{general.name} / D^{layer_index}" if general.name else "",
    )


def _project(subspace: Subspace, q: np.ndarray, tolerances: ToleranceConfig) -> Subspace:
    if subspace.dim == 0 or q.shape[0] == 0:
        return Subspace.zero(q.shape[0])
    images = list(subspace.basis @ q.T)
    return Subspace(q.shape[0], span_basis(images, q.shape[0], 1.0, tolerances, "projection to quotient"))


def restrict_to_layer(
    presentation: GroupPresentation, layer_index: int, tolerances: ToleranceConfig = DEFAULT_TOLERANCES
) -> GroupPresentation:
    """The vector presentation L x| K for an abelian derived term L of the radical."""
    general = as_general(presentation)
    terms = radical_terms(general, tolerances)
    if not 0 <= layer_index < len(terms):
        raise PreconditionError(f"radical has derived terms 0..{len(terms) - 1}, got {layer_index}")
    if layer_index + 1 < len(terms) and terms[layer_index + 1].dim:
        raise PreconditionError(f"derived term {layer_index} is not abelian")
    declared = [layer for layer in general.layer_compact_directions if layer >= layer_index]
    if declared:
        raise PreconditionError(f"compact directions declared in layers {declared} at or below the vector layer")

    basis = terms[layer_index].orthonormal_basis
    m = basis.shape[0]
    if general.compact is None or m == 0:
        return GroupPresentation(kind="vector_by_compact", vector_dim=m, name=general.name)
    restricted = np.einsum("ab,ibc,dc->iad", basis, general.action_generators(), basis)
    if float(np.max(np.abs(restricted + restricted.transpose(0, 2, 1)))) > tolerances.skew:
        restricted, _ = orthogonalize_generators(restricted)
    return GroupPresentation(
        kind="vector_by_compact",
        compact=CompactPartPresentation(TorusRep(restricted)),
        vector_dim=m,
        name=f"{general.name} layer {layer_index}" if general.name else "",
    )
