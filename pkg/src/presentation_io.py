"""JSON schemas for algebras, compact parts, solvable presentations and group presentations.

Documents are validated by pydantic models; a validation failure becomes a ``SchemaError`` naming
the offending field as a path (``presentation.compact.generators[1]``) and, when the key can be
found in the raw text, the line it appears on.
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    Discriminator,
    Field,
    Tag,
    TypeAdapter,
    ValidationError,
    ValidationInfo,
    field_validator,
    model_validator,
)
from pydantic_core import PydanticCustomError
from typing_extensions import Annotated

from . import exact
from .ellipticity import SemidirectElement, tilted_line_operator
from .errors import InputError, MalformedTensor, SchemaError
from .lie_algebra import LieAlgebra, Subspace
from .logger import LoggerMixin
from .presentation import KINDS, GroupPresentation
from .solvable_group import AlgebraAutomorphism, GroupElement, SolvablePresentation, element
from .torus_rep import CompactPartPresentation, TorusRep, orthogonalize_generators

NUMERIC_CONSTANTS = "numeric_constants"
EXACT_CONSTANTS = "exact_constants"
# Union tags that appear in pydantic error locations but are not document keys
_TAGS = frozenset(KINDS) | {NUMERIC_CONSTANTS, EXACT_CONSTANTS}


def invalid(message: str, member: str = "", index: Optional[int] = None) -> PydanticCustomError:
    """Schema error raised from a validator; ``member`` and ``index`` refine the error location."""
    context: Dict[str, Any] = {}
    if member:
        context["member"] = member
    if index is not None:
        context["index"] = index
    return PydanticCustomError("schema", message, context)


def _number(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise invalid(f"expected a number, got {type(value).__name__}")
    return float(value)


def _integer(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise invalid(f"expected an integer, got {type(value).__name__}")
    return value


def _rational(value: Any) -> Fraction:
    if isinstance(value, (bool, float)) or not isinstance(value, (int, str, list)):
        raise invalid("exact constants are integers, 'p/q' strings or [p, q] pairs")
    try:
        return exact.to_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise invalid(f"cannot read {value!r} as a rational: {e}")


def _complex(value: Any) -> complex:
    if isinstance(value, dict):
        return complex(_number(value.get("real", 0.0)), _number(value.get("imag", 0.0)))
    return complex(_number(value))


Number = Annotated[float, BeforeValidator(_number)]
Index = Annotated[int, BeforeValidator(_integer), Field(ge=0)]
Rational = Annotated[Any, BeforeValidator(_rational)]
ComplexNumber = Annotated[Any, BeforeValidator(_complex)]
Rows = List[List[Number]]


def check_matrices(matrices: Sequence[Sequence[Sequence[Any]]], size: int, member: str) -> None:
    """Every matrix must be ``size`` x ``size``."""
    for index, rows in enumerate(matrices):
        widths = {len(row) for row in rows}
        if len(widths) > 1:
            raise invalid(f"rows have different lengths {sorted(widths)}", member, index)
        shape = [len(rows), widths.pop() if widths else size]
        if shape != [size, size]:
            raise invalid(f"expected shape {[size, size]}, got {shape}", member, index)


def check_rows(rows: Sequence[Sequence[Any]], width: int, member: str) -> None:
    for index, row in enumerate(rows):
        if len(row) != width:
            raise invalid(f"expected {width} entries, got {len(row)}", member, index)


def as_array(matrices: Sequence[Sequence[Sequence[float]]], size: int) -> np.ndarray:
    return np.array(matrices, dtype=float).reshape(len(matrices), size, size)


# Algebras


class AlgebraModel(BaseModel):
    """Structure constants as ``[i, j, k, value]`` entries meaning ``c_ij^k = value``."""

    dim: Index
    c: List[Tuple[Index, Index, Index, Number]] = []
    labels: List[str] = []
    exact: Literal[False] = False

    @model_validator(mode="after")
    def check_constants(self) -> "AlgebraModel":
        if self.labels and len(self.labels) != self.dim:
            raise invalid(f"expected {self.dim} labels, got {len(self.labels)}", "labels")
        seen: Dict[Tuple[int, int, int], Any] = {}
        for index, (i, j, k, value) in enumerate(self.c):
            if max(i, j, k) >= self.dim:
                raise invalid(f"index {max(i, j, k)} out of range for dimension {self.dim}", "c", index)
            if i == j and value != 0:
                raise invalid(f"[e_{i}, e_{i}] must vanish, got coefficient {value} on e_{k}", "c", index)
            if (i, j, k) in seen:
                raise invalid(f"duplicate triple {[i, j, k]}", "c", index)
            mirror = seen.get((j, i, k))
            if mirror is not None and abs(mirror + value) > (0 if self.exact else 1e-10):
                message = f"conflicting explicit pair: c{[i, j, k]} = {value} but c{[j, i, k]} = {mirror}"
                raise invalid(message, "c", index)
            seen[(i, j, k)] = value
        return self


class ExactAlgebraModel(AlgebraModel):
    c: List[Tuple[Index, Index, Index, Rational]] = []  # type: ignore[assignment]
    exact: Literal[True]  # type: ignore[assignment]


def _constants_kind(value: Any) -> str:
    return EXACT_CONSTANTS if isinstance(value, dict) and value.get("exact") is True else NUMERIC_CONSTANTS


AlgebraField = Annotated[
    Union[Annotated[AlgebraModel, Tag(NUMERIC_CONSTANTS)], Annotated[ExactAlgebraModel, Tag(EXACT_CONSTANTS)]],
    Discriminator(_constants_kind),
]


# Compact and solvable parts


class CompactModel(BaseModel):
    """Torus generators (commuting, skew, ``exp(2 pi X) = 1``) plus component representatives."""

    rank: Index
    dim: Index
    generators: List[Rows] = []
    components: List[Rows] = []
    orthogonalize: bool = False

    @model_validator(mode="after")
    def check_shapes(self) -> "CompactModel":
        if self.rank == 0:
            if self.components:
                raise invalid("component generators need a torus of rank >= 1", "components")
            return self
        if len(self.generators) != self.rank:
            raise invalid(f"expected {self.rank} matrices, got {len(self.generators)}", "generators")
        check_matrices(self.generators, self.dim, "generators")
        check_matrices(self.components, self.dim, "components")
        return self


class SolvableModel(BaseModel):
    algebra: AlgebraField
    realization_dim: Annotated[Index, Field(ge=1)]
    realization: List[Rows]
    adapted_order: List[Index] = []

    @model_validator(mode="after")
    def check_realization(self) -> "SolvableModel":
        if len(self.realization) != self.algebra.dim:
            raise invalid(f"expected {self.algebra.dim} matrices, got {len(self.realization)}", "realization")
        check_matrices(self.realization, self.realization_dim, "realization")
        return self


class LayerDirectionsModel(BaseModel):
    layer: Index
    basis: Rows


# Presentations


class ActionModel(BaseModel):
    """Fields shared by presentations whose torus acts on an algebra."""

    name: str = ""
    compact: Optional[CompactModel] = None
    adjoint_action: Optional[List[Rows]] = None

    @property
    def acted_dim(self) -> int:
        raise NotImplementedError

    def check_action(self) -> None:
        if self.compact is None or self.compact.rank == 0:
            return
        if self.adjoint_action is None:
            if self.compact.dim != self.acted_dim:
                raise invalid("required when the torus does not act on the algebra", "adjoint_action")
            return
        if len(self.adjoint_action) != self.compact.rank:
            raise invalid(
                f"expected {self.compact.rank} matrices, got {len(self.adjoint_action)}", "adjoint_action"
            )
        check_matrices(self.adjoint_action, self.acted_dim, "adjoint_action")


class VectorPresentationModel(BaseModel):
    kind: Literal["vector_by_compact"]
    name: str = ""
    vector_dim: Index
    compact: Optional[CompactModel] = None


class SolvablePresentationModel(ActionModel):
    kind: Literal["solvable_by_compact"]
    solvable: SolvableModel

    @property
    def acted_dim(self) -> int:
        return self.solvable.algebra.dim

    @model_validator(mode="after")
    def check_adjoint_action(self) -> "SolvablePresentationModel":
        self.check_action()
        return self


class GeneralPresentationModel(ActionModel):
    kind: Literal["general"]
    algebra: AlgebraField
    semisimple: Optional[AlgebraField] = None
    radical: Optional[Rows] = None
    layer_compact_directions: List[LayerDirectionsModel] = []

    @property
    def acted_dim(self) -> int:
        return self.algebra.dim

    @model_validator(mode="after")
    def check_subspaces(self) -> "GeneralPresentationModel":
        if self.radical is not None:
            check_rows(self.radical, self.acted_dim, "radical")
        for index, entry in enumerate(self.layer_compact_directions):
            check_rows(entry.basis, self.acted_dim, f"layer_compact_directions[{index}].basis")
        self.check_action()
        return self


PresentationModel = Annotated[
    Union[VectorPresentationModel, SolvablePresentationModel, GeneralPresentationModel],
    Field(discriminator="kind"),
]


class DocumentModel(BaseModel):
    """A presentation wrapped with a name; gallery entries add ``description`` and ``expect``."""

    name: str = ""
    presentation: PresentationModel


class DeltaProblemModel(BaseModel):
    presentation: PresentationModel
    automorphism: Rows
    target: List[Number]

    @model_validator(mode="after")
    def check_dimensions(self) -> "DeltaProblemModel":
        if not isinstance(self.presentation, SolvablePresentationModel):
            raise invalid("solve-delta needs a solvable_by_compact presentation", "presentation.kind")
        n = self.presentation.acted_dim
        check_matrices([self.automorphism], n, "automorphism")
        if len(self.target) != n:
            raise invalid(f"expected {n} entries, got {len(self.target)}", "target")
        return self


class LocalModel(BaseModel):
    """Centre and radius of a local density estimate; ``t`` has one entry per torus coordinate."""

    translation: List[Number]
    t: List[Number]
    component: Optional[Index] = None
    radius: Number

    @field_validator("t")
    @classmethod
    def check_torus_coordinates(cls, t: List[float], info: ValidationInfo) -> List[float]:
        rank = (info.context or {}).get("torus_rank")
        if rank is not None and len(t) != rank:
            raise invalid(f"expected {rank} entries, got {len(t)}")
        return t


class PowerFamilyModel(BaseModel):
    """Either explicit complex ``matrices`` or the tilted-line family from ``n``, ``thetas`` and ``tilts``."""

    matrices: Optional[List[List[List[ComplexNumber]]]] = None
    n: Optional[Annotated[Index, Field(ge=2)]] = None
    thetas: List[Number] = []
    tilts: List[Number] = []

    @model_validator(mode="after")
    def check_family(self) -> "PowerFamilyModel":
        if self.matrices is not None:
            if not self.matrices:
                raise invalid("expected a non-empty list of matrices", "matrices")
            if not all(self.matrices):
                raise invalid("matrices must be non-empty", "matrices")
            sizes = {len(rows) for rows in self.matrices}
            if len(sizes) > 1:
                raise invalid(f"matrices have different sizes {sorted(sizes)}", "matrices")
            check_matrices(self.matrices, sizes.pop(), "matrices")
        elif self.n is None:
            raise invalid("either matrices or n, thetas and tilts are required", "n")
        return self


# Loader


class PresentationLoader(LoggerMixin):
    """Validates JSON documents and builds presentation objects from them."""

    def __init__(self, text: str = "", source: str = "<input>", quadrature_points: int = 64):
        self.text = text
        self.source = source
        self.quadrature_points = quadrature_points

    # Diagnostics

    def line_of(self, path: str) -> Optional[int]:
        """First line mentioning the last key of ``path``, if any."""
        key = path.split(".")[-1].split("[")[0]
        if not key or not self.text:
            return None
        needle = f'"{key}"'
        for number, line in enumerate(self.text.splitlines(), start=1):
            if needle in line:
                return number
        return None

    def error(self, path: str, message: str) -> SchemaError:
        return SchemaError(path, message, self.line_of(path))

    def schema_error(self, e: ValidationError, prefix: str) -> SchemaError:
        """The first pydantic error as a SchemaError with a dotted field path."""
        first = e.errors()[0]
        path = field_path(prefix, first["loc"], first.get("ctx") or {})
        if first["type"] in ("union_tag_invalid", "union_tag_not_found"):
            path = f"{path}.kind" if path else "kind"
            return self.error(path, f"unknown or missing kind; expected one of {list(KINDS)}")
        return self.error(path, first["msg"])

    def validate(self, adapter: Any, data: Any, prefix: str, context: Optional[Dict[str, Any]] = None) -> Any:
        try:
            return adapter.model_validate(data, context=context)
        except ValidationError as e:
            raise self.schema_error(e, prefix)

    # Builders

    def algebra(self, obj: Any, path: str = "algebra") -> LieAlgebra:
        return self.build_algebra(self.validate(_ALGEBRA, obj, path), path)

    def build_algebra(self, model: AlgebraModel, path: str) -> LieAlgebra:
        try:
            return LieAlgebra.from_triples(model.dim, model.c, labels=model.labels, exact_mode=model.exact)
        except (MalformedTensor, ValueError, ZeroDivisionError) as e:
            raise self.error(f"{path}.c", str(e))

    def build_compact(self, model: Optional[CompactModel], path: str) -> Optional[CompactPartPresentation]:
        if model is None or model.rank == 0:
            return None
        generators = as_array(model.generators, model.dim)
        components = list(as_array(model.components, model.dim))
        if model.orthogonalize:
            generators, s = orthogonalize_generators(generators, self.quadrature_points)
            s_inv = np.linalg.inv(s)
            components = [s @ g @ s_inv for g in components]
            self.logger.info(f"{path}: orthogonalized {model.rank} torus generators")
        return CompactPartPresentation(TorusRep(generators), tuple(components))

    def build_solvable(self, model: SolvableModel, path: str) -> SolvablePresentation:
        algebra = self.build_algebra(model.algebra, f"{path}.algebra")
        realization = as_array(model.realization, model.realization_dim)
        return SolvablePresentation(algebra, realization, tuple(model.adapted_order))

    def build_presentation(self, model: Any, path: str, name: str = "") -> GroupPresentation:
        compact = self.build_compact(model.compact, f"{path}.compact")
        fields: Dict[str, Any] = {"kind": model.kind, "compact": compact, "name": model.name or name}

        if isinstance(model, VectorPresentationModel):
            return GroupPresentation(vector_dim=model.vector_dim, **fields)

        if isinstance(model, SolvablePresentationModel):
            fields["solvable"] = self.build_solvable(model.solvable, f"{path}.solvable")
        else:
            fields["algebra"] = self.build_algebra(model.algebra, f"{path}.algebra")
            if model.semisimple is not None:
                fields["semisimple_part"] = self.build_algebra(model.semisimple, f"{path}.semisimple")
            if model.radical is not None:
                fields["radical"] = self.subspace(model.radical, model.acted_dim)
            fields["layer_compact_directions"] = {
                entry.layer: self.subspace(entry.basis, model.acted_dim) for entry in model.layer_compact_directions
            }

        if compact is not None:
            if model.adjoint_action is not None:
                fields["adjoint_action"] = as_array(model.adjoint_action, model.acted_dim)
            else:
                fields["adjoint_action"] = compact.torus.generators
        return GroupPresentation(**fields)

    @staticmethod
    def subspace(rows: Rows, ambient_dim: int) -> Subspace:
        return Subspace(ambient_dim, np.array(rows, dtype=float).reshape(len(rows), ambient_dim))

    # Documents

    def document(self, data: Any) -> GroupPresentation:
        """A bare presentation or a wrapper object with a ``presentation`` field."""
        if isinstance(data, dict) and "presentation" in data:
            wrapper = self.validate(DocumentModel, data, "")
            return self.build_presentation(wrapper.presentation, "presentation", wrapper.name)
        model = self.validate(_PRESENTATION, data, "presentation")
        return self.build_presentation(model, "presentation")

    def delta_problem(self, data: Any) -> Tuple[SolvablePresentation, AlgebraAutomorphism, GroupElement]:
        model = self.validate(DeltaProblemModel, data, "")
        presentation = self.build_presentation(model.presentation, "presentation")
        solvable = presentation.solvable
        phi = AlgebraAutomorphism(np.array(model.automorphism, dtype=float))
        return solvable, phi, element(solvable, np.array(model.target))  # type: ignore[arg-type]

    def local_center(self, data: Any, presentation: GroupPresentation) -> Optional[Tuple[SemidirectElement, float]]:
        """Optional ``local`` block: centre element and radius for a local density estimate."""
        local = data.get("local") if isinstance(data, dict) else None
        if local is None:
            return None
        model = self.validate(LocalModel, local, "local", {"torus_rank": presentation.torus_rank})
        center = SemidirectElement(np.array(model.translation), np.array(model.t), model.component)
        return center, model.radius

    def power_family(self, data: Any) -> Tuple[List[np.ndarray], List[str]]:
        model = self.validate(PowerFamilyModel, data, "")
        if model.matrices is not None:
            family = [np.array(rows, dtype=complex) for rows in model.matrices]
            return family, [str(i) for i in range(len(family))]
        family, labels = [], []
        for theta in model.thetas:
            for tilt in model.tilts:
                family.append(tilted_line_operator(model.n, np.exp(2j * np.pi * theta), tilt))  # type: ignore[arg-type]
                labels.append(f"theta={theta:g},tilt={tilt:g}")
        return family, labels


class _Adapter:
    """``model_validate`` for annotated unions, matching the BaseModel interface."""

    def __init__(self, annotation: Any):
        self.adapter: TypeAdapter = TypeAdapter(annotation)

    def model_validate(self, data: Any, context: Optional[Dict[str, Any]] = None) -> Any:
        return self.adapter.validate_python(data, context=context)


_ALGEBRA = _Adapter(AlgebraField)
_PRESENTATION = _Adapter(PresentationModel)


def field_path(prefix: str, loc: Sequence[Union[str, int]], ctx: Dict[str, Any]) -> str:
    """Dotted path from a pydantic error location, skipping union tags."""
    path = prefix
    for item in loc:
        if isinstance(item, int):
            path = f"{path}[{item}]" if path else f"$[{item}]"
        elif item not in _TAGS:
            path = f"{path}.{item}" if path else str(item)
    if ctx.get("member"):
        path = f"{path}.{ctx['member']}" if path else ctx["member"]
    if ctx.get("index") is not None:
        path = f"{path}[{ctx['index']}]"
    return path or "$"


def read_json(path: Union[str, Path]) -> Tuple[Any, str]:
    """Load a JSON file, returning the parsed data and the raw text."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}", {"path": str(path)})
    try:
        return json.loads(text), text
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON: {e.msg}", e.lineno)


def load_presentation(path: Union[str, Path], quadrature_points: int = 64) -> GroupPresentation:
    data, text = read_json(path)
    return PresentationLoader(text, str(path), quadrature_points).document(data)


def parse_presentation(data: Any, text: str = "") -> GroupPresentation:
    return PresentationLoader(text).document(data)


__all__ = [
    "AlgebraModel",
    "CompactModel",
    "DeltaProblemModel",
    "DocumentModel",
    "PowerFamilyModel",
    "PresentationLoader",
    "SolvableModel",
    "field_path",
    "load_presentation",
    "parse_presentation",
    "read_json",
]
