"""Strict JSON schemas for command inputs and emitted results.

Every document carries ``"spec_version": 1``; unknown fields are rejected so
format drift fails loudly.  Validated models convert to library objects
through the ``from_dict`` constructors of the respective classes.
"""

import json
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .exceptions import SchemaError

SPEC_VERSION = 1


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=False)


class Versioned(Strict):
    spec_version: Literal[1]


# ---------------------------------------------------------------- value functions


class DecisionSchema(Strict):
    kind: Literal["decision"]
    payoffs: list[list[float]]
    label: Optional[str] = None


class EntropySchema(Strict):
    kind: Literal["entropy"]
    label: Optional[str] = None


class IndicatorSchema(Strict):
    kind: Literal["indicator"]
    threshold: float
    coordinate: int = 1
    label: Optional[str] = None


class PwlSchema(Strict):
    kind: Literal["pwl"]
    breakpoints: list[float]
    values: list[float]
    coordinate: int = 1
    label: Optional[str] = None


class TableSchema(Strict):
    kind: Literal["table"]
    n_states: int
    resolution: int
    values: list[float]
    label: Optional[str] = None


class CombinationSchema(Strict):
    kind: Literal["combination"]
    coefs: list[float]
    funcs: list["ValueFunctionSchema"]
    offset: float = 0.0
    label: Optional[str] = None


ValueFunctionSchema = Annotated[
    Union[DecisionSchema, EntropySchema, IndicatorSchema, PwlSchema, TableSchema, CombinationSchema],
    Field(discriminator="kind"),
]
CombinationSchema.model_rebuild()


# ---------------------------------------------------------------- objectives and constraints


class LinearSchema(Strict):
    kind: Literal["linear"]
    coef: list[float]
    const: float = 0.0


class QuadraticSchema(Strict):
    kind: Literal["quadratic"]
    A: list[list[float]]
    b: list[float]
    c: float = 0.0


class ExpressionSchema(Strict):
    kind: Literal["custom-expression"]
    expr: str


ObjectiveSchema = Annotated[Union[LinearSchema, QuadraticSchema, ExpressionSchema], Field(discriminator="kind")]


class NoConstraint(Strict):
    kind: Literal["none"]


class TailConstraint(Strict):
    kind: Literal["nonneg-tail"]
    m: int = Field(ge=0)


class SublevelConstraint(Strict):
    kind: Literal["sublevel"]
    g: ObjectiveSchema


ConstraintSchema = Annotated[Union[NoConstraint, TailConstraint, SublevelConstraint], Field(discriminator="kind")]


class CostSchema(Strict):
    linear: float = 0.0
    quadratic: float = 0.0


# ---------------------------------------------------------------- command inputs

Resolution = Field(default=None, ge=1)


class CavInput(Versioned):
    mu: list[float]
    value_function: ValueFunctionSchema
    resolution: Optional[int] = Resolution


class SetInput(Versioned):
    mu: list[float]
    vfuncs: list[ValueFunctionSchema] = Field(min_length=1)
    directions: Optional[int] = Field(default=None, ge=2)
    resolution: Optional[int] = Resolution


class SolveInput(Versioned):
    mu: list[float]
    vfuncs: list[ValueFunctionSchema] = Field(min_length=1)
    objective: ObjectiveSchema
    constraint: ConstraintSchema = NoConstraint(kind="none")
    method: Literal["auto", "generic", "smooth", "slack", "convex"] = "auto"
    directions: Optional[int] = Field(default=None, ge=2)
    resolution: Optional[int] = Resolution


class ProfileInput(Versioned):
    vfuncs: list[ValueFunctionSchema] = Field(min_length=1)
    objective: ObjectiveSchema
    constraint: ConstraintSchema = NoConstraint(kind="none")
    priors: Optional[list[list[float]]] = None
    n_priors: Optional[int] = Field(default=None, ge=2)
    directions: Optional[int] = Field(default=None, ge=2)
    resolution: Optional[int] = Resolution


class BellmanInput(Versioned):
    F: ValueFunctionSchema
    H: Optional[ValueFunctionSchema] = None
    cost: CostSchema = CostSchema()
    discount: float = Field(default=0.9, gt=0.0, lt=1.0)
    capacity: Optional[float] = Field(default=None, ge=0.0)
    resolution: Optional[int] = Resolution
    n_states: int = Field(default=2, ge=2)
    tol: Optional[float] = Field(default=None, gt=0.0)
    max_iter: int = Field(default=10000, ge=1)
    start: Literal["F", "cav"] = "F"


class RIInput(Versioned):
    F: ValueFunctionSchema
    H: Optional[ValueFunctionSchema] = None
    cost: CostSchema
    mu: list[float]
    resolution: Optional[int] = Resolution


class VotersInput(Versioned):
    mu: float
    m: int
    thresholds: list[float]
    utilities: list[ValueFunctionSchema]
    costs: Optional[list[float]] = None
    oracle_resolution: int = Field(default=200, ge=2)


class ScreenInput(Versioned):
    mu: list[float]
    decision_utilities: list[ValueFunctionSchema]
    sender_values: list[ValueFunctionSchema]
    type_probs: list[float]
    atoms_cap: Optional[int] = Field(default=None, ge=1)
    starts: int = Field(default=16, ge=0)
    resolution: Optional[int] = Resolution


INPUT_SCHEMAS = {
    "cav": CavInput,
    "set": SetInput,
    "solve": SolveInput,
    "profile": ProfileInput,
    "bellman": BellmanInput,
    "ri": RIInput,
    "voters": VotersInput,
    "screen": ScreenInput,
}


# ---------------------------------------------------------------- outputs


class StructureSchema(Strict):
    weights: list[float]
    posteriors: list[list[float]]


class SolutionSchema(Versioned):
    command: Optional[str] = None
    value: float
    v_star: list[float]
    structure: StructureSchema
    multipliers: Optional[dict[str, Union[float, list[float]]]] = None
    diagnostics: dict[str, Any]


class VotersSolutionSchema(SolutionSchema):
    selected: list[int]
    mu_star: float


SOLUTION_SCHEMAS = {"voters": VotersSolutionSchema}


# ---------------------------------------------------------------- helpers


def _describe(err):
    parts = []
    for e in err.errors()[:5]:
        loc = ".".join(str(x) for x in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def parse_input(command, text):
    """Validate raw JSON ``text`` for ``command``; returns a plain dict.

    Raises
    ------
    SchemaError
        On malformed JSON, a wrong version, missing or unknown fields.
    """
    if command not in INPUT_SCHEMAS:
        raise SchemaError(f"unknown command {command!r}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise SchemaError("top-level JSON value must be an object")
    try:
        model = INPUT_SCHEMAS[command].model_validate(raw)
    except ValidationError as exc:
        raise SchemaError(_describe(exc)) from None
    return model.model_dump()


def validate_solution(data):
    """Check an emitted solution document; returns the validated model.

    The schema is chosen by the document's ``command`` field; ``voters``
    results carry the selected voters and the high posterior as well.
    """
    schema = SOLUTION_SCHEMAS.get(data.get("command"), SolutionSchema)
    try:
        return schema.model_validate(data)
    except ValidationError as exc:
        raise SchemaError(_describe(exc)) from None


def dumps(data):
    """Deterministic JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"
