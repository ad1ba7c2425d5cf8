"""
Result models for every command of the rcvf command line.

Rationals and valuations are carried as strings ("3/2", "inf") so that JSON
output stays exact.
"""

from typing import Any

import orjson
from pydantic import BaseModel, ConfigDict, Field, field_validator

from rcvf.ovf_core import GammaVal

SIGN_MARKS = {1: "+", 0: "0", -1: "-"}


def gamma_text(v: GammaVal) -> str:
    return "inf" if v.is_inf else str(v.finite)


class ResultModel(BaseModel):
    """Base for command results: immutable, no unknown fields."""

    model_config = ConfigDict(frozen=True, extra="forbid")


class NewtonResult(ResultModel):
    polynomial: str = Field(..., description="Input polynomial")
    vertices: list[tuple[int, str]] = Field(
        ..., description="Lower hull vertices as (degree, valuation of the coefficient)"
    )
    root_valuations: list[tuple[str, int]] = Field(
        ..., description="Root valuations with multiplicities, +inf first then decreasing"
    )


class GtfResult(ResultModel):
    degree: int = Field(..., ge=1, description="Degree d of the identity")
    pattern: str = Field(..., description="Signs of P^(1..d) on the interval, as +/- characters")
    endpoints: str = Field(..., description="Endpoint taken by each divided derivative (a or b)")
    h: list[tuple[int, int, int, int]] = Field(
        ..., description="Coefficients of H_k as (k, exponent of e1, exponent of e2, coefficient)"
    )
    slopes: list[int] = Field(..., description="Per-term slopes in the local valuation parameter")
    identity: str = Field(..., description="Identity in text form")

    @field_validator("pattern")
    @classmethod
    def validate_pattern(cls, v: str) -> str:
        if any(ch not in "+-" for ch in v):
            raise ValueError(f"pattern must use + and -: {v!r}")
        return v


class RootCodeModel(ResultModel):
    poly_index: int = Field(..., description="Family member the root belongs to")
    polynomial: str = Field(..., description="Monic polynomial of the Thom code")
    sigma: str = Field(..., description="Signs of the derivatives at the root")


class TableauResult(ResultModel):
    polys: list[str] = Field(..., description="Members of the closed family, by degree")
    roots: list[RootCodeModel] = Field(..., description="Roots from left to right")
    point_signs: list[list[int]] = Field(..., description="Sign of member j at root k")
    interval_signs: list[list[int]] = Field(
        ..., description="Sign of member j on interval k (between roots k-1 and k)"
    )


class ValuationResult(ResultModel):
    polynomial: str = Field(..., description="Polynomial of the coded root")
    sigma: str = Field(..., description="Thom code signs")
    n: int = Field(..., ge=1, description="Positive integer with n v(x) = v(a)")
    a: str = Field(..., description="Element a of K")
    value: str = Field(..., description="v(x) as a rational or inf")


class VscTableauResult(TableauResult):
    root_vals: list[list[str]] = Field(..., description="v(F_j(x_k)) for member j at root k")
    gap_vals: list[str] = Field(..., description="v(x_(k+1) - x_k)")
    interval_valuations: list[list[str]] = Field(
        ..., description="v(F_j(x)) on interval k as a min of affine pieces in the local scale"
    )
    cross_check: list[str] = Field(
        default_factory=list, description="Disagreements between RCVF1 and the tableau values"
    )


class PieceModel(ResultModel):
    low: str | None = Field(None, description="Lower end of the scale range, null for -inf")
    high: str | None = Field(None, description="Upper end of the scale range, null for +inf")
    form_signs: list[int | None] = Field(
        ..., description="Sign of each form on the piece, null when undefined"
    )


class SideModel(ResultModel):
    variable: str = Field(..., description="Local scale of the side (tau1, tau2 or tau)")
    cuts: list[str] = Field(..., description="Cut values of the scale")
    pieces: list[PieceModel] = Field(..., description="Pieces in increasing order of the scale")


class IntervalPartitionModel(ResultModel):
    index: int = Field(..., ge=0, description="Interval index of the base tableau")
    sides: list[SideModel]
    middle: list[int | None] | None = Field(
        None, description="Form signs where both scales vanish (bounded intervals only)"
    )


class MTableauResult(ResultModel):
    base: VscTableauResult
    forms: list[list[int]] = Field(..., description="Integer forms, one coefficient per member")
    point_form_signs: list[list[int | None]] = Field(..., description="Form signs at each root")
    intervals: list[IntervalPartitionModel]


class LinePieceModel(ResultModel):
    piece: str = Field(..., description="Point or (<,⪯)-interval")
    satisfied: bool = Field(..., description="Whether the description holds on the piece")


class LineSetResult(ResultModel):
    description: str
    points: list[str] = Field(..., description="Thom codes of the isolated points of the set")
    intervals: list[str] = Field(..., description="(<,⪯)-intervals of the set, left to right")
    partition: list[LinePieceModel] = Field(..., description="Every piece of the line")


class QeResult(ResultModel):
    formula: str = Field(..., description="Input formula")
    result: str = Field(..., description="Equivalent quantifier-free formula")
    ast: dict[str, Any] = Field(..., description="Result as a JSON syntax tree")


class DecideResult(ResultModel):
    formula: str
    value: bool = Field(..., description="Truth value of the closed formula")


class CaseTreeResult(ResultModel):
    variable: str
    leaf_count: int = Field(..., ge=0)
    tree: dict[str, Any] = Field(..., description="Branch queries and leaves")


class OracleCheck(ResultModel):
    quantity: str = Field(..., description="What was checked")
    symbolic: str = Field(..., description="Exact value")
    estimates: dict[str, str] = Field(
        default_factory=dict, description="Numeric estimate per specialization exponent"
    )
    deviation: float | None = Field(None, description="Largest absolute exponent deviation")
    verdict: bool = Field(..., description="True when the check passed")


class OracleReport(ResultModel):
    task: str
    t0_exponents: list[int] = Field(..., description="Exponents e with t0 = 2^-e")
    checks: list[OracleCheck]
    passed: bool

    @property
    def failures(self) -> list[OracleCheck]:
        return [c for c in self.checks if not c.verdict]


class OracleBatchResult(ResultModel):
    task: str
    seed: int = Field(..., description="Seed of the random sample")
    reports: list[OracleReport]
    error_stats: dict[str, Any] = Field(
        default_factory=dict, description="Classified errors raised while checking"
    )
    passed: bool


RESULT_MODELS: dict[str, type[ResultModel]] = {
    "newton": NewtonResult,
    "gtf": GtfResult,
    "tableau": TableauResult,
    "val-of-root": ValuationResult,
    "vsc-tableau": VscTableauResult,
    "m-tableau": MTableauResult,
    "line-set": LineSetResult,
    "qe": QeResult,
    "decide": DecideResult,
    "case-tree": CaseTreeResult,
    "oracle": OracleReport,
    "oracle-batch": OracleBatchResult,
}


def dump_json(payload: BaseModel | dict[str, Any]) -> str:
    """Byte-deterministic JSON for a result."""
    data = payload.model_dump(mode="json") if isinstance(payload, BaseModel) else payload
    return orjson.dumps(data, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS).decode()


def result_schemas() -> dict[str, dict[str, Any]]:
    return {name: model.model_json_schema() for name, model in RESULT_MODELS.items()}
