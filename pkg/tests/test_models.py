#!/usr/bin/env python3
"""
Tests for command result models.
"""

import orjson
import pytest
from pydantic import ValidationError

from models.results import (
    RESULT_MODELS,
    DecideResult,
    GtfResult,
    NewtonResult,
    OracleCheck,
    OracleReport,
    ValuationResult,
    dump_json,
    gamma_text,
    result_schemas,
)
from rcvf.ovf_core import INF, GammaVal


class TestResultModels:
    """Test result model validation."""

    def test_newton_result(self):
        """Test a valid Newton result."""
        result = NewtonResult(
            polynomial="X^2 + (-t)",
            vertices=[(0, "1"), (2, "0")],
            root_valuations=[("1/2", 2)],
        )
        assert result.root_valuations == [("1/2", 2)]

    def test_models_are_frozen(self):
        """Test that results cannot be mutated."""
        result = DecideResult(formula="true", value=True)
        with pytest.raises(ValidationError):
            result.value = False

    def test_unknown_fields_are_rejected(self):
        """Test extra fields raise."""
        with pytest.raises(ValidationError):
            DecideResult(formula="true", value=True, note="extra")

    def test_gtf_pattern_validation(self):
        """Test that patterns only use + and -."""
        with pytest.raises(ValidationError):
            GtfResult(degree=1, pattern="0", endpoints="a", h=[], slopes=[], identity="")

    def test_valuation_result_needs_positive_n(self):
        """Test the n >= 1 constraint."""
        with pytest.raises(ValidationError):
            ValuationResult(polynomial="X", sigma="", n=0, a="1", value="inf")

    def test_oracle_failures(self):
        """Test the failures view of a report."""
        report = OracleReport(
            task="newton",
            t0_exponents=[16],
            checks=[
                OracleCheck(quantity="real root 0", symbolic="1", verdict=True),
                OracleCheck(quantity="real root 1", symbolic="0", verdict=False),
            ],
            passed=False,
        )
        assert [c.quantity for c in report.failures] == ["real root 1"]


class TestJsonOutput:
    """Test JSON serialization."""

    def test_gamma_text(self):
        """Test valuation rendering."""
        assert gamma_text(INF) == "inf"
        assert gamma_text(GammaVal.of("3/2")) == "3/2"
        assert gamma_text(GammaVal.of(-1)) == "-1"

    def test_dump_is_sorted_and_stable(self):
        """Test that output is byte deterministic."""
        result = DecideResult(formula="exists x. x > 0", value=True)
        first = dump_json(result)
        assert first == dump_json(result)
        assert first.index('"formula"') < first.index('"value"')
        assert orjson.loads(first) == {"formula": "exists x. x > 0", "value": True}

    def test_dump_plain_dict(self):
        """Test dumping a plain dictionary."""
        assert orjson.loads(dump_json({"b": 1, "a": [2]})) == {"a": [2], "b": 1}

    def test_schemas(self):
        """Test that every command has a JSON schema."""
        schemas = result_schemas()
        assert set(schemas) == set(RESULT_MODELS)
        assert "value" in schemas["decide"]["properties"]
