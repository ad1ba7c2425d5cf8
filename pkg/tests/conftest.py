"""
Pytest configuration and fixtures for the rcvf kernel.
"""

from collections.abc import Callable

import pytest
from typer.testing import CliRunner

from qe.parser import parse_kpolys
from rcvf.ovf_core import KPoly, OvfElem


@pytest.fixture
def kpoly() -> Callable[[str], KPoly]:
    """Build a ground polynomial over K from text such as 'x^2 - t'."""

    def build(text: str) -> KPoly:
        return parse_kpolys([text])[0]

    return build


@pytest.fixture
def t() -> OvfElem:
    """The infinitesimal generator of K."""
    return OvfElem.t()


@pytest.fixture
def sqrt_t_poly() -> KPoly:
    """X^2 - t, whose real roots are -sqrt(t) and sqrt(t)."""
    return KPoly.of([-OvfElem.t(), 0, 1])


@pytest.fixture
def two_roots_poly() -> KPoly:
    """X^2 - (1 + t)X + t = (X - t)(X - 1)."""
    return KPoly.of([OvfElem.t(), -(OvfElem.t() + 1), 1])


@pytest.fixture
def runner() -> CliRunner:
    """Typer test runner."""
    return CliRunner()
