"""
Formulas, parametrized tableaux and quantifier elimination.
"""

from .elimination import decide, eliminate_all, eliminate_one
from .line_set import decompose_line_set
from .parser import parse_formula

__all__ = ["parse_formula", "eliminate_one", "eliminate_all", "decide", "decompose_line_set"]
