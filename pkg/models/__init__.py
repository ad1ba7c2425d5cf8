"""
Models package for command results.
"""

from .results import (
    RESULT_MODELS,
    CaseTreeResult,
    DecideResult,
    GtfResult,
    LineSetResult,
    MTableauResult,
    NewtonResult,
    OracleBatchResult,
    OracleCheck,
    OracleReport,
    QeResult,
    ResultModel,
    TableauResult,
    ValuationResult,
    VscTableauResult,
    dump_json,
    result_schemas,
)

__all__ = [
    "ResultModel",
    "NewtonResult",
    "GtfResult",
    "TableauResult",
    "ValuationResult",
    "VscTableauResult",
    "MTableauResult",
    "LineSetResult",
    "QeResult",
    "DecideResult",
    "CaseTreeResult",
    "OracleCheck",
    "OracleReport",
    "OracleBatchResult",
    "RESULT_MODELS",
    "dump_json",
    "result_schemas",
]
