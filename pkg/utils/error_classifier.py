"""
Error classification for command-line runs.

Maps kernel exceptions to a classification and a process exit code, and
keeps per-run statistics so batch invocations can report what failed.
"""

from typing import Any

from rcvf.errors import (
    DomainError,
    GuardExceeded,
    InputError,
    InternalError,
    OracleError,
    RcvfError,
)
from utils.logger import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_DOMAIN = 3
EXIT_ORACLE = 4


def classify_error(error: BaseException) -> str:
    """
    Classify an exception raised while running a command.

    Args:
        error: The exception to classify

    Returns:
        Error classification string
    """
    if isinstance(error, InputError):
        return "INPUT_ERROR"
    if isinstance(error, GuardExceeded):
        return "GUARD_EXCEEDED"
    if isinstance(error, DomainError):
        return "DOMAIN_ERROR"
    if isinstance(error, OracleError):
        return "ORACLE_FAILURE"
    if isinstance(error, InternalError):
        return "INTERNAL_ERROR"
    if isinstance(error, RcvfError):
        return "KERNEL_ERROR"
    # ZeroDivisionError and friends escaping the kernel are bugs
    return "UNKNOWN_ERROR"


def get_exit_strategy(classification: str) -> dict[str, Any]:
    """
    Exit code and reporting policy for a classification.

    Args:
        classification: The classified error type

    Returns:
        Strategy with the exit code and whether a traceback is useful
    """
    strategies = {
        "INPUT_ERROR": {"exit_code": EXIT_INPUT, "show_traceback": False},
        "GUARD_EXCEEDED": {"exit_code": EXIT_DOMAIN, "show_traceback": False},
        "DOMAIN_ERROR": {"exit_code": EXIT_DOMAIN, "show_traceback": False},
        "ORACLE_FAILURE": {"exit_code": EXIT_ORACLE, "show_traceback": False},
        "INTERNAL_ERROR": {"exit_code": EXIT_INTERNAL, "show_traceback": True},
        "KERNEL_ERROR": {"exit_code": EXIT_INTERNAL, "show_traceback": True},
        "UNKNOWN_ERROR": {"exit_code": EXIT_INTERNAL, "show_traceback": True},
    }
    return strategies.get(classification, strategies["UNKNOWN_ERROR"])


def exit_code_for(error: BaseException) -> int:
    return int(get_exit_strategy(classify_error(error))["exit_code"])


class ErrorClassifier:
    """
    Error classifier with statistics.
    """

    def __init__(self) -> None:
        self.error_counts: dict[str, int] = {}
        self.total_errors = 0

    def classify_and_log(self, error: BaseException) -> str:
        """
        Classify error and log statistics.

        Args:
            error: The exception to classify

        Returns:
            Error classification
        """
        classification = classify_error(error)

        self.error_counts[classification] = self.error_counts.get(classification, 0) + 1
        self.total_errors += 1

        if self.error_counts[classification] == 1:
            logger.info("New error classification", classification=classification, error=str(error))
        elif self.error_counts[classification] % 10 == 0:
            logger.warning(
                "Repeated error classification",
                classification=classification,
                count=self.error_counts[classification],
            )

        return classification

    def get_error_stats(self) -> dict[str, Any]:
        """Get error classification statistics."""
        return {
            "total_errors": self.total_errors,
            "error_counts": self.error_counts.copy(),
            "error_distribution": {
                error_type: count / self.total_errors
                for error_type, count in self.error_counts.items()
            }
            if self.total_errors > 0
            else {},
        }

    def reset_stats(self) -> None:
        """Reset error statistics."""
        self.error_counts.clear()
        self.total_errors = 0
