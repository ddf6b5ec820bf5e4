#!/usr/bin/env python3
"""
Errors and Check Reports

Exception hierarchy for the lab plus the report types returned by property checks.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional


class FreqLabError(Exception):
    """Base class for every error raised by freqlab"""


class InputError(FreqLabError, ValueError):
    """Arguments violate an operation's preconditions"""


class AdmissibilityError(FreqLabError, ValueError):
    """A digit word is not admissible for the system (empty cylinder)"""

    def __init__(self, message: str, word: Optional[tuple] = None):
        super().__init__(message)
        self.word = word


class PrecisionError(FreqLabError, ArithmeticError):
    """A certified decision could not be made at the precision ceiling"""

    def __init__(self, message: str, index: Optional[int] = None, precision: Optional[int] = None):
        super().__init__(message)
        self.index = index
        self.precision = precision


class NonTerminatingError(FreqLabError):
    """The greedy expansion of 1 did not terminate within max_k digits"""

    def __init__(self, message: str, digits: tuple = ()):
        super().__init__(message)
        self.digits = digits


class ResourceError(FreqLabError):
    """A work budget was exhausted; diagnostics describe the partial result"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CheckStatus(Enum):
    """Outcome of a property check"""
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass
class CheckReport:
    """Result of a property check with its measured values"""
    name: str
    status: CheckStatus
    values: Dict[str, Any] = field(default_factory=dict)
    errors: List[str] = None
    warnings: List[str] = None

    def __post_init__(self):
        if self.errors is None:
            self.errors = []
        if self.warnings is None:
            self.warnings = []

    @property
    def is_violation(self) -> bool:
        return self.status is CheckStatus.FAIL
