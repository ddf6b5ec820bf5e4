#!/usr/bin/env python3
"""
Input Models

Pydantic models for system description files and experiment manifests.
"""

from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

import settings
from numeric import as_fraction

NumberText = Union[int, str]

OPERATIONS = (
    'expand', 'synthesize', 'beta_one', 'admissible', 'cylinder', 'ratio',
    'freqset', 'measure', 'comparison', 'scan',
    'dimension_oracle', 'estimate', 'scaling', 'q_constant', 'witness', 'intersect', 'condition_ii',
)


class LinearSystemSpec(BaseModel):
    """Full-branch piecewise-linear map given by its branch lengths"""
    model_config = ConfigDict(extra='forbid')

    type: Literal['linear']
    name: Optional[str] = None
    branches: List[NumberText] = Field(min_length=2, description="Branch lengths, summing to 1")

    @field_validator('branches')
    def validate_branches(cls, v):
        """Branch lengths must be positive rationals"""
        for value in v:
            if as_fraction(value) <= 0:
                raise ValueError(f"branch length must be positive, got {value}")
        return v


class BetaPolynomialSpec(BaseModel):
    """Algebraic beta: integer polynomial plus an isolating interval"""
    model_config = ConfigDict(extra='forbid')

    type: Literal['beta']
    name: Optional[str] = None
    polynomial: List[NumberText] = Field(min_length=2, description="Coefficients, leading first")
    isolating: List[str] = Field(min_length=2, max_length=2, description="Rational endpoints lo, hi")


class BetaValueSpec(BaseModel):
    """beta given only as a decimal value"""
    model_config = ConfigDict(extra='forbid')

    type: Literal['beta']
    name: Optional[str] = None
    value: str = Field(description="Decimal value of beta")
    precision_bits: int = Field(default=settings.PRECISION_BITS, ge=16, description="Error radius is 2^-precision_bits")

    @field_validator('value')
    def validate_value(cls, v):
        """Value must parse as a rational"""
        as_fraction(v)
        return v


SystemSpec = Union[LinearSystemSpec, BetaPolynomialSpec, BetaValueSpec]


class ExperimentManifest(BaseModel):
    """One reproducible run: systems, an operation, its parameters, the seed and output paths"""
    model_config = ConfigDict(extra='forbid')

    version: Literal[1]
    systems: Dict[str, Union[str, SystemSpec]] = Field(min_length=1, description="Named systems or preset names")
    operation: Literal[OPERATIONS]
    parameters: Dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(default=settings.DEFAULT_SEED, ge=0)
    outputs: Dict[str, str] = Field(default_factory=dict, description="'json' and/or 'csv' output paths")

    @field_validator('outputs')
    def validate_outputs(cls, v):
        """Only json and csv outputs are written"""
        unknown = set(v) - {'json', 'csv'}
        if unknown:
            raise ValueError(f"unknown output kinds: {sorted(unknown)}")
        return v


def json_pointer(location: tuple) -> str:
    """RFC 6901 pointer for a pydantic error location"""
    parts = []
    for part in location:
        text = str(part).replace('~', '~0').replace('/', '~1')
        parts.append(text)
    return '/' + '/'.join(parts)


def validation_messages(error: ValidationError) -> List[str]:
    """One 'pointer: message' line per validation error"""
    return [f"{json_pointer(item['loc'])}: {item['msg']}" for item in error.errors()]


def parse_system_spec(data: Dict[str, Any]) -> Dict[str, Any]:
    """Validate a system description and return it as a plain dict"""
    kind = data.get('type') if isinstance(data, dict) else None
    if kind == 'linear':
        model = LinearSystemSpec.model_validate(data)
    elif isinstance(data, dict) and 'value' in data:
        model = BetaValueSpec.model_validate(data)
    else:
        model = BetaPolynomialSpec.model_validate(data)
    return model.model_dump()
