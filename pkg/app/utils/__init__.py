"""
Utilities Package
"""
from app.utils.errors import (
    BackscatterError,
    ConfigurationError,
    ConstraintViolationError,
    DegenerateChannelError,
    DomainError,
    FeasibilityError,
    IncompleteTableError,
    SpecParseError,
    UnsupportedSizeError,
)
from app.utils.rng import derive_rng, derive_seed, derive_seed_sequence

__all__ = [
    'BackscatterError',
    'ConfigurationError',
    'ConstraintViolationError',
    'DegenerateChannelError',
    'DomainError',
    'FeasibilityError',
    'IncompleteTableError',
    'SpecParseError',
    'UnsupportedSizeError',
    'derive_rng',
    'derive_seed',
    'derive_seed_sequence',
]
