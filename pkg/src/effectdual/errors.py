"""Exception hierarchy.

Everything raised on purpose by this package derives from ``EffectDualError``.
Errors that mean "this input does not satisfy a type invariant" also derive
from ``ValueError`` through ``ValidationError`` so callers can treat them as
ordinary bad input.
"""


class EffectDualError(Exception):
    pass


class ValidationError(EffectDualError, ValueError):
    """An object failed its invariants at construction or parse time."""


class DimensionMismatch(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class SchemaError(ValidationError):
    """Malformed JSON document; the message names the offending field."""


class NotOrthogonal(EffectDualError):
    """``a ⊕ b`` is undefined because the sum exceeds the unit."""


class NotAffine(EffectDualError):
    pass


class RangeViolation(EffectDualError):
    pass


class NotState(ValidationError):
    pass


class NotPovm(ValidationError):
    pass


class NotHomomorphism(EffectDualError):
    pass


class NotTransitive(EffectDualError):
    pass


class SingularAverage(EffectDualError):
    """Group-averaged seed has a zero eigenvalue, so it cannot be normalized."""
