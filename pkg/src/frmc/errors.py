"""Typed errors raised across the package.

Callers that orchestrate many runs (convergence studies, the CLI) rely on
these types to tell a misconfigured run from a numerically degenerate one.
"""


class FrmcError(Exception):
    """Base class for all package errors."""


class ConfigurationError(FrmcError):
    """A model, scheme, or run was assembled inconsistently."""


class ValidationError(FrmcError):
    """An argument violates a documented precondition."""


class UsageError(FrmcError):
    """An object was used outside its contract (e.g. mismatched radius)."""


class NumericError(FrmcError):
    """A computation produced a non-finite or otherwise invalid number."""


class DegenerateDenominatorError(NumericError):
    """No matched pairs / zero denominator while the cutoff is disabled.

    Distinguishes "no information" from a bad estimate so that studies can
    record the failure instead of propagating a NaN.
    """
