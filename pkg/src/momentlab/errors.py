"""Exception hierarchy. Each error carries a short machine-readable ``code``."""

from __future__ import annotations


class LabError(Exception):
    code = "lab-error"


class ConfigError(LabError, ValueError):
    """Bad user input or configuration; the CLI maps these to exit status 2."""

    code = "invalid-configuration"


class InvalidDimension(ConfigError):
    code = "invalid-dimension"


class InvalidInput(ConfigError):
    code = "invalid-input"


class OutOfRange(ConfigError):
    code = "out-of-range"


class InvalidDelta(ConfigError):
    code = "invalid-delta"


class InvalidExponent(ConfigError):
    code = "invalid-exponent"


class ResolutionError(ConfigError):
    code = "resolution-error"


class DegeneratePair(ConfigError):
    code = "degenerate-pair"


class NoAdmissibleTangent(LabError, ValueError):
    code = "no-admissible-tangent"


class ComputationError(LabError, RuntimeError):
    """Numerical failure; the CLI maps these to exit status 1."""

    code = "computation-error"


class InternalInconsistency(ComputationError):
    code = "internal-inconsistency"


class QuadratureError(ComputationError):
    code = "quadrature-error"


class FitDomainError(ComputationError):
    code = "fit-domain-error"


class EmptySet(ComputationError):
    code = "empty-set"


class LadderFailed(ComputationError):
    code = "ladder-failed"
