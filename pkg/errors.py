#!/usr/bin/env python3
"""
DKPP Error Types
One hierarchy for every failure the solver and the CLI can report.
"""


class DkppError(Exception):
    """Base class for all DKPP errors."""


class DimensionError(DkppError, ValueError):
    """Array length, grid or time window does not match."""


class ParameterError(DkppError, ValueError):
    """A parameter lies outside its admissible range."""


class DataError(DkppError, ValueError):
    """Samples contain NaN or Inf."""


class AdmissibilityError(DkppError, ValueError):
    """The convolution kernel is zero or its second derivative is not in L1."""


class ConfigError(DkppError, ValueError):
    """A run config failed validation; carries every field-level diagnostic."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("Configuration errors:\n" + "\n".join(f"  - {d}" for d in self.diagnostics))


class ArtifactError(DkppError):
    """A run-directory artifact is missing or malformed."""


class AssumptionViolation(DkppError):
    """
    The nonlinearity breaks its declared growth or Lipschitz bound.

    Attributes:
        witness (dict): Sample that breaks the bound, e.g. {"u1": .., "u2": .., "x": ..}
    """

    def __init__(self, message: str, witness: dict):
        self.witness = dict(witness)
        super().__init__(f"{message} (witness: {self.witness})")


class RefusalError(DkppError):
    """The contraction certificate is inadmissible and no override was given."""

    def __init__(self, message: str, certificate=None):
        self.certificate = certificate
        super().__init__(message)


class NonConvergenceError(DkppError):
    """
    Picard iteration hit max_iter before reaching the tolerance.

    Attributes:
        residuals (list): Residual history
        ratios (list): Empirical contraction ratios
        last_iterate: Last SpaceTimeField computed
    """

    def __init__(self, message: str, residuals, ratios, last_iterate=None, window_index=None):
        self.residuals = list(residuals)
        self.ratios = list(ratios)
        self.last_iterate = last_iterate
        self.window_index = window_index
        super().__init__(message)
