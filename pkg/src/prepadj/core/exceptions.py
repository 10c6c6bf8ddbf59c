"""Exception hierarchy for prepadj. Each error carries the CLI exit code it maps to."""


class PrepAdjError(Exception):
    """Base exception for all prepadj errors."""

    exit_code = 1
    stage: str | None = None


class ConfigError(PrepAdjError):
    """Invalid run configuration or user input."""

    exit_code = 2


class SchemaError(ConfigError):
    """Column-role mapping does not match the data."""

    def __init__(self, message: str, column: str | None = None):
        self.column = column
        super().__init__(message)


class DataError(PrepAdjError):
    """Cohort data violates an invariant."""

    exit_code = 2

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        super().__init__(message)


class MissingArtifactError(PrepAdjError):
    """An upstream output required by this command is absent."""

    exit_code = 3


class NumericalError(PrepAdjError):
    """A numerical procedure failed."""

    exit_code = 4


class DegenerateTargetError(NumericalError):
    """Target has a single class; no probability model can be fit."""


class SeparationError(NumericalError):
    """Logistic coefficients diverge (perfect or quasi-perfect separation)."""


class ConvergenceError(NumericalError):
    """Iterative fit did not converge."""


class SolverError(NumericalError):
    """Closed-form nuisance solve failed for a unit."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        super().__init__(message)


class BootstrapError(NumericalError):
    """Bootstrap replicate could not be drawn."""


class SensitivityError(NumericalError):
    """A sensitivity grid cell failed."""

    def __init__(self, message: str, params: dict | None = None):
        self.params = params
        super().__init__(message)
