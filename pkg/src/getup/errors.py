"""Exception taxonomy shared across the package.

Exit-code mapping for the CLI lives in :mod:`getup.cli`.
"""


class GetupError(Exception):
    """Base class for all package errors."""


class ConfigurationError(GetupError):
    """Malformed or inconsistent configuration (bad document, dimension mismatch)."""


class ContractError(GetupError):
    """A caller violated an operation precondition."""


class SimulationDivergedError(GetupError):
    """Integration produced a non-finite state.

    Attributes:
        step_index: substep at which the state first became non-finite.
    """

    def __init__(self, message: str, step_index: int):
        super().__init__(f"{message} (substep {step_index})")
        self.step_index = step_index


class TrainingDivergedError(GetupError):
    """A loss or network output became non-finite; carries a diagnostics snapshot."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ReferenceFailedError(GetupError):
    """The weak policy failed to produce a successful reference rollout."""


class TrajectoryParseError(GetupError):
    """A trajectory log line failed to parse; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"{message} (line {line_number})")
        self.line_number = line_number


class CheckpointIntegrityError(GetupError):
    """Checkpoint payload does not match its manifest."""


class SchemaMigrationError(GetupError):
    """Checkpoint or document schema version is not supported."""


class UsageError(GetupError):
    """Invalid combination of user-facing options."""
