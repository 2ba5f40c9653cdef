"""Exception hierarchy shared across the package.

CLI exit codes: ConfigError -> 2, ProtocolInvalidError -> 3, everything
else derived from RccError -> 4.
"""


class RccError(Exception):
    """Base class for all package errors."""


class ConfigError(RccError):
    """Bad input file, malformed config, or out-of-range run parameter."""


class ValidationError(RccError):
    """An operator or data structure violates its contract."""


class ExclusiveSectorsError(ValidationError):
    """Projector product vanished: mutually exclusive sectors were combined.

    Select the total projector of one target sector first, then add finer
    internal constraints inside it, so the product cannot be zero.
    """


class LeakageError(ValidationError):
    """State support is not contained in the reference subspace.

    Carries the leaked probability mass; callers should project and
    renormalize the state, or switch to a smoothed reference.
    """

    def __init__(self, leaked: float, message: str | None = None):
        self.leaked = leaked
        if message is None:
            message = (
                f"support leakage {leaked:.3e} outside the reference subspace; "
                "project_renormalize the state or use a smoothed reference"
            )
        super().__init__(message)


class CompleteLeakageError(LeakageError):
    """No overlap with the reference subspace at all."""

    def __init__(self, q: float):
        super().__init__(
            1.0 - q,
            f"state mass inside the reference subspace is {q:.3e}; projection "
            "is undefined, use the smoothed reference scheme instead",
        )


class ProtocolInvalidError(RccError):
    """A statistical protocol cannot certify at the requested level."""


class NumericalError(RccError):
    """A numerical routine failed to converge or left its domain."""
