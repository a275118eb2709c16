"""Custom exceptions for the laboratory."""


class SlabLabError(Exception): ...
class InvalidFieldError(SlabLabError): ...
class DomainError(SlabLabError): ...
class SingularityError(SlabLabError): ...
class ConfigurationError(SlabLabError): ...
class MissingArtifactError(SlabLabError): ...
class SuiteMismatchError(SlabLabError): ...
class InsufficientDataError(SlabLabError): ...
class ConvergenceError(SlabLabError): ...


class NumericError(SlabLabError):
    """Raised when a stepper produces non-finite values."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class ReplicaError(SlabLabError):
    """Raised by the orchestrator when a worker fails."""

    def __init__(self, replica: int, cause: BaseException):
        super().__init__(f"replica {replica} failed: {cause}")
        self.replica = replica
        self.cause = cause
