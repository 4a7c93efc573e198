"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration file or section is invalid; message names the key."""


class BlowupError(RuntimeError):
    """The integration produced a non-finite state."""

    def __init__(self, step_index: int, message: str = ""):
        self.step_index = step_index
        super().__init__(message or f"non-finite state detected at step {step_index}")


class VerificationFailure(RuntimeError):
    """At least one verification check failed (distinct from operational errors)."""
