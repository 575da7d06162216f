"""Exception hierarchy shared across the package."""


class PromptDoctorError(Exception):
    """Base class for all errors raised by this package."""


class CanonicalizationError(PromptDoctorError):
    """Brace nesting in a prompt is unbalanced beyond repair."""


class MissingValueError(PromptDoctorError):
    """A substitution did not cover every hole."""

    def __init__(self, hole_name: str):
        super().__init__(f"no value supplied for hole {hole_name!r}")
        self.hole_name = hole_name


class ConfigError(PromptDoctorError):
    """Invalid or missing configuration."""


class TransportError(PromptDoctorError):
    """Transient transport failure talking to a model endpoint."""


class AuthError(PromptDoctorError):
    """The endpoint rejected our credentials."""


class BudgetExceeded(PromptDoctorError):
    """The per-run model-call budget was exhausted."""


class UnscriptedCallError(PromptDoctorError):
    """A strict mock backend received a request it has no script for."""


class MalformedResponse(PromptDoctorError):
    """The model reply could not be parsed against the expected schema.

    Carries the raw reply text for diagnostics.
    """

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class DegenerateDataset(PromptDoctorError):
    """Synthetic dataset generation collapsed into duplicates."""


class EvaluationFailed(PromptDoctorError):
    """Too many rows of an evaluation failed to score."""


class SeedShortfall(PromptDoctorError):
    """Seed generation produced too few valid rewrites."""


class Exhausted(PromptDoctorError):
    """A bounded generation-evaluation loop hit its iteration cap."""

    def __init__(self, message: str, iterations: int = 0):
        super().__init__(message)
        self.iterations = iterations


class ZeroVector(PromptDoctorError):
    """Cosine similarity is undefined for a zero-norm vector."""


class EmptyInput(PromptDoctorError):
    """A text metric received input that tokenizes to nothing."""


class InsufficientStratumWarning(UserWarning):
    """A sampling stratum was empty and had to be skipped."""
