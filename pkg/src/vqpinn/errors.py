"""Error taxonomy shared across the package."""


class ConfigurationError(ValueError):
    """A user-supplied configuration value is invalid or inconsistent."""


class ContractError(ValueError):
    """An internal API precondition was violated by the caller."""


class EncodingDomainError(ValueError):
    """A coordinate falls outside the domain of its feature-map encoding."""


class TrainingAborted(RuntimeError):
    """Training produced a non-finite loss and cannot continue."""
