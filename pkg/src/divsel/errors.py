"""Exception types shared across the package."""


class DivselError(Exception):
    """Base class for all errors raised by divsel."""


class PoolError(DivselError):
    """Prediction pool could not be loaded or fails validation."""


class EmptyNegativesError(DivselError):
    """A negative-sample set is empty and cannot be used."""


class TeamLimitError(DivselError):
    """Candidate enumeration was refused (pool too large or bad filter)."""


class CapabilityError(DivselError):
    """An operation needs data the pool does not carry (e.g. probabilities)."""


class RuleCoverageError(DivselError):
    """Selection rules do not cover every (focal, size) cell in the candidates."""


class SynthConfigError(DivselError):
    """Synthetic pool configuration is invalid or infeasible."""
