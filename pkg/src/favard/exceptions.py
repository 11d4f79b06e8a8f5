"""Exception types raised by the favard package."""


class FavardError(Exception):
    """Base class for all package errors."""


class UnitCircleAmbiguous(FavardError):
    """A root sits near the unit circle but exact tests cannot classify it."""


class SearchBudgetExceeded(FavardError):
    """A combinatorial search would exceed its configured budget."""


class SearchFailed(FavardError):
    """A constructive search found no witness at maximum refinement."""


class VerificationFailed(FavardError):
    """A sampled certificate check was violated."""


class BudgetExceeded(FavardError):
    """The requested Cantor iterate has more cells than the budget allows."""


class ResolutionTooLow(FavardError):
    """A quadrature or grid resolution is below the Nyquist guard."""


class ConfigError(FavardError, ValueError):
    """Invalid experiment configuration."""
