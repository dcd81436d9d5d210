"""Return diagnostics, factor regressions, regularized covariance and
portfolio risk for passive versus optimized equity portfolios."""
from ._version import __version__
from .errors import NumericalError, RiskError, ValidationError

__all__ = ["__version__", "NumericalError", "RiskError", "ValidationError"]
