"""Exception types shared across the package.

Every error raised on purpose derives from :class:`MfcgError` so callers
(and the CLI) can distinguish configuration problems from runtime failures.
"""


class MfcgError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(MfcgError):
    """A config file or config override is missing, malformed, or inconsistent.

    The message names the offending key path, e.g. ``rates.omega_q``.
    """


class DimensionError(MfcgError):
    """Array arguments disagree in shape/length with the grid or each other."""


class InvalidDistributionError(MfcgError):
    """A vector expected to lie on the probability simplex does not."""


class InvalidRateError(MfcgError):
    """A learning rate is outside [0, 1] or the exponent ordering is violated."""


class DegenerateParametersError(MfcgError):
    """Cost parameters make a closed-form solution undefined (zero denominator)."""


class UnsupportedParametersError(MfcgError):
    """Parameters outside the regime where the closed form applies (e.g. R <= 0)."""


class IntegrationError(MfcgError):
    """Numerical ODE integration failed (blow-up or non-finite values)."""
