"""Error types raised by the numeric layers.

Everything derives from :class:`LevyReduceError` so callers can catch the
library's failures without swallowing programming errors.
"""


class LevyReduceError(Exception):
    """Base class for all library-specific failures."""


class DivergentIntegral(LevyReduceError):
    """An improper integral grew without bound during cutoff extension."""


class NegativeDirection(LevyReduceError):
    """A Laplace argument had negative inner product with a support direction."""


class InfimumZero(LevyReduceError):
    """The infimum of radial Laplace exponents vanished at a positive argument."""


class DenominatorZero(LevyReduceError):
    """A truncated-moment denominator was zero where positivity is required."""


class AffinityViolation(LevyReduceError):
    """A quantity required to be affine in the state failed the residual test."""


class NotPowerLaw(LevyReduceError):
    """Scaling ratios of a sampled exponent vary beyond tolerance."""


class ZeroVolatility(LevyReduceError):
    """The volatility function vanished where a direction limit was requested."""


class ResidualNuG0(LevyReduceError):
    """The state-independent jump part exceeded tolerance where zero was required."""


class CutoffTooSmall(LevyReduceError):
    """A jump-truncation cutoff produced an intensity above the configured budget."""


class BlowUp(LevyReduceError):
    """The Riccati solution left its admissible bracket before the horizon."""


class PreconditionFailed(LevyReduceError):
    """A structural condition required before model reduction did not hold."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
