from fractions import Fraction

from .backend import NumericBackend
from .backend import generic_real


class MPMathBackend(NumericBackend):
    """Numeric backend for the mpmath package. This exposes the mpmath implementation.

    Note:
        The mpmath package allows to compute with arbitrary precision, but its performance is limited.
        It is meant for checking the field identities and bounds tightly, not for long trajectories.
    """

    def __init__(self, ctx):
        """Initializes an mpmath backend interface with the given mpmath context.

        Args:
            ctx (mpmath.MPContext): the context object exposed by mpmath. It can be `mpmath.mp` or `mpmath.fp`.
        """
        self.ctx = ctx

    def __getattr__(self, item): # redirect any other function to the mpmath context
        return getattr(self.ctx, item)

    def machine_eps(self):
        return self.ctx.mpf(10) ** (-self.ctx.dps)

    def workdps(self, x: int):
        return self.ctx.workdps(x)

    def make_float(self, x: generic_real):
        if isinstance(x, Fraction):
            return self.ctx.mpf(x.numerator) / x.denominator
        return self.ctx.mpf(x)

    def abs(self, x: generic_real):
        return self.ctx.fabs(x)

    def cbrt(self, x: generic_real):
        x = self.ctx.mpf(x)
        if x < 0:
            return -self.ctx.cbrt(-x)
        return self.ctx.cbrt(x)

    def power(self, x: generic_real, y: generic_real):
        return self.ctx.power(self.ctx.mpf(x), y)

    def fsum(self, xs):
        return self.ctx.fsum(xs)
