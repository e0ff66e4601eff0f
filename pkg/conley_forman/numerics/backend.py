import functools

from typing import SupportsFloat


"""Type alias for generic floating-point real numbers.
"""
generic_real = SupportsFloat | float


class DummyPrecisionManager:
    """This replaces mpmath's precision manager for those backend interfaces
    that do not support variable-precision arithmetic."""

    def __call__(self, f):
        @functools.wraps(f)
        def g(*args, **kwargs):
            return f(*args, **kwargs)

        return g

    def __enter__(self):
        pass

    def __exit__(self, exc_type, exc_val, exc_tb):
        return False


class NumericBackend:
    """This class provides the real-scalar interface used to evaluate the flow tile vector fields.
    It can be implemented by different libraries, so that the fields can be evaluated either in
    fast hardware floats, or in arbitrary precision when an identity has to be checked tightly."""

    def machine_eps(self):
        """Returns the machine epsilon, as a float object of the backend."""
        raise NotImplementedError()

    def make_float(self, x: generic_real):
        """Construct the given real number as an object of the backend."""
        raise NotImplementedError()

    def cbrt(self, x: generic_real):
        """Returns the real cube root, extended as an odd function to negative arguments."""
        raise NotImplementedError()

    def sign(self, x: generic_real):
        """Returns -1, 0 or 1 according to the sign of x, as a float of the backend."""
        if x > 0:
            return self.make_float(1)
        if x < 0:
            return self.make_float(-1)
        return self.make_float(0)

    def fsum(self, xs):
        """Returns the sum of the given floats, rounded once."""
        raise NotImplementedError()

    def workdps(self, x: int):
        """Temporarily sets the working precision to the given value (in dps).

        Note:
            To be used in a `with` statement or as a function decorator.
            This method does not do anything if the backend has fixed precision."""
        return DummyPrecisionManager()
