import builtins

from .backend_mpmath import MPMathBackend
from .backend_numpy import NumpyBackend


"""The currently active backend. This exposes all the scalar functions needed by the vector fields
and offered by the underlying library."""
class __bd_wrapper:
    # In order to test with a particular backend, the backend has to be temporarily set from here.
    bd = NumpyBackend()
    #bd = MPMathBackend(mp.mp)


def set_backend(new_bd):
    """Sets the current working backend to the given `NumericBackend` object."""
    __bd_wrapper.bd = new_bd

def get_backend():
    """Returns the current working backend."""
    return __bd_wrapper.bd


def machine_eps():
    """Returns the machine epsilon, as a float object of the backend."""
    return __bd_wrapper.bd.machine_eps()

def workdps(x: int):
    """Temporarily sets the working precision to the given value (in dps).

     Note:
        To be used in a `with` statement or as a function decorator.
        This method does not do anything if the backend has fixed precision."""
    return __bd_wrapper.bd.workdps(x)

def make_float(x):
    """Construct the given real number as an object of the backend."""
    return __bd_wrapper.bd.make_float(x)

def abs(x):
    """Returns the absolute value of the given real number."""
    return __bd_wrapper.bd.abs(x)

def sign(x):
    """Returns the sign of the given real number (-1, 0 or 1)."""
    return __bd_wrapper.bd.sign(x)

def cbrt(x):
    """Returns the real cube root of the given number, odd on the whole real line."""
    return __bd_wrapper.bd.cbrt(x)

def power(x, y):
    """Returns `x ** y` for non-negative x."""
    return __bd_wrapper.bd.power(x, y)

def exp(x):
    """Returns the exponential of the given real number."""
    return __bd_wrapper.bd.exp(x)

def log(x):
    """Returns the natural logarithm of the given positive real number."""
    return __bd_wrapper.bd.log(x)

def fsum(xs):
    """Returns the sum of the given real numbers with a single final rounding, where the backend supports it."""
    return __bd_wrapper.bd.fsum(xs)

def vmax(xs):
    """Returns the largest absolute value in the given list, or zero for an empty list."""
    return builtins.max([abs(x) for x in xs], default=make_float(0))
