import logging
import math

from fractions import Fraction

import numpy as np

from .backend import NumericBackend
from .backend import generic_real

logger = logging.getLogger(__name__)


class NumpyBackend(NumericBackend):
    """Numeric backend for numpy.

    Note:
        Scalars are `numpy.float64`: the vector fields are evaluated in 64-bit binary floats,
        so unlike a general purpose backend we never select a wider dtype here.
    """

    def __init__(self):
        """Initializes a numpy backend.
        """
        self.ftype = np.float64

        logger.debug('NumpyBackend -- chosen dtype: %s', self.ftype.__name__)

    def __getattr__(self, item): # redirect any other function to numpy
        return getattr(np, item)

    def machine_eps(self):
        return np.finfo(self.ftype).eps

    def make_float(self, x: generic_real):
        if isinstance(x, Fraction):
            return self.ftype(float(x)) # correctly rounded
        return self.ftype(x)

    def abs(self, x: generic_real):
        return np.abs(x)

    def sign(self, x: generic_real):
        return np.sign(self.ftype(x))

    def cbrt(self, x: generic_real):
        return np.cbrt(x) # odd on all of R

    def power(self, x: generic_real, y: generic_real):
        return np.power(self.ftype(x), y)

    def fsum(self, xs):
        return self.ftype(math.fsum(xs))
