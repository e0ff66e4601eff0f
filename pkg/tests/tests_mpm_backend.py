import unittest
import mpmath as mp

from fractions import Fraction

from conley_forman import numerics
from conley_forman.numerics.backend_mpmath import MPMathBackend
from conley_forman.numerics.backend_numpy import NumpyBackend

bd = MPMathBackend(mp.mp)

class MPMathBackendTestCase(unittest.TestCase):

    @bd.workdps(40)
    def test_make_float(self):
        x = bd.make_float(Fraction(1, 48))
        self.assertLess(bd.abs(48 * x - 1), 10 * bd.machine_eps())
        self.assertEqual(bd.sign(bd.make_float(-3)), -1)
        self.assertEqual(bd.sign(bd.make_float(0)), 0)

    @bd.workdps(40)
    def test_cbrt(self):
        for x in [Fraction(1, 27), Fraction(2, 7), Fraction(1000)]:
            y = bd.cbrt(bd.make_float(x))
            self.assertLess(bd.abs(y ** 3 - bd.make_float(x)), 10 * bd.machine_eps() * float(max(1, x)))
            self.assertEqual(bd.cbrt(-bd.make_float(x)), -y) # odd on the whole line

    def test_precision(self):
        with bd.workdps(50):
            self.assertEqual(mp.mp.dps, 50)
            third = bd.fsum([bd.make_float(1) / 3] * 3)
            self.assertLess(bd.abs(third - 1), 10 * bd.machine_eps())
        self.assertEqual(mp.mp.dps, 15)


class NumpyBackendTestCase(unittest.TestCase):

    def test_fixed_precision(self):
        np_bd = NumpyBackend()
        with np_bd.workdps(50): # no effect on 64-bit floats
            self.assertEqual(np_bd.make_float(Fraction(1, 3)), 1 / 3)
        self.assertEqual(np_bd.cbrt(-8.0), -2.0)
        self.assertEqual(np_bd.fsum([0.1] * 10), 1.0)

    def test_switching(self):
        saved = numerics.get_backend()
        try:
            numerics.set_backend(bd)
            self.assertIsInstance(numerics.make_float(1), mp.mpf)
            self.assertEqual(numerics.vmax([bd.make_float(-2), bd.make_float(1)]), 2)
            self.assertEqual(numerics.vmax([]), 0)
        finally:
            numerics.set_backend(saved)

        self.assertIs(numerics.get_backend(), saved)

    def test_interface(self):
        for name in ['make_float', 'abs', 'sign', 'cbrt', 'power', 'exp', 'log', 'fsum', 'vmax', 'workdps']:
            self.assertTrue(callable(getattr(numerics, name)))
        for name in ['sqrt', 'machine_threshold', 'workprec', 'extradps', 'extraprec']:
            self.assertFalse(hasattr(numerics, name))
        self.assertAlmostEqual(numerics.log(numerics.exp(numerics.make_float(2))), 2, delta=1e-14)


if __name__ == '__main__':
    unittest.main()
