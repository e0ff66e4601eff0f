import unittest
import mpmath as mp

from fractions import Fraction

from conley_forman import numerics as bd
from conley_forman import rand
from conley_forman.catalog import periodic_triangle, running_example
from conley_forman.cvf import Arrow, InvalidFieldError
from conley_forman.field import FieldContext, bound_checks, boundary_direction, f_bar, f_omega, f_reduced, g, h, in_y, property_suite, psi, tau_omega, theta, zero_time
from conley_forman.geometry import GeometryError, check_point, in_flow_tile
from conley_forman.numerics.backend_mpmath import MPMathBackend

mpm = MPMathBackend(mp.mp)

EPS = 1 / 48


def running_point(**coords):
    x = [0.0] * 6
    for name, t in coords.items():
        x["ABCDEF".index(name)] = t
    return x


class ScalarFunctionsTestCase(unittest.TestCase):

    def test_g(self):
        self.assertAlmostEqual(g(EPS, EPS), EPS, delta=1e-15)
        self.assertAlmostEqual(g(-0.3, EPS), -g(0.3, EPS), delta=1e-15)
        self.assertEqual(g(0.0, EPS), 0)

    def test_h(self):
        self.assertEqual(h(0.0, EPS), 1)
        self.assertEqual(h(0.5, EPS), 1)
        self.assertAlmostEqual(h(EPS, EPS), -EPS / 2, delta=1e-15)

        # continuous at the ends of the dip
        self.assertAlmostEqual(h(EPS / 2 + 1e-12, EPS), 1, delta=1e-9)
        self.assertAlmostEqual(h(3 * EPS / 2 - 1e-12, EPS), 1, delta=1e-9)

    def test_psi(self):
        zeta = 0.4 * EPS
        t_star = zero_time(zeta, EPS)

        self.assertAlmostEqual(t_star, 1.5 * 0.4 ** (2 / 3), delta=1e-12)
        self.assertEqual(psi(0, zeta, EPS), zeta)
        self.assertEqual(psi(t_star, zeta, EPS), 0)
        self.assertEqual(psi(2 * t_star, zeta, EPS), 0)
        self.assertEqual(psi(1.0, 0.0, EPS), 0)
        self.assertAlmostEqual(psi(0.3, -zeta, EPS), -psi(0.3, zeta, EPS), delta=1e-15)

        with self.assertRaises(ValueError):
            psi(-1, zeta, EPS)

    def test_psi_solves_decoupled_equation(self):
        zeta = 0.9 * EPS
        for t in [0.1, 0.5, 1.0]:
            dt = 1e-6
            derivative = (psi(t + dt, zeta, EPS) - psi(t - dt, zeta, EPS)) / (2 * dt)
            self.assertAlmostEqual(derivative, -g(psi(t, zeta, EPS), EPS), delta=1e-6)


class FieldContextTestCase(unittest.TestCase):

    def test_arrow_context(self):
        V = running_example()
        X = V.X

        ctx = FieldContext.from_cell(V, X.simplex("AD"))
        self.assertEqual(ctx.cell, Arrow(X.simplex("A"), X.simplex("AD")))
        self.assertEqual(ctx.vplus, X.vertex_id("D"))
        self.assertEqual(ctx.k, 1)
        self.assertFalse(ctx.is_critical)
        self.assertEqual(ctx.eps, Fraction(1, 48))
        self.assertEqual(ctx.label(), "A->AD")

        ctx = FieldContext.from_cell(V, X.simplex("ABD"))
        self.assertTrue(ctx.is_critical)
        self.assertEqual(ctx.k, 3)

    def test_rejections(self):
        V = running_example()
        X = V.X

        with self.assertRaises(InvalidFieldError):
            FieldContext(V, Arrow(X.simplex("A"), X.simplex("AB")))
        with self.assertRaises(GeometryError):
            FieldContext.from_cell(V, X.simplex("F"), Fraction(1, 30))


class VectorFieldTestCase(unittest.TestCase):

    def test_decoupled_outside_coordinates(self):
        V = running_example()
        X = V.X
        ctx = FieldContext.from_cell(V, X.simplex("F"))

        x = running_point(D=EPS, F=1 - EPS)
        f = f_omega(x, ctx)
        self.assertAlmostEqual(f[X.vertex_id("D")], -EPS, delta=1e-15)
        self.assertAlmostEqual(f[X.vertex_id("F")], EPS, delta=1e-15)
        self.assertAlmostEqual(tau_omega(x, ctx), 1.5, delta=1e-12)

        rep = bound_checks(x, ctx, f)
        self.assertTrue(rep.b)
        self.assertIsNone(rep.a)
        self.assertIsNone(rep.c)
        self.assertTrue(rep.ok)

    def test_gate(self):
        V = running_example()
        X = V.X
        ctx = FieldContext.from_cell(V, X.simplex("AD"))
        D = X.vertex_id("D")

        # on Y the gate of f is 1 while f̄ is damped for small x_D
        x = running_point(A=1 - EPS / 8, D=EPS / 8)
        self.assertTrue(in_y(x, ctx))
        self.assertAlmostEqual(theta(x, ctx), EPS, delta=1e-15)
        self.assertAlmostEqual(f_omega(x, ctx)[D], 1 + EPS, delta=1e-12)
        self.assertAlmostEqual(f_reduced(x, ctx)[D], 1 + EPS, delta=1e-12)
        self.assertAlmostEqual(f_bar(x, ctx)[D], (1 + EPS) / 2, delta=1e-12)

        # off Y both gates agree
        x = running_point(A=1 - EPS / 8 - EPS / 2, B=EPS / 2, D=EPS / 8)
        self.assertFalse(in_y(x, ctx))
        self.assertAlmostEqual(f_omega(x, ctx)[D], f_bar(x, ctx)[D], delta=1e-15)
        self.assertLess(f_omega(x, ctx)[D], f_reduced(x, ctx)[D])

    def test_exact_input(self):
        V = running_example()
        X = V.X
        ctx = FieldContext.from_cell(V, X.simplex("BCD"))

        x = [Fraction(0), Fraction(1, 2), Fraction(1, 4), Fraction(1, 4), Fraction(0), Fraction(0)]
        self.assertTrue(in_y(x, ctx))
        self.assertAlmostEqual(bd.fsum(f_omega(x, ctx)), 0, delta=1e-15)

    def test_conservation(self):
        V = running_example()
        x = running_point(A=0.2, B=0.01, C=0.01, D=0.7, E=0.05, F=0.03)
        for cell in V.flow_cells():
            ctx = FieldContext(V, cell)
            self.assertAlmostEqual(bd.fsum(f_omega(x, ctx)), 0, delta=1e-14)


class PropertySuiteTestCase(unittest.TestCase):

    def test_running_example(self):
        V = running_example()
        rep = property_suite(V, n_samples=100, seed=7)

        self.assertEqual(rep.samples, 100 * len(V.cells))
        self.assertTrue(rep.ok)
        self.assertLessEqual(rep.max_conservation_error, 1e-12)
        self.assertTrue(all(n > 0 for n in rep.bounds_applicable.values()))
        self.assertGreater(rep.direction_checks, 0)

    def test_periodic_triangle(self):
        rep = property_suite(periodic_triangle(), n_samples=100, seed=3)
        self.assertTrue(rep.ok)

    def test_corrupted_field(self):
        # with h flipped the v⁺-component points out of the tile where it should point in
        V = running_example()
        X = V.X
        ctx = FieldContext.from_cell(V, X.simplex("AD")).with_h(lambda s, eps: -h(s, eps))

        x = running_point(A=1 - 2 * EPS, B=EPS, D=EPS)
        self.assertGreater(f_omega(x, ctx)[X.vertex_id("D")], 0)
        self.assertLess(f_omega(x, ctx.with_h(h))[X.vertex_id("D")], 0)


class SamplerTestCase(unittest.TestCase):

    def test_points_in_tiles(self):
        V = running_example()
        rng = rand.make_rng(11)
        e = 1 / 48

        for cell in V.flow_cells():
            for _ in range(50):
                x = rand.tile_point(V, cell, Fraction(1, 48), rng)
                self.assertTrue(in_flow_tile(x, cell.minus, cell.plus, e, 1e-12))

                y = rand.boundary_point(V, cell, Fraction(1, 48), rng)
                if y is not None:
                    self.assertTrue(in_flow_tile(y, cell.minus, cell.plus, e, 1e-12))
                    self.assertIn(e, y)

    def test_exit_walls(self):
        # the wall x_A = ε through which solutions leave A->AD, with the mass on x_D
        V = running_example()
        X = V.X
        cell = V.cell(X.simplex("AD"))
        ctx = FieldContext(V, cell)
        rng = rand.make_rng(13)
        e = 1 / 48
        A, D = X.vertex_id("A"), X.vertex_id("D")

        exits = []
        for _ in range(200):
            y = rand.boundary_point(V, cell, Fraction(1, 48), rng)
            if y is not None and y[A] == e:
                exits.append(y)

        self.assertTrue(exits)
        for y in exits:
            self.assertTrue(in_flow_tile(y, cell.minus, cell.plus, e, 1e-12))
            self.assertGreater(y[D], 0.5)
            self.assertEqual(boundary_direction(y, ctx), [])

        # x_{v⁺} is also drawn far above 2ε
        self.assertTrue(any(rand.tile_point(V, cell, Fraction(1, 48), rng)[D] > 0.5 for _ in range(100)))

    def test_random_points(self):
        X = running_example().X
        for x in rand.random_points(X, 20, seed=5):
            check_point(x, X, tol=1e-12)

        self.assertEqual(rand.random_points(X, 3, seed=5), rand.random_points(X, 3, seed=5))


class MPMathFieldTestCase(unittest.TestCase):

    def setUp(self):
        self.saved = bd.get_backend()
        bd.set_backend(mpm)

    def tearDown(self):
        bd.set_backend(self.saved)

    @mpm.workdps(30)
    def test_conservation(self):
        V = running_example()
        X = V.X
        ctx = FieldContext.from_cell(V, X.simplex("BC"))

        x = [Fraction(0), Fraction(3, 10), Fraction(1, 2), Fraction(1, 5) - Fraction(1, 100), Fraction(0), Fraction(0)]
        x[0] = 1 - sum(x)
        f = f_omega(x, ctx)

        self.assertTrue(all(isinstance(c, mp.mpf) for c in f))
        self.assertLess(bd.abs(bd.fsum(f)), 100 * bd.machine_eps())

    @mpm.workdps(30)
    def test_zero_time(self):
        zeta = mp.mpf(1) / 96
        t_star = zero_time(zeta, mp.mpf(1) / 48)
        self.assertEqual(psi(t_star, zeta, mp.mpf(1) / 48), 0)
        self.assertLess(abs(t_star - mp.mpf(3) / 2 * mp.power(mp.mpf(1) / 2, mp.mpf(2) / 3)), mp.mpf(10) ** -25)


if __name__ == '__main__':
    unittest.main()
