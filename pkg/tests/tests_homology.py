import unittest

from conley_forman.complex import Simplex
from conley_forman.homology import ChainComplex, HomologyDomainError, PoincarePolynomial, absolute_betti, poincare_polynomial, relative_betti


def closure(*simplices):
    return {Simplex(f) for s in simplices for f in Simplex(s).faces()}


class PoincarePolynomialTestCase(unittest.TestCase):

    def test_render(self):
        self.assertEqual(str(PoincarePolynomial()), "0")
        self.assertEqual(str(PoincarePolynomial([1])), "1")
        self.assertEqual(str(PoincarePolynomial([0, 1])), "t")
        self.assertEqual(str(PoincarePolynomial([0, 0, 1])), "t^2")
        self.assertEqual(str(PoincarePolynomial([1, 1])), "1 + t")
        self.assertEqual(str(PoincarePolynomial([0, 0, 0, 2])), "2t^3")

    def test_arithmetic(self):
        p = PoincarePolynomial([1, 1, 0, 0])
        self.assertEqual(p.betti, (1, 1))
        self.assertEqual(p.degree(), 1)
        self.assertEqual(p, (1, 1))
        self.assertEqual(p(-1), 0)
        self.assertEqual(p + PoincarePolynomial([0, 0, 1]), PoincarePolynomial([1, 1, 1]))
        self.assertEqual(p[5], 0)

        with self.assertRaises(ValueError):
            PoincarePolynomial([1, -1])


class RelativeHomologyTestCase(unittest.TestCase):

    def test_absolute(self):
        triangle = closure((0, 1, 2))
        circle = closure((0, 1), (1, 2), (0, 2))

        self.assertEqual(absolute_betti(triangle), (1,))
        self.assertEqual(absolute_betti(circle), (1, 1))
        self.assertEqual(absolute_betti(closure((0,), (1,))), (2,))
        self.assertEqual(absolute_betti(set()), ())

    def test_relative(self):
        abd = closure((0, 1, 3))
        bd_abd = abd - {Simplex((0, 1, 3))}
        self.assertEqual(relative_betti(abd, bd_abd), (0, 0, 1))

        edge = closure((4, 5))
        self.assertEqual(relative_betti(edge, closure((4,), (5,))), (0, 1))
        self.assertEqual(relative_betti(edge, closure((4,))), ())
        self.assertEqual(poincare_polynomial(edge, closure((4,))), PoincarePolynomial())

    def test_vertex_order(self):
        # the Betti numbers do not depend on the orientation convention
        abd = closure((0, 1, 3), (1, 2, 3))
        for order in ([0, 1, 2, 3], [3, 2, 1, 0], [1, 3, 0, 2]):
            self.assertEqual(absolute_betti(abd, vertex_order=order), (1,))

    def test_chain_complex(self):
        C = ChainComplex(closure((0, 1, 2, 3)))
        self.assertTrue(C.check())
        self.assertEqual([C.rank(k) for k in range(4)], [4, 6, 4, 1])
        self.assertEqual(C.euler_characteristic(), 1)

        M = C.boundary_matrix(1)
        self.assertEqual(M.shape, (4, 6))
        self.assertEqual(C.boundary_rank(1), 3)
        self.assertEqual(C.boundary_rank(0), 0)

        # the boundary of a tetrahedron is a sphere
        S2 = closure((0, 1, 2, 3)) - {Simplex((0, 1, 2, 3))}
        self.assertEqual(absolute_betti(S2), (1, 0, 1))

    def test_domain_errors(self):
        with self.assertRaises(HomologyDomainError):
            relative_betti({Simplex((0, 1))})
        with self.assertRaises(HomologyDomainError):
            relative_betti(closure((0,)), closure((1,)))
        with self.assertRaises(HomologyDomainError):
            relative_betti(closure((0, 1)), {Simplex((0, 1))})


if __name__ == '__main__':
    unittest.main()
