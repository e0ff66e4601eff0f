import unittest

from conley_forman.catalog import periodic_triangle, running_example
from conley_forman.complex import ComplexDomainError, Simplex
from conley_forman.cvf import Arrow, CombinatorialSolution, CombinatorialVectorField, Critical, InvalidFieldError, field_from_map, forman_map_form, is_solution, map_form_violations, validate_field


class CombinatorialVectorFieldTestCase(unittest.TestCase):

    def test_running_example(self):
        V = running_example()
        X = V.X

        self.assertEqual(validate_field(X, V), [])
        self.assertEqual(X.labels(V.crit()), ["F", "BD", "ABD"])
        self.assertEqual(X.labels(V.tail()), ["A", "B", "C", "D", "E", "BC"])
        self.assertEqual(X.labels(V.head()), ["AB", "AD", "CD", "DE", "DF", "BCD"])

        # Crit, Tail and Head partition X
        self.assertEqual(V.crit() | V.tail() | V.head(), set(X.simplices))
        self.assertEqual(len(V.crit()) + len(V.tail()) + len(V.head()), len(X))

    def test_lookup(self):
        V = running_example()
        X = V.X

        self.assertEqual(V.cell(X.simplex("AD")), Arrow(X.simplex("A"), X.simplex("AD")))
        self.assertEqual(V.sigma_minus_plus(X.simplex("AD")), (X.simplex("A"), X.simplex("AD")))
        self.assertEqual(V.sigma_minus_plus(X.simplex("BD")), (X.simplex("BD"), X.simplex("BD")))
        self.assertTrue(V.is_tail(X.simplex("BC")))
        self.assertTrue(V.is_head(X.simplex("BCD")))
        self.assertTrue(V.is_critical(X.simplex("F")))
        self.assertEqual(V.label(V.cell(X.simplex("A"))), "A->AD")

        with self.assertRaises(ComplexDomainError):
            V.cell(Simplex([0, 2]))

    def test_flow_map(self):
        V = running_example()
        X = V.X
        s = X.simplex

        self.assertEqual(V.pi(s("A")), {s("AD")})
        self.assertEqual(V.pi(s("AD")), {s("D")})
        self.assertEqual(V.pi(s("BCD")), {s("B"), s("C"), s("D"), s("CD"), s("BD")})
        self.assertEqual(V.pi(s("F")), {s("F")})
        self.assertEqual(len(V.pi(s("ABD"))), 7)

        G = V.digraph
        self.assertEqual(G.number_of_nodes(), 15)
        self.assertTrue(G.has_edge(s("BD"), s("BD")))

    def test_solutions(self):
        V = running_example()
        X = V.X

        rho = [X.simplex(n) for n in ("A", "AD", "D", "DF", "F", "F")]
        self.assertTrue(is_solution(rho, V))
        self.assertFalse(is_solution([X.simplex("A"), X.simplex("D")], V))
        self.assertTrue(is_solution([], V))

        sol = CombinatorialSolution(rho, start=-2)
        self.assertEqual(sol.domain, (-2, 3))
        self.assertEqual(sol[-2], X.simplex("A"))
        self.assertTrue(sol.is_solution(V))
        with self.assertRaises(IndexError):
            sol[4]

    def test_invalid_fields(self):
        V = running_example()
        X = V.X

        report = validate_field(X, list(V.cells) + [Arrow(X.simplex("A"), X.simplex("AB"))])
        self.assertIn("A is covered twice", report)

        cells = [c for c in V.cells if c != Arrow(X.simplex("A"), X.simplex("AD"))]
        cells += [Arrow(X.simplex("A"), X.simplex("ABD")), Critical(X.simplex("AD"))]
        report = validate_field(X, cells)
        self.assertIn("arrow A -> ABD: A is not a facet of ABD", report)

        report = validate_field(X, [c for c in V.cells if c != Critical(X.simplex("F"))])
        self.assertEqual(report, ["F is not covered"])

        with self.assertRaises(InvalidFieldError) as ctx:
            CombinatorialVectorField(X, cells)
        self.assertTrue(ctx.exception.report)

    def test_map_form(self):
        for V in (running_example(), periodic_triangle()):
            m = forman_map_form(V)
            self.assertEqual(map_form_violations(V.X, m), [])
            self.assertEqual(field_from_map(V.X, m), V)

        V = running_example()
        X = V.X
        m = forman_map_form(V)
        m[X.simplex("AD")] = X.simplex("ABD") # AD is already in the image
        self.assertTrue(map_form_violations(X, m))
        with self.assertRaises(InvalidFieldError):
            field_from_map(X, m)

    def test_json(self):
        V = running_example()
        W = CombinatorialVectorField.from_json(V.X, V.to_json())
        self.assertEqual(V, W)

        partial = {'critical': [["B", "D"]], 'arrows': []}
        W = CombinatorialVectorField.from_json(V.X, partial, complete_critical=True)
        self.assertEqual(W, CombinatorialVectorField.all_critical(V.X))

        with self.assertRaises(InvalidFieldError):
            CombinatorialVectorField.from_json(V.X, partial)
        with self.assertRaises(ComplexDomainError):
            CombinatorialVectorField.from_json(V.X, {'critical': [["Z"]]})


if __name__ == '__main__':
    unittest.main()
