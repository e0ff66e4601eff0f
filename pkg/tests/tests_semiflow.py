import json
import math
import unittest

from scipy.integrate import solve_ivp

from conley_forman.catalog import periodic_triangle, running_example
from conley_forman.conley import finest_morse_decomposition
from conley_forman.cvf import Arrow, Critical
from conley_forman.field import FieldContext, f_reduced, h, psi
from conley_forman.geometry import GeometryError
from conley_forman.semiflow import OUTSIDE_Y, Semiflow, TileEvent, TileMembershipError, admissibility_suite, check_crossing, exit_time, integrate_tile, morse_consistency, simulate_batch


DT = 1e-2
EPS = 1 / 48


def running_point(**coords):
    x = [0.0] * 6
    for name, t in coords.items():
        x["ABCDEF".index(name)] = t
    return x


class TileIntegrationTestCase(unittest.TestCase):

    def test_rest_point(self):
        V = running_example()
        ctx = FieldContext.from_cell(V, V.X.simplex("ABD"))

        x0 = running_point(A=1 / 3, B=1 / 3, D=1 / 3)
        run = integrate_tile(x0, ctx, 5.0, DT)
        self.assertFalse(run.exited)
        self.assertEqual(run.times[-1], 5.0)
        self.assertEqual(exit_time(x0, ctx, DT), math.inf)

    def test_critical_exit(self):
        V = running_example()
        ctx = FieldContext.from_cell(V, V.X.simplex("ABD"))

        # x_A = 1/3 + (0.3 - 1/3) e^t reaches ε at t = log(9.375)
        run = integrate_tile(running_point(A=0.3, B=0.35, D=0.35), ctx, 5.0, DT)
        self.assertTrue(run.exited)
        self.assertAlmostEqual(run.exit_time, math.log(9.375), delta=1e-12)
        self.assertEqual(run.exit_point[0], EPS)
        self.assertAlmostEqual(sum(run.exit_point), 1, delta=1e-12)

    def test_arrow_exit(self):
        V = running_example()
        ctx = FieldContext.from_cell(V, V.X.simplex("AD"))
        x0 = running_point(A=0.9, D=0.1)

        run = integrate_tile(x0, ctx, 5.0, DT)
        self.assertTrue(run.exited)
        self.assertLess(run.exit_time, 1.0)
        self.assertEqual(run.exit_point[0], EPS)
        self.assertAlmostEqual(exit_time(x0, ctx, DT), run.exit_time, delta=1e-12)

        run = integrate_tile(x0, ctx, 5.0, DT, record=False)
        self.assertEqual(len(run.times), 2)
        self.assertEqual(run.times[0], 0.0)

    def test_reference_solver(self):
        # inside Y the Runge-Kutta path agrees with an adaptive high order solver
        V = running_example()
        ctx = FieldContext.from_cell(V, V.X.simplex("AD"))
        x0 = running_point(A=0.9, D=0.1)

        run = integrate_tile(x0, ctx, 0.5, DT)
        ref = solve_ivp(lambda t, y: f_reduced(list(y), ctx), (0, 0.5), x0, method='DOP853', rtol=1e-12, atol=1e-14)

        self.assertTrue(ref.success)
        for a, b in zip(run.final_point, ref.y[:, -1]):
            self.assertAlmostEqual(a, b, delta=1e-9)

    def test_not_in_tile(self):
        V = running_example()
        ctx = FieldContext.from_cell(V, V.X.simplex("ABD"))

        with self.assertRaises(TileMembershipError):
            integrate_tile(running_point(A=0.9, D=0.1), ctx, 1.0, DT)


class SemiflowTestCase(unittest.TestCase):

    def test_arrow_chain(self):
        V = running_example()
        X = V.X
        sf = Semiflow(V, dt=DT)

        traj = sf.flow(running_point(A=0.9, D=0.1), 10.0)
        self.assertEqual([V.label(c) for c in traj.tiles()], ["A->AD", "D->DF", "F"])
        self.assertAlmostEqual(traj.final.time, 10.0, delta=1e-9)
        for a, b in zip(traj.final.point, running_point(F=1.0)):
            self.assertAlmostEqual(a, b, delta=1e-9)

        for ev in traj.events:
            self.assertEqual(check_crossing(sf, ev), (True, True, True))

        # the coordinate x_A left behind decays along the closed form
        t0 = traj.events[0].time
        A = X.vertex_id("A")
        samples = [s for s in traj.samples if s.cell == Arrow(X.simplex("D"), X.simplex("DF")) and s.phase == OUTSIDE_Y]
        self.assertTrue(samples)
        for s in samples:
            self.assertAlmostEqual(s.point[A], psi(s.time - t0, EPS, EPS), delta=1e-12)

    def test_critical_chain(self):
        V = running_example()
        traj = Semiflow(V, dt=DT).flow(running_point(A=0.3, B=0.35, D=0.35), 10.0)

        self.assertEqual([V.label(c) for c in traj.tiles()], ["ABD", "BD"])
        self.assertAlmostEqual(traj.events[0].time, math.log(9.375), delta=1e-12)
        for a, b in zip(traj.final.point, running_point(B=0.5, D=0.5)):
            self.assertAlmostEqual(a, b, delta=1e-6)

    def test_rest_point(self):
        V = running_example()
        x0 = running_point(A=1 / 3, B=1 / 3, D=1 / 3)
        traj = Semiflow(V, dt=DT).flow(x0, 5.0)

        self.assertEqual(traj.events, [])
        self.assertEqual(traj.final.cell, Critical(V.X.simplex("ABD")))
        for a, b in zip(traj.final.point, x0):
            self.assertAlmostEqual(a, b, delta=1e-15)

    def test_crossing_classification(self):
        V = running_example()
        X = V.X
        sf = Semiflow(V, dt=DT)
        x = running_point(A=EPS, D=1 - EPS)
        arrow = V.cell(X.simplex("AD"))
        self.assertEqual(sf.tile_of(x), V.cell(X.simplex("D")))

        self.assertEqual(check_crossing(sf, TileEvent(0.0, x, arrow, sf.tile_of(x))), (True, True, True))

        # the tile of F is nowhere near x
        _, handoff, _ = check_crossing(sf, TileEvent(0.0, x, Critical(X.simplex("F")), sf.tile_of(x)))
        self.assertFalse(handoff)

        _, handoff, _ = check_crossing(sf, TileEvent(0.0, x, arrow, Critical(X.simplex("F"))))
        self.assertFalse(handoff)

    def test_semiflow_law(self):
        sf = Semiflow(running_example(), dt=DT)
        x0 = running_point(A=0.9, D=0.1)

        for s, t in [(0.5, 2.0), (1.0, 1.5), (0.25, 4.0)]:
            direct = sf.phi(s + t, x0)
            composed = sf.phi(t, sf.phi(s, x0))
            for a, b in zip(direct, composed):
                self.assertAlmostEqual(a, b, delta=1e-6)

    def test_rejections(self):
        V = running_example()

        with self.assertRaises(GeometryError):
            Semiflow(V, eps=1 / 30)
        with self.assertRaises(GeometryError):
            Semiflow(V, dt=DT).flow(running_point(A=0.5, C=0.5), 1.0)

    def test_exports(self):
        V = running_example()
        traj = Semiflow(V, dt=DT).flow(running_point(A=0.9, D=0.1), 10.0)

        lines = traj.to_csv().splitlines()
        self.assertEqual(lines[0], "t,x_A,x_B,x_C,x_D,x_E,x_F,tile")
        self.assertTrue(lines[1].endswith(",A->AD"))
        self.assertTrue(lines[-1].endswith(",F"))
        self.assertEqual(len(lines), len(traj.samples) + 1)

        events = [json.loads(l) for l in traj.events_jsonl().splitlines()]
        self.assertEqual(len(events), 2)
        self.assertEqual(set(events[0]), {'t', 'x', 'from', 'to'})
        self.assertEqual((events[0]['from'], events[0]['to']), ("A->AD", "D->DF"))
        self.assertEqual(events[1]['x']['D'], EPS)

    def test_batch(self):
        V = running_example()
        starts = [running_point(A=0.9, D=0.1), running_point(A=1 / 3, B=1 / 3, D=1 / 3)]
        trajs = simulate_batch(V, starts, 3.0, DT)

        self.assertEqual(len(trajs), 2)
        self.assertEqual(len(trajs[1].events), 0)


class AdmissibilityTestCase(unittest.TestCase):

    def test_running_example(self):
        rep = admissibility_suite(running_example(), n_samples=8, seed=1, t_max=6.0, dt=DT)

        self.assertEqual(rep.trajectories, 8)
        self.assertEqual(rep.errors, [])
        self.assertTrue(rep.ok)
        self.assertGreater(rep.crossings, 0)
        self.assertTrue(rep.to_json()['ok'])

    def test_periodic_triangle(self):
        rep = admissibility_suite(periodic_triangle(), n_samples=4, seed=2, t_max=6.0, dt=DT)
        self.assertTrue(rep.ok)
        self.assertGreater(rep.arrow_visits, 0)

    def test_negative_control(self):
        rep = admissibility_suite(running_example(), n_samples=8, seed=1, t_max=6.0, dt=DT,
                                  h_func=lambda s, eps: -h(s, eps))
        self.assertFalse(rep.ok)

    def test_stalled_arrow(self):
        # with h = -ε the mass never flows from the tail to the head, so no arrow tile is ever left
        rep = admissibility_suite(periodic_triangle(), n_samples=4, seed=2, t_max=2.0, dt=DT,
                                  h_func=lambda s, eps: -eps, residence_budget=5.0)

        self.assertEqual(rep.unfinished_arrow_visits, 4)
        self.assertEqual(rep.residence_violations, 4)
        self.assertEqual(rep.residence_budget, 5.0)
        self.assertFalse(rep.ok)
        self.assertFalse(rep.to_json()['ok'])


class MorseConsistencyTestCase(unittest.TestCase):

    def test_trajectories(self):
        V = running_example()
        graph = finest_morse_decomposition(V)
        sf = Semiflow(V, dt=DT)

        trajs = [sf.flow(running_point(A=0.9, D=0.1), 10.0), sf.flow(running_point(A=0.3, B=0.35, D=0.35), 10.0)]
        self.assertEqual(morse_consistency(trajs, graph), [])

        short = sf.flow(running_point(A=0.9, D=0.1), 0.1)
        report = morse_consistency([short], graph)
        self.assertEqual(len(report), 1)
        self.assertIn("outside every Morse set", report[0])


if __name__ == '__main__':
    unittest.main()
