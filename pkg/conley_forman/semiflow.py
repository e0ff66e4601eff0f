import bisect as _bisect
import csv
import io
import json
import logging
import math

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Sequence

from scipy.optimize import bisect

from . import numerics as bd
from . import rand
from .cvf import Arrow, CombinatorialVectorField, FlowCell
from .field import FieldContext, f_bar, f_omega, f_reduced, psi, switching_signature, zero_time
from .geometry import (MEMBERSHIP_TOLERANCE, SNAP_TOLERANCE, characteristic_simplices_float, check_epsilon,
                       check_point, default_epsilon, in_flow_tile)

logger = logging.getLogger(__name__)


DEFAULT_DT = 1e-3
"""Step size of the fixed-step Runge-Kutta scheme."""

EVENT_TOLERANCE = 1e-12
"""Exit points are localized until the exiting coordinate is within this distance of ε."""

EVENT_XTOL = 1e-14
"""Time tolerance of the bisection localizing an exit."""

SWITCH_XTOL = 1e-13
"""Time tolerance of the bisection localizing a switching surface of the field."""

BUDGET_FACTOR = 10
"""A tile is considered never left if no exit happens within BUDGET_FACTOR/ε time units."""

CROSSING_STEP = 1e-6
"""Length of the short steps along ±f used to classify tile crossings."""

STATIONARY_TOLERANCE = 1e-14
"""Points of Y_ω where the field is below this value are treated as rest points."""

STEP_SLACK = 10000
"""Extra steps allowed on top of t_max/dt for the splits at kinks and switching surfaces."""

OUTSIDE_Y, INSIDE_Y = 'outside-Y', 'inside-Y'


class TileMembershipError(ValueError):
    """This error is thrown when an initial point does not lie in the flow tile it is integrated in,
    or when a solution leaves its flow tile without an exit event."""

    def __init__(self, *args):
        super().__init__(*args)


class StepBudgetExceededError(RuntimeError):
    """This error is thrown when the integration of a tile needs more steps than its budget."""

    def __init__(self, *args):
        super().__init__(*args)


class ProgressError(RuntimeError):
    """This error is thrown when the glued semiflow keeps crossing tiles without advancing in time."""

    def __init__(self, *args):
        super().__init__(*args)


def t_budget(eps) -> float:
    return BUDGET_FACTOR / float(eps)


@dataclass
class TileState:
    """A point of the polytope together with the cell whose flow tile it is integrated in."""
    cell: FlowCell
    point: list
    phase: str
    time: float


@dataclass
class TileEvent:
    """A crossing from one flow tile to the next, at the exit point of the old tile."""
    time: float
    point: list
    old: FlowCell
    new: FlowCell


@dataclass
class TileRun:
    """Result of the integration in one flow tile. Times are relative to the start of the run."""
    cell: FlowCell
    times: list[float]
    points: list[list]
    phases: list[str]
    tau: float
    exited: bool = False
    exit_time: float = math.inf
    exit_point: list = None

    @property
    def path(self) -> list[tuple[float, list]]:
        return list(zip(self.times, self.points))

    @property
    def final_point(self) -> list:
        return self.exit_point if self.exited else self.points[-1]


def _rebalance(x: list, ids: Sequence[int]):
    r = (1 - bd.fsum(x)) / len(ids)
    for v in ids:
        x[v] = x[v] + r


class _TileIntegrator:
    """Integrates the field of one flow tile from a given point, in the three stages of the construction: while some
    coordinate outside ω⁺ is nonzero, those coordinates follow the closed form ψ and the others the continuous field
    f̄ evaluated along them; once they all vanish the reduced system on Y_ω takes over."""

    def __init__(self, ctx: FieldContext, dt: float, record: bool):
        self.ctx = ctx
        self.e = ctx.eps_float()
        self.dt = dt
        self.record = record
        self.plus_ids = tuple(ctx.plus.vertices)
        self.steps = 0
        self.budget = None

    def _decoupled(self, t) -> list:
        return [psi(t, z, self.e) for z in self.zeta]

    def _with_outside(self, t, x) -> list:
        xx = list(x)
        for u, z in zip(self.ctx.outside, self._decoupled(t)):
            xx[u] = z
        return xx

    def _rhs(self, t, x, inside_y: bool) -> list:
        if inside_y:
            return f_reduced(x, self.ctx)
        return f_bar(self._with_outside(t, x), self.ctx)

    def step(self, t, x, h, inside_y: bool) -> list:
        """One classical Runge-Kutta step on the ω⁺ coordinates; the outside coordinates are set from ψ."""
        P = self.plus_ids

        def shifted(k, c):
            y = list(x)
            for v in P:
                y[v] = x[v] + c * k[v]
            return y

        k1 = self._rhs(t, x, inside_y)
        k2 = self._rhs(t + h / 2, shifted(k1, h / 2), inside_y)
        k3 = self._rhs(t + h / 2, shifted(k2, h / 2), inside_y)
        k4 = self._rhs(t + h, shifted(k3, h), inside_y)

        xn = list(x)
        for v in P:
            xn[v] = x[v] + h / 6 * (k1[v] + 2 * k2[v] + 2 * k3[v] + k4[v])
        if not inside_y:
            for u, z in zip(self.ctx.outside, self._decoupled(t + h)):
                xn[u] = z

        _rebalance(xn, self.ctx.minus_ids)
        return xn

    def _gap(self, x):
        return min(x[v] for v in self.ctx.minus_ids) - self.e

    def _locate_switch(self, t, x, h, sig0, inside_y):
        lo, hi = 0.0, float(h)
        while hi - lo > SWITCH_XTOL:
            mid = (lo + hi) / 2
            if switching_signature(self.step(t, x, mid, inside_y), self.ctx, inside_y) == sig0:
                lo = mid
            else:
                hi = mid
        return hi

    def _exit(self, t, x, h, inside_y):
        s = bisect(lambda s: float(self._gap(self.step(t, x, s, inside_y))), 0.0, float(h), xtol=EVENT_XTOL)
        xs = self.step(t, x, s, inside_y)

        v = min(self.ctx.minus_ids, key=lambda u: xs[u])
        if abs(xs[v] - self.e) > EVENT_TOLERANCE:
            logger.warning("exit from %s localized only to %.3e", self.ctx.label(), abs(xs[v] - self.e))

        xs[v] = self.e
        others = [u for u in self.ctx.minus_ids if u != v]
        if others:
            _rebalance(xs, others)

        return t + s, xs

    def _check_membership(self, t, x):
        if not in_flow_tile(x, self.ctx.minus, self.ctx.plus, self.e, MEMBERSHIP_TOLERANCE):
            raise TileMembershipError(f"The solution left the tile of {self.ctx.label()} at t = {t} "
                                      f"without an exit event: x = {[float(c) for c in x]}")

    def _count_step(self):
        self.steps += 1
        if self.steps > self.budget:
            raise StepBudgetExceededError(f"More than {self.budget} steps in the tile of {self.ctx.label()}.")

    def _push(self, run: TileRun, t, x, phase):
        if self.record or len(run.times) < 2:
            run.times.append(t)
            run.points.append(x)
            run.phases.append(phase)
        else:
            run.times[-1], run.points[-1], run.phases[-1] = t, x, phase

    def _smooth_stage(self, run: TileRun, t, x, t_end, breaks, inside_y: bool):
        """Runge-Kutta integration on [t, t_end], never stepping over a break point nor a switching surface.
        Returns the final (t, x) and whether an exit happened."""
        phase = INSIDE_Y if inside_y else OUTSIDE_Y
        while t < t_end:
            self._count_step()

            k = _bisect.bisect_right(breaks, t)
            nxt = breaks[k] if k < len(breaks) else t_end
            h = min(self.dt, t_end - t, nxt - t)

            xn = self.step(t, x, h, inside_y)
            sig0 = switching_signature(x, self.ctx, inside_y)
            if switching_signature(xn, self.ctx, inside_y) != sig0:
                h_hi = self._locate_switch(t, x, h, sig0, inside_y)
                if h_hi >= 1e-12:
                    h = h_hi
                    xn = self.step(t, x, h, inside_y)

            if self._gap(xn) <= 0:
                te, xe = self._exit(t, x, h, inside_y)
                run.exited, run.exit_time, run.exit_point = True, te, xe
                self._push(run, te, xe, phase)
                return te, xe, True

            self._check_membership(t + h, xn)
            t, x = t + h, xn
            self._push(run, t, x, phase)

        return t, x, False

    def _critical_stage(self, run: TileRun, t0, x0, t_max):
        """Closed form solution of the linear system x_v' = x_v - 1/(1 + dim ω) on Y_ω of a critical tile."""
        c = bd.make_float(1) / self.ctx.k
        ids = self.ctx.minus_ids

        t_exit = math.inf
        for v in ids:
            if x0[v] < c:
                t_exit = min(t_exit, float(bd.log((c - self.e) / (c - x0[v]))))

        def at(s):
            x = list(x0)
            g = bd.exp(s)
            for v in ids:
                x[v] = c + (x0[v] - c) * g
            _rebalance(x, ids)
            return x

        t_end = min(t0 + t_exit, t_max)
        n = math.ceil((t_end - t0) / self.dt) if t_end > t0 else 0
        for j in range(1, n):
            self._push(run, t0 + j * self.dt, at(j * self.dt), INSIDE_Y)

        if t0 + t_exit <= t_max:
            xe = at(t_exit)
            v = min(ids, key=lambda u: xe[u])
            xe[v] = self.e
            others = [u for u in ids if u != v]
            if others:
                _rebalance(xe, others)
            run.exited, run.exit_time, run.exit_point = True, t0 + t_exit, xe
            self._push(run, t0 + t_exit, xe, INSIDE_Y)
        elif t_end > t0:
            self._push(run, t_end, at(t_end - t0), INSIDE_Y)

    def run(self, x0: list, t_max: float) -> TileRun:
        ctx = self.ctx
        if not in_flow_tile(x0, ctx.minus, ctx.plus, self.e, MEMBERSHIP_TOLERANCE):
            raise TileMembershipError(f"{[float(c) for c in x0]} is not in the tile of {ctx.label()}.")

        x = [bd.make_float(c) for c in x0]
        for u in ctx.outside:
            x[u] = max(x[u], bd.make_float(0))
        self.zeta = [x[u] for u in ctx.outside]

        kinks = sorted(float(zero_time(z, self.e)) for z in self.zeta if z != 0)
        tau = kinks[-1] if kinks else 0.0
        self.budget = math.ceil(t_max / self.dt) + len(kinks) + STEP_SLACK

        run = TileRun(ctx.cell, [], [], [], tau)
        inside = tau == 0
        if inside:
            for u in ctx.outside:
                x[u] = bd.make_float(0)
        self._push(run, 0.0, list(x), INSIDE_Y if inside else OUTSIDE_Y)

        if self._gap(x) <= EVENT_TOLERANCE:
            run.exited, run.exit_time, run.exit_point = True, 0.0, list(x)
            return run

        t = 0.0
        if not inside:
            t, x, exited = self._smooth_stage(run, t, x, min(tau, t_max), kinks, False)
            if exited or t >= t_max:
                return run
            x = list(x)
            for u in ctx.outside:
                x[u] = bd.make_float(0)

        if bd.vmax(f_reduced(x, ctx)) <= STATIONARY_TOLERANCE:
            logger.debug("rest point in the tile of %s", ctx.label())
            self._push(run, t_max, list(x), INSIDE_Y)
            return run

        if ctx.is_critical:
            self._critical_stage(run, t, x, t_max)
        else:
            self._smooth_stage(run, t, x, t_max, [], True)

        return run


def integrate_tile(x0: Sequence, ctx: FieldContext, t_max: float, dt: float = DEFAULT_DT, record: bool = True) -> TileRun:
    """Integrates the semiflow of the flow tile of ctx from x0 until the solution exits the tile or t_max is reached.

    The exit time is the first time a coordinate of ω⁻ decreases to ε; it is localized by bisection and the exiting
    coordinate is set to ε exactly.

    Args:
        x0 (Sequence): a point of the flow tile.
        ctx (FieldContext): the tile.
        t_max (float): the integration horizon.
        dt (float, optional): the Runge-Kutta step size. Defaults to `DEFAULT_DT`.
        record (bool, optional): keep every step of the path, otherwise only the endpoints. Defaults to True.

    Raises:
        TileMembershipError: if x0 is not in the tile, or the solution leaves it without an exit.
        StepBudgetExceededError: if the integration takes too many steps.
    """
    return _TileIntegrator(ctx, dt, record).run(list(x0), t_max)

def exit_time(x: Sequence, ctx: FieldContext, dt: float = DEFAULT_DT) -> float:
    """The exit time T^ω(x) of the tile, or `math.inf` if no exit happens within BUDGET_FACTOR/ε time units
    (a numerical surrogate, which can only be reached in critical tiles)."""
    run = integrate_tile(x, ctx, t_budget(ctx.eps), dt, record=False)
    return run.exit_time if run.exited else math.inf


@dataclass
class Trajectory:
    """A solution of the glued semiflow: samples (t, x, tile) in time order and the tile crossings."""
    V: CombinatorialVectorField
    samples: list[TileState] = dc_field(default_factory=list)
    events: list[TileEvent] = dc_field(default_factory=list)

    @property
    def final(self) -> TileState:
        return self.samples[-1]

    def tiles(self) -> list[FlowCell]:
        """The sequence of visited tiles."""
        return [self.samples[0].cell] + [e.new for e in self.events]

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator='\n')
        w.writerow(['t'] + [f"x_{n}" for n in self.V.X.names] + ['tile'])
        for s in self.samples:
            w.writerow([repr(float(s.time))] + [repr(float(c)) for c in s.point] + [self.V.label(s.cell)])
        return out.getvalue()

    def events_jsonl(self) -> str:
        lines = []
        for e in self.events:
            lines.append(json.dumps({
                't': float(e.time),
                'x': {n: float(c) for n, c in zip(self.V.X.names, e.point)},
                'from': self.V.label(e.old),
                'to': self.V.label(e.new),
            }))
        return ''.join(l + '\n' for l in lines)


class Semiflow:
    """The strongly admissible semiflow of a combinatorial vector field, glued from the flows of its tiles: a solution
    always runs in the tile of the cell owning σ_min of its current point and switches tiles at the exit points."""

    def __init__(self, V: CombinatorialVectorField, eps: Fraction = None, dt: float = DEFAULT_DT,
                 h_func: Callable = None):
        self.V = V
        self.eps = check_epsilon(default_epsilon(V.X) if eps is None else eps, V.X, for_field=True)
        self.dt = dt
        self.contexts = {c: FieldContext(V, c, self.eps, h_func=h_func) for c in V.cells}

    def tile_of(self, x: Sequence) -> FlowCell:
        smin, _ = characteristic_simplices_float([float(c) for c in x], float(self.eps), SNAP_TOLERANCE)
        return self.V.cell(smin)

    def flow(self, x0: Sequence, t_max: float, verbose=False) -> Trajectory:
        """Computes the solution through x0 on [0, t_max].

        Raises:
            GeometryError: if x0 is not a point of the polytope.
            TileMembershipError, StepBudgetExceededError: from the tile integration.
            ProgressError: if more than d tile crossings happen at the same instant.
        """
        check_point([float(c) for c in x0], self.V.X, tol=SNAP_TOLERANCE)

        traj = Trajectory(self.V)
        t, x = 0.0, list(x0)
        cell = self.tile_of(x)
        zero_chain = 0

        log = logger.info if verbose else logger.debug
        while True:
            run = integrate_tile(x, self.contexts[cell], t_max - t, self.dt)
            start = 0 if not traj.samples else 1
            for s, p, ph in zip(run.times[start:], run.points[start:], run.phases[start:]):
                traj.samples.append(TileState(cell, p, ph, t + s))

            if not run.exited or t + run.exit_time >= t_max:
                break

            zero_chain = zero_chain + 1 if run.exit_time == 0 else 0
            if zero_chain > self.V.X.d:
                raise ProgressError(f"{zero_chain} tile crossings at t = {t} without progress; "
                                    f"tile {self.V.label(cell)}, x = {[float(c) for c in x]}")

            t, x = t + run.exit_time, run.exit_point
            new = self.tile_of(x)
            traj.events.append(TileEvent(t, x, cell, new))
            log("t = %.6f: %s -> %s", t, self.V.label(cell), self.V.label(new))
            cell = new

        return traj

    def phi(self, t: float, x: Sequence) -> list:
        """The point φ(t, x)."""
        return self.flow(x, t).final.point


def glued_flow(V: CombinatorialVectorField, x0: Sequence, t_max: float, dt: float = DEFAULT_DT,
               eps: Fraction = None, verbose=False) -> Trajectory:
    return Semiflow(V, eps, dt).flow(x0, t_max, verbose=verbose)

def simulate_batch(V: CombinatorialVectorField, starts: Sequence[Sequence], t_max: float, dt: float = DEFAULT_DT,
                   eps: Fraction = None, verbose=False) -> list[Trajectory]:
    """Independent solutions from each of the given starting points."""
    sf = Semiflow(V, eps, dt)
    out = []
    for k, x0 in enumerate(starts):
        out.append(sf.flow(x0, t_max))
        if verbose:
            logger.info("trajectory %d/%d: %d crossings", k + 1, len(starts), len(out[-1].events))
    return out


@dataclass
class AdmissibilityReport:
    """Counts gathered by `admissibility_suite`. The semiflow passes when every violation count is zero."""
    trajectories: int = 0
    crossings: int = 0
    direction_violations: int = 0
    handoff_violations: int = 0
    tangencies: int = 0
    arrow_visits: int = 0
    unfinished_arrow_visits: int = 0
    residence_violations: int = 0
    residence_budget: float = 0.0
    max_residence: float = 0.0
    errors: list[str] = dc_field(default_factory=list)
    runs: list[Trajectory] = dc_field(default_factory=list, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return (self.direction_violations == 0 and self.handoff_violations == 0 and self.tangencies == 0
                and self.residence_violations == 0 and not self.errors)

    def to_json(self) -> dict:
        return {
            'trajectories': self.trajectories,
            'crossings': self.crossings,
            'direction_violations': self.direction_violations,
            'handoff_violations': self.handoff_violations,
            'tangencies': self.tangencies,
            'arrow_visits': self.arrow_visits,
            'unfinished_arrow_visits': self.unfinished_arrow_visits,
            'residence_violations': self.residence_violations,
            'residence_budget': self.residence_budget,
            'max_residence': self.max_residence,
            'errors': list(self.errors),
            'ok': self.ok,
            'budget_note': 'arrow visits still running at t_max are continued up to the residence budget, by default the '
                           'numerical surrogate BUDGET_FACTOR/epsilon',
        }


def check_crossing(sf: Semiflow, event: TileEvent) -> tuple[bool, bool, bool]:
    """Classifies a tile crossing by short steps x* - δ f^old(x*) and x* + δ f^new(x*).

    Returns:
        tuple[bool, bool, bool]: whether the steps leave through the walls σ_max \\ σ_min in the right direction,
        whether the hand-off matches the point (the new tile is the one of the cell owning σ_min, and the old cell owns
        a simplex between σ_min and σ_max), and whether there is no tangency (the forward step is outside the old
        tile).
    """
    x = event.point
    e = float(sf.eps)
    smin, smax = characteristic_simplices_float([float(c) for c in x], e, SNAP_TOLERANCE)
    walls = [v for v in smax if v not in smin]

    f_old = f_omega(x, sf.contexts[event.old])
    f_new = f_omega(x, sf.contexts[event.new])
    back = [c - CROSSING_STEP * f for c, f in zip(x, f_old)]
    fwd = [c + CROSSING_STEP * f for c, f in zip(x, f_new)]

    direction = all(back[v] > x[v] and fwd[v] < x[v] for v in walls)
    old = event.old
    expected = sf.V.cell(smin) if smin in sf.V.X else None
    handoff = event.new == expected and any(smin.is_face_of(s) and s.is_face_of(smax) for s in old.simplices)
    no_tangency = event.new != old and not in_flow_tile(fwd, old.minus, old.plus, e, EVENT_TOLERANCE)

    return direction, handoff, no_tangency

def admissibility_suite(V: CombinatorialVectorField, eps: Fraction = None, n_samples: int = 200, seed: int = 42,
                        t_max: float = 10.0, dt: float = DEFAULT_DT, h_func: Callable = None,
                        residence_budget: float = None, keep_trajectories=False, verbose=False) -> AdmissibilityReport:
    """Checks the admissibility of the semiflow on seeded random trajectories: every crossing goes from the tile of
    σ_max to the tile of σ_min of the crossing point, arrow tiles are left in finite time, and no trajectory is
    tangent to a tile wall.

    Args:
        h_func (Callable, optional): replacement for h in all tiles, for negative controls.
        residence_budget (float, optional): time within which every visit of an arrow tile has to end. A trajectory
            that is still in an arrow tile at t_max is continued in that tile until it exits or the budget is used up.
            Defaults to BUDGET_FACTOR/ε.
        keep_trajectories (bool, optional): keep the computed trajectories in `runs`. Defaults to False.

    Returns:
        AdmissibilityReport: the counts. Errors raised by the integration (a solution leaving its tile without exit,
        budget or progress failures) are recorded as violations.
    """
    sf = Semiflow(V, eps, dt, h_func=h_func)
    rng = rand.make_rng(seed)
    report = AdmissibilityReport()
    budget = t_budget(sf.eps) if residence_budget is None else residence_budget
    report.residence_budget = budget

    for k in range(n_samples):
        x0 = rand.random_point(V.X, rng)
        report.trajectories += 1
        try:
            traj = sf.flow(x0, t_max)
        except (TileMembershipError, StepBudgetExceededError, ProgressError) as err:
            report.errors.append(f"trajectory {k}: {err}")
            continue

        if keep_trajectories:
            report.runs.append(traj)

        entered = 0.0
        for ev in traj.events:
            report.crossings += 1
            direction, handoff, no_tangency = check_crossing(sf, ev)
            report.direction_violations += not direction
            report.handoff_violations += not handoff
            report.tangencies += not no_tangency

            if isinstance(ev.old, Arrow):
                report.arrow_visits += 1
                report.max_residence = max(report.max_residence, ev.time - entered)
            entered = ev.time

        last = traj.final
        if isinstance(last.cell, Arrow):
            report.arrow_visits += 1
            report.unfinished_arrow_visits += 1
            residence = last.time - entered
            try:
                run = integrate_tile(last.point, sf.contexts[last.cell], budget - residence, dt, record=False) \
                    if residence < budget else None
            except (TileMembershipError, StepBudgetExceededError) as err:
                report.errors.append(f"trajectory {k}, continued in {V.label(last.cell)}: {err}")
                run = None

            if run is not None and run.exited:
                report.max_residence = max(report.max_residence, residence + run.exit_time)
            else:
                report.residence_violations += 1
                logger.debug("trajectory %d does not leave the tile of %s within %g", k, V.label(last.cell), budget)

        if verbose:
            logger.info("trajectory %d/%d: %d crossings", k + 1, n_samples, len(traj.events))

    if n_samples == 0:
        logger.warning("admissibility suite: no samples")

    logger.debug("admissibility report: %s", report)
    return report


def morse_consistency(trajectories: Sequence[Trajectory], graph) -> list[str]:
    """Checks long trajectories against a Morse graph: each one has to end in the tile of a cell inside a Morse set,
    and the successive Morse sets it visits have to be ordered by the graph.

    Returns:
        list[str]: the violations.
    """
    report = []
    for k, traj in enumerate(trajectories):
        last = traj.final.cell
        if all(graph.morse_set_of(s) is None for s in last.simplices):
            report.append(f"trajectory {k} ends in the tile of {traj.V.label(last)}, outside every Morse set")

        visited = []
        for cell in traj.tiles():
            p = graph.morse_set_of(cell.minus)
            if p is None:
                p = graph.morse_set_of(cell.plus)
            if p is not None and (not visited or visited[-1] != p):
                visited.append(p)

        for p, q in zip(visited, visited[1:]):
            if (p, q) not in graph.reach:
                report.append(f"trajectory {k} goes from Morse set {p} to Morse set {q} against the order")

    return report
