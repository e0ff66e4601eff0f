import logging

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from . import numerics as bd
from . import rand
from .complex import Simplex
from .cvf import CombinatorialVectorField, FlowCell, InvalidFieldError
from .geometry import SNAP_TOLERANCE, GeometryError, characteristic_simplices_float, check_epsilon, default_epsilon

logger = logging.getLogger(__name__)


Y_TOLERANCE = 1e-24
"""A floating point x is considered to lie in Y_ω when Σ_{u ∉ ω⁺} x_u² does not exceed this value."""


def g(s, eps):
    """g(s) = ∛(ε² s), odd on the whole real line."""
    return bd.cbrt(eps * eps * s)

def h(s, eps):
    """h(s) = 1 away from ε, with a Lipschitz dip down to -ε/2 at s = ε on |s - ε| ≤ ε/2."""
    r = bd.abs(s - eps)
    if r >= eps / 2:
        return bd.make_float(1)
    return (1 + eps / 2) * (2 / eps) * r - eps / 2

def psi(t, zeta, eps):
    """The forward solution of s' = -g(s), s(0) = ζ: it decays as sgn(ζ)|ζ|(1 - t/t*)^(3/2) and stays at zero
    from t* = 3/2 (|ζ|/ε)^(2/3) on.

    Raises:
        ValueError: for t < 0.
    """
    if t < 0:
        raise ValueError("The decoupled solution is only defined forward in time.")
    if zeta == 0:
        return bd.make_float(0)

    t_star = zero_time(zeta, eps)
    if t >= t_star:
        return bd.make_float(0)

    return bd.sign(zeta) * bd.abs(zeta) * bd.power(1 - t / t_star, 1.5)

def zero_time(zeta, eps):
    """The time t* = 3/2 (|ζ|/ε)^(2/3) at which the decoupled solution reaches zero."""
    return bd.make_float(1.5) * bd.power(bd.abs(zeta) / eps, bd.make_float(2) / 3)


class FieldContext:
    """The data defining the vector field f^ω of one cell ω of a combinatorial vector field: ω⁻ ⊆ ω⁺, the extra vertex
    v⁺ of an arrow, the number of vertices d and ε < 1/(6d).

    Contexts are only built from cells of a valid field; arbitrary pairs of simplices are rejected.
    """

    def __init__(self, V: CombinatorialVectorField, cell: FlowCell, eps: Fraction = None,
                 h_func: Callable = None):
        """
        Args:
            V (CombinatorialVectorField): the vector field.
            cell (FlowCell): a cell of V.
            eps (Fraction, optional): ε, defaults to 1/(8d).
            h_func (Callable, optional): replacement for the function h, called as `h_func(s, eps)`.
                Only meant for fault injection in the verification suite.

        Raises:
            InvalidFieldError: if the cell does not belong to V.
            GeometryError: if ε is not smaller than 1/(6d).
        """
        if cell not in V.cells:
            raise InvalidFieldError([f"{cell} is not a cell of the vector field"])

        self.V = V
        self.cell = cell
        self.d = V.X.d
        self.eps = check_epsilon(default_epsilon(V.X) if eps is None else eps, V.X, for_field=True)

        self.minus = cell.minus
        self.plus = cell.plus
        extra = [v for v in self.plus if v not in self.minus]
        self.vplus = extra[0] if extra else None

        self.minus_ids = tuple(self.minus.vertices)
        self.outside = tuple(v for v in range(self.d) if v not in self.plus)
        self.not_minus = tuple(v for v in range(self.d) if v not in self.minus)

        self.h_func = h if h_func is None else h_func

    @classmethod
    def from_cell(cls, V: CombinatorialVectorField, sigma: Simplex, eps: Fraction = None):
        """The context of the cell of V owning the simplex sigma."""
        return cls(V, V.cell(sigma), eps)

    def with_h(self, h_func: Callable) -> 'FieldContext':
        """A copy of the context evaluating `h_func` in place of h."""
        return FieldContext(self.V, self.cell, self.eps, h_func=h_func)

    @property
    def is_critical(self) -> bool:
        return self.vplus is None

    @property
    def k(self) -> int:
        return len(self.minus_ids)

    def eps_float(self):
        return bd.make_float(self.eps)

    def h(self, s):
        return self.h_func(s, self.eps_float())

    def g(self, s):
        return g(s, self.eps_float())

    def label(self) -> str:
        return self.V.label(self.cell)

    def __repr__(self):
        return f"FieldContext({self.label()}, eps={self.eps})"


def _as_floats(x: Sequence) -> Sequence:
    if any(isinstance(t, (int, Fraction)) for t in x):
        return [bd.make_float(t) for t in x]
    return x

def in_y(x: Sequence, ctx: FieldContext) -> bool:
    """Whether x lies in Y_ω, i.e. all coordinates outside ω⁺ vanish. Exact for rational input."""
    if all(isinstance(x[u], (int, Fraction)) for u in ctx.outside):
        return all(x[u] == 0 for u in ctx.outside)
    return sum(x[u] * x[u] for u in ctx.outside) <= Y_TOLERANCE

def theta(x: Sequence, ctx: FieldContext):
    """θ^ω(x) = min({ε} ∪ {x_u - ε : u ∈ ω⁻})."""
    x = _as_floats(x)
    e = ctx.eps_float()
    return min([e] + [x[u] - e for u in ctx.minus_ids])

def eta(s, x: Sequence, ctx: FieldContext):
    """The gate η^ω(s, x): 1 on Y_ω or for |s| > ε/4, otherwise 4|s|/ε."""
    e = ctx.eps_float()
    s = _as_floats([s])[0]
    if in_y(x, ctx) or bd.abs(s) > e / 4:
        return bd.make_float(1)
    return 4 * bd.abs(s) / e

def _gate_bar(s, ctx: FieldContext):
    e = ctx.eps_float()
    return min(bd.make_float(1), 4 * bd.abs(s) / e)

def _evaluate(x: Sequence, ctx: FieldContext, gate: str) -> list:
    inside = in_y(x, ctx) if gate == 'eta' else False
    x = _as_floats(x)
    e = ctx.eps_float()
    f = [None] * ctx.d

    for u in ctx.outside:
        f[u] = -g(x[u], e)

    if ctx.vplus is not None:
        s = x[ctx.vplus]
        match gate:
            case 'eta':
                w = bd.make_float(1) if inside or bd.abs(s) > e / 4 else 4 * bd.abs(s) / e
            case 'bar':
                w = _gate_bar(s, ctx)
            case _:
                w = bd.make_float(1)
        out_sum = bd.fsum([x[u] for u in ctx.outside])
        f[ctx.vplus] = w * (ctx.h(s) + theta(x, ctx) - out_sum)

    balance = bd.fsum([x[u] for u in ctx.minus_ids] + [f[u] for u in ctx.not_minus]) / ctx.k
    for v in ctx.minus_ids:
        f[v] = x[v] - balance

    return f

def f_omega(x: Sequence, ctx: FieldContext) -> list:
    """The vector field f^ω at x, with the gate η^ω on the v⁺-component."""
    return _evaluate(x, ctx, 'eta')

def f_bar(x: Sequence, ctx: FieldContext) -> list:
    """The continuous modification of f^ω: the gate is replaced by min{1, 4|x_{v⁺}|/ε}. It agrees with f^ω off Y_ω."""
    return _evaluate(x, ctx, 'bar')

def f_reduced(x: Sequence, ctx: FieldContext) -> list:
    """f^ω with the gate fixed to 1, which is the field on Y_ω (the reduced system of the stage inside Y_ω)."""
    return _evaluate(x, ctx, 'one')

def tau_omega(x: Sequence, ctx: FieldContext):
    """τ^ω(x) = max over u ∉ ω⁺ of 3/2 (x_u/ε)^(2/3), the time after which the decoupled coordinates vanish."""
    x = _as_floats(x)
    e = ctx.eps_float()
    return max([zero_time(x[u], e) for u in ctx.outside], default=bd.make_float(0))


def switching_signature(x: Sequence, ctx: FieldContext, inside_y: bool) -> tuple:
    """The branch pattern of the piecewise definitions entering the field at x: the branch of h at x_{v⁺}, the branch
    of the gate min{1, 4|x_{v⁺}|/ε} (outside Y_ω only) and the active term of the minimum defining θ^ω.
    The field is smooth in x as long as the signature does not change."""
    if ctx.vplus is None:
        return ()

    x = _as_floats(x)
    e = ctx.eps_float()
    s = x[ctx.vplus]

    if bd.abs(s - e) >= e / 2:
        hb = 0
    else:
        hb = -1 if s < e else 1

    gb = None if inside_y else (4 * bd.abs(s) >= e)

    tb = -1
    m = min(ctx.minus_ids, key=lambda u: x[u])
    if x[m] - e < e:
        tb = m

    return (hb, gb, tb)


@dataclass
class BoundReport:
    """Outcome of the sign bounds near flow tile boundaries: for each item, None if its hypothesis is not met,
    True if the bound holds and False if it is violated."""
    a: bool | None = None
    b: bool | None = None
    c: bool | None = None

    @property
    def ok(self) -> bool:
        return self.a is not False and self.b is not False and self.c is not False

    def applicable(self) -> bool:
        return any(v is not None for v in (self.a, self.b, self.c))


def _merge(old: bool | None, new: bool) -> bool:
    return new if old is None else (old and new)

def bound_checks(x: Sequence, ctx: FieldContext, f: Sequence = None) -> BoundReport:
    """Checks the sign bounds of f^ω at a point x of the flow tile:

    (a) f_v ≤ -1/(4d) for v ∈ ω⁻ with |x_v - ε| ≤ ε;
    (b) f_v ≤ -ε/2 for v ∉ ω⁺ with |x_v - ε| ≤ ε/2;
    (c) f_{v⁺} ≤ -ε/8 when |x_{v⁺} - ε| ≤ ε²/(8 + 4ε) and some other vertex has |x_v - ε| ≤ ε/8.

    Items whose hypotheses are not met are reported as not applicable.
    """
    f = f_omega(x, ctx) if f is None else f
    x = _as_floats(x)
    e = ctx.eps_float()
    rep = BoundReport()

    for v in ctx.minus_ids:
        if bd.abs(x[v] - e) <= e:
            rep.a = _merge(rep.a, f[v] <= bd.make_float(-1) / (4 * ctx.d))

    for v in ctx.outside:
        if bd.abs(x[v] - e) <= e / 2:
            rep.b = _merge(rep.b, f[v] <= -e / 2)

    if ctx.vplus is not None:
        p = ctx.vplus
        near = any(bd.abs(x[v] - e) <= e / 8 for v in range(ctx.d) if v != p)
        if near and bd.abs(x[p] - e) <= e * e / (8 + 4 * e):
            rep.c = f[p] <= -e / 8

    return rep

def boundary_direction(x: Sequence, ctx: FieldContext, snap: float = SNAP_TOLERANCE) -> list[int] | None:
    """Checks that f^ω points into the tile of σ_min at a boundary point x of the flow tile, i.e. f_v(x) < 0 for every
    vertex v of σ_max(x) \\ σ_min(x).

    Returns:
        list[int] | None: the violating vertices, or None if x is not a boundary point of the tile.
    """
    try:
        smin, smax = characteristic_simplices_float([float(t) for t in x], float(ctx.eps), snap)
    except GeometryError:
        return None

    walls = [v for v in smax if v not in smin]
    if not [v for v in walls if v != ctx.vplus]:
        return None # only the internal wall of an arrow tile

    f = f_omega(x, ctx)
    return [v for v in walls if not f[v] < 0]


CONSERVATION_TOLERANCE = 1e-12
"""Allowed floating deviation of Σ_v f_v from zero."""


@dataclass
class FieldSuiteReport:
    """Counts gathered by `property_suite` over the sampled points of every tile."""
    samples: int = 0
    max_conservation_error: float = 0.0
    max_norm: float = 0.0
    bounds_applicable: dict = None
    bound_violations: dict = None
    direction_checks: int = 0
    direction_violations: int = 0
    modification_mismatches: int = 0

    def __post_init__(self):
        self.bounds_applicable = self.bounds_applicable or {'a': 0, 'b': 0, 'c': 0}
        self.bound_violations = self.bound_violations or {'a': 0, 'b': 0, 'c': 0}

    @property
    def ok(self) -> bool:
        return (self.max_conservation_error <= CONSERVATION_TOLERANCE and not any(self.bound_violations.values())
                and self.direction_violations == 0 and self.modification_mismatches == 0)


def property_suite(V: CombinatorialVectorField, eps: Fraction = None, n_samples: int = 1000, seed: int = 42,
                   verbose=False) -> FieldSuiteReport:
    """Samples points of every flow tile, pinned near ε with some probability, and boundary points with one
    coordinate exactly ε, and checks: Σ f = 0, the sign bounds near the tile boundaries, the direction of the field on
    the tile walls and the agreement of f̄ with f off Y_ω.

    Args:
        n_samples (int, optional): number of points per tile, and of boundary points per tile. Defaults to 1000.
    """
    rep = FieldSuiteReport()
    rng = rand.make_rng(seed)

    for cell in V.flow_cells():
        ctx = FieldContext(V, cell, eps)
        for _ in range(n_samples):
            x = rand.tile_point(V, cell, ctx.eps, rng)
            f = f_omega(x, ctx)
            rep.samples += 1

            rep.max_conservation_error = max(rep.max_conservation_error, float(bd.abs(bd.fsum(f))))
            rep.max_norm = max(rep.max_norm, float(bd.vmax([bd.abs(c) for c in f])))

            b = bound_checks(x, ctx, f)
            for item in ('a', 'b', 'c'):
                r = getattr(b, item)
                if r is not None:
                    rep.bounds_applicable[item] += 1
                    rep.bound_violations[item] += not r

            if not in_y(x, ctx):
                fb = f_bar(x, ctx)
                if ctx.vplus is not None and bd.abs(fb[ctx.vplus] - f[ctx.vplus]) > CONSERVATION_TOLERANCE:
                    rep.modification_mismatches += 1

            y = rand.boundary_point(V, cell, ctx.eps, rng)
            if y is None:
                continue
            bad = boundary_direction(y, ctx)
            if bad is not None:
                rep.direction_checks += 1
                if bad:
                    rep.direction_violations += 1
                    logger.debug("field of %s does not point inward at %s: vertices %s", ctx.label(), y, bad)

        if verbose:
            logger.info("tile %s: %d samples", ctx.label(), rep.samples)

    return rep
