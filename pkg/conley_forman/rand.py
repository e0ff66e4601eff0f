import numpy as np

from fractions import Fraction

from .complex import SimplicialComplex
from .cvf import CombinatorialVectorField, FlowCell


def make_rng(seed: int = None) -> np.random.Generator:
    return np.random.default_rng(seed)

def random_point(X: SimplicialComplex, rng: np.random.Generator) -> list[float]:
    """A point of the polytope of X: uniform on a maximal simplex chosen uniformly."""
    tops = X.maximal_simplices()
    sigma = tops[rng.integers(len(tops))]

    x = [0.0] * X.d
    for v, w in zip(sigma, rng.dirichlet(np.ones(len(sigma)))):
        x[v] = float(w)
    return x

def random_points(X: SimplicialComplex, n: int, seed: int = None) -> list[list[float]]:
    rng = make_rng(seed)
    return [random_point(X, rng) for _ in range(n)]


def tile_point(V: CombinatorialVectorField, cell: FlowCell, eps: Fraction, rng: np.random.Generator,
               pin: float = 0.3) -> list[float]:
    """A point of the flow tile of a cell. With probability `pin` each coordinate is drawn close to ε instead of
    uniformly, so that the sign bounds near the tile boundary get exercised:
    coordinates outside ω⁺ land in [7ε/8, ε], x_{v⁺} within ε²/(8 + 4ε) of ε and one coordinate of ω⁻ in [ε, 2ε].
    Otherwise x_{v⁺} is drawn from [0, 2ε] or from the whole mass left over by the other coordinates.
    """
    X = V.X
    e = float(eps)
    plus, minus = cell.plus, cell.minus

    cofaces = [s for s in X.simplices if plus.is_face_of(s)]
    tau = cofaces[rng.integers(len(cofaces))]

    x = [0.0] * X.d
    for u in tau:
        if u in plus:
            continue
        x[u] = e * (1 - rng.uniform(0, 1 / 8)) if rng.random() < pin else rng.uniform(0, e)

    for p in plus:
        if p in minus:
            continue
        if rng.random() < pin:
            w = e * e / (8 + 4 * e)
            x[p] = e + rng.uniform(-w, w)
        elif rng.random() < 0.5:
            x[p] = rng.uniform(0, 2 * e)
        else:
            x[p] = rng.uniform(0, 1 - sum(x) - len(minus.vertices) * e)

    ids = list(minus)
    slack = 1 - sum(x) - len(ids) * e
    for v, w in zip(ids, rng.dirichlet(np.ones(len(ids)))):
        x[v] = e + slack * float(w)

    if len(ids) > 1 and rng.random() < pin:
        v, other = rng.choice(ids, size=2, replace=False)
        target = e + rng.uniform(0, e)
        if x[other] + x[v] - target >= e:
            x[other] += x[v] - target
            x[v] = target

    return x

def boundary_point(V: CombinatorialVectorField, cell: FlowCell, eps: Fraction, rng: np.random.Generator,
                   tries: int = 20) -> list[float] | None:
    """A point of the flow tile of a cell with one coordinate exactly ε, on the wall x_u = ε of some vertex u ∉ ω⁺
    or x_v = ε of some v ∈ ω⁻. The mass moved off a wall of ω⁻ goes to another vertex of ω⁺, so the exit walls of
    arrows with a single-vertex tail are reached as well. None if no such point was drawn in `tries` attempts."""
    e = float(eps)
    ids = list(cell.minus)
    extra = [p for p in cell.plus if p not in cell.minus]

    for _ in range(tries):
        x = tile_point(V, cell, eps, rng)
        walls = [u for u, t in enumerate(x) if 0 < t < e and u not in cell.plus]
        if len(ids) > 1 or extra:
            walls += ids

        if not walls:
            continue

        u = walls[rng.integers(len(walls))]
        sinks = [v for v in ids if v != u] + extra if u in cell.minus else ids
        sink = max(sinks, key=lambda v: x[v])
        x[sink] += x[u] - e
        x[u] = e
        if x[sink] >= (e if sink in cell.minus else 0):
            return x

    return None
