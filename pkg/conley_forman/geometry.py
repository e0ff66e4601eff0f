import functools
import itertools
import logging

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import networkx as nx

from .complex import Simplex, SimplicialComplex
from .cvf import CombinatorialVectorField, FlowCell
from .homology import relative_betti

logger = logging.getLogger(__name__)


SNAP_TOLERANCE = 1e-9
"""Floating coordinates within this distance of ε are treated as equal to ε."""

MEMBERSHIP_TOLERANCE = 1e-8
"""Slack allowed in the flow tile inequalities for floating points."""

# Labels of the one-dimensional partition of [0, 1]: {0}, (0,ε), {ε}, (ε,1), {1}.
ZERO, LOW, EPS, HIGH, ONE = 'Z', 'L', 'E', 'H', 'O'
LABELS = (ZERO, LOW, EPS, HIGH, ONE)

OPEN_LABELS = frozenset((LOW, HIGH))
POINT_LABELS = frozenset((ZERO, EPS, ONE))

_LABEL_CLOSURE = {
    ZERO: (ZERO,),
    LOW: (ZERO, LOW, EPS),
    EPS: (EPS,),
    HIGH: (EPS, HIGH, ONE),
    ONE: (ONE,),
}

PartitionCell = str
"""A cell of the partition, written as one label per vertex, e.g. `'HZLEZZ'`."""

Point = Sequence[Fraction]


class GeometryError(ValueError):
    """This error is thrown for an inadmissible ε, a point outside the polytope of the complex, a set of cells which
    should be closed but is not, or an inconsistency between the two computations of an exit set."""

    def __init__(self, *args):
        super().__init__(*args)


def default_epsilon(X: SimplicialComplex) -> Fraction:
    """ε = 1/(8d), which satisfies both ε < 1/(1 + dim X) and ε < 1/(6d)."""
    return Fraction(1, 8 * max(X.d, 1))

def check_epsilon(eps: Fraction, X: SimplicialComplex, for_field: bool = False) -> Fraction:
    """Returns ε as a Fraction after checking 0 < ε < 1/(1 + dim X), and ε < 1/(6d) if `for_field` is True.

    Raises:
        GeometryError: if a bound is violated.
    """
    eps = Fraction(eps)
    if not (0 < eps < Fraction(1, 1 + max(X.dim, 0))):
        raise GeometryError(f"epsilon = {eps} must lie in (0, 1/{1 + max(X.dim, 0)}).")
    if for_field and not (eps < Fraction(1, 6 * X.d)):
        raise GeometryError(f"epsilon = {eps} must be smaller than 1/{6 * X.d} for the vector fields.")

    return eps


def _interval(label: str, eps: Fraction) -> tuple[Fraction, Fraction]:
    match label:
        case 'Z':
            return Fraction(0), Fraction(0)
        case 'L':
            return Fraction(0), eps
        case 'E':
            return eps, eps
        case 'H':
            return eps, Fraction(1)
        case 'O':
            return Fraction(1), Fraction(1)
    raise ValueError(f"Unknown label {label!r}.")

def is_feasible(cell: PartitionCell, eps: Fraction) -> bool:
    """Whether the coordinate box of the cell meets the hyperplane Σ x_v = 1."""
    lo = sum(_interval(c, eps)[0] for c in cell)
    hi = sum(_interval(c, eps)[1] for c in cell)
    if all(c in POINT_LABELS for c in cell):
        return lo == 1

    return lo < 1 < hi

def label_of(t: Fraction, eps: Fraction) -> str:
    """The label of the one-dimensional partition containing the coordinate t ∈ [0, 1]."""
    if t == 0:
        return ZERO
    if t < eps:
        return LOW
    if t == eps:
        return EPS
    if t < 1:
        return HIGH
    return ONE


def check_point(x: Point, X: SimplicialComplex, tol: float = 0) -> None:
    """Checks that x are the barycentric coordinates of a point of the polytope of X.

    Raises:
        GeometryError: if a coordinate is negative, the sum is not 1 (within `tol`), or the support is not a simplex.
    """
    if len(x) != X.d:
        raise GeometryError(f"A point needs {X.d} coordinates, got {len(x)}.")
    if any(t < -tol for t in x):
        raise GeometryError("Barycentric coordinates must be non-negative.")
    if abs(sum(x) - 1) > tol:
        raise GeometryError(f"Barycentric coordinates must sum to 1, got {sum(x)}.")

    support = [v for v, t in enumerate(x) if t > tol]
    if not support or Simplex(support) not in X:
        raise GeometryError("The support of the point is not a simplex of the complex.")

def support(x: Point) -> Simplex:
    """σ⁰(x), the simplex spanned by the vertices with positive coordinate."""
    return Simplex(v for v, t in enumerate(x) if t > 0)

def barycenter(sigma: Simplex, d: int) -> tuple[Fraction, ...]:
    w = Fraction(1, len(sigma))
    return tuple(w if v in sigma else Fraction(0) for v in range(d))


def characteristic_simplices(x: Point, eps: Fraction) -> tuple[Simplex, Simplex, list[Simplex]]:
    """Returns σ_min = {v : x_v > ε}, σ_max = {v : x_v ≥ ε} and all the simplices between them.

    A simplex σ lies between σ_min and σ_max iff x belongs to the closure of the ε-cell of σ.
    """
    smin = [v for v, t in enumerate(x) if t > eps]
    smax = [v for v, t in enumerate(x) if t >= eps]
    if not smin:
        raise GeometryError("The point has no coordinate above epsilon, epsilon is too large.")

    extra = [v for v in smax if v not in smin]
    between = [Simplex(smin + list(c)) for k in range(len(extra) + 1) for c in itertools.combinations(extra, k)]

    return Simplex(smin), Simplex(smax), sorted(between)

def characteristic_simplices_float(x: Sequence[float], eps: float, snap: float = SNAP_TOLERANCE) -> tuple[Simplex, Simplex]:
    """Floating variant of `characteristic_simplices`: coordinates within `snap` of ε count as ε."""
    eps = float(eps)
    smin = [v for v, t in enumerate(x) if t > eps + snap]
    smax = [v for v, t in enumerate(x) if t >= eps - snap]
    if not smin:
        raise GeometryError("The point has no coordinate above epsilon, epsilon is too large.")

    return Simplex(smin), Simplex(smax)

def epsilon_cell_membership(x: Point, sigma: Simplex, eps: Fraction, X: SimplicialComplex = None) -> str:
    """Locates x with respect to the ε-cell of sigma.

    Returns:
        str: `'interior'` if x lies in the ε-cell, `'closure'` if it only lies in its closure, `'outside'` otherwise.
    """
    if X is not None:
        X.check(sigma)

    inside = [x[v] for v in sigma]
    outside = [t for v, t in enumerate(x) if v not in sigma]
    if all(t > eps for t in inside) and all(t < eps for t in outside):
        return 'interior'
    if all(t >= eps for t in inside) and all(t <= eps for t in outside):
        return 'closure'
    return 'outside'

def in_flow_tile(x: Sequence, minus: Simplex, plus: Simplex, eps, tol=0) -> bool:
    """Whether x lies in the flow tile of the cell with simplices ω⁻ ⊆ ω⁺, by the inequalities
    Σ x = 1, 0 ≤ x_v ≤ ε off ω⁺, x_v ≥ 0 on ω⁺ and x_v ≥ ε on ω⁻ (each within `tol`)."""
    if abs(sum(x) - 1) > tol:
        return False

    for v, t in enumerate(x):
        if v in minus:
            if t < eps - tol:
                return False
        elif v in plus:
            if t < -tol:
                return False
        elif t < -tol or t > eps + tol:
            return False

    return True


def phi_epsilon(t, eps):
    return 0 * t if t <= eps else (t - eps) / (1 - eps)

def psi_epsilon(x: Point, eps) -> tuple:
    """The map ψ_ε, which collapses the closure of each ε-cell onto its simplex: every coordinate is passed through
    φ_ε(t) = max(0, t - ε)/(1 - ε) and the result is normalized."""
    phis = [phi_epsilon(t, eps) for t in x]
    total = sum(phis)
    if total <= 0:
        raise GeometryError("The point has no coordinate above epsilon, epsilon is too large.")

    return tuple(p / total for p in phis)

def psi_epsilon_preimage(y: Point, sigma: Simplex, eps) -> tuple:
    """The point of the ε-cell closure of sigma mapped by ψ_ε to the point y of sigma:
    x_v = ε + y_v (1 - ε (1 + dim σ)) on sigma, zero elsewhere."""
    scale = 1 - eps * (1 + sigma.dim)
    return tuple(eps + t * scale if v in sigma else 0 * t for v, t in enumerate(y))


def representative_point(cell: PartitionCell, eps: Fraction) -> tuple[Fraction, ...]:
    """An exact point of the (nonempty) cell: open coordinates are placed at the same relative position inside
    their intervals so that the coordinates sum to 1."""
    bounds = [_interval(c, eps) for c in cell]
    if all(c in POINT_LABELS for c in cell):
        return tuple(lo for lo, _ in bounds)

    fixed = sum(lo for (lo, _), c in zip(bounds, cell) if c in POINT_LABELS)
    a = sum(lo for (lo, _), c in zip(bounds, cell) if c in OPEN_LABELS)
    w = sum(hi - lo for (lo, hi), c in zip(bounds, cell) if c in OPEN_LABELS)
    lam = (1 - fixed - a) / w

    return tuple(lo + lam * (hi - lo) if c in OPEN_LABELS else lo for (lo, hi), c in zip(bounds, cell))

def planar_coordinates(x: Sequence) -> tuple[float, float]:
    """Cartesian coordinates of a point with at most three barycentric coordinates, on the unit triangle."""
    corners = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.8660254037844386)]
    if len(x) > 3:
        raise GeometryError("Planar coordinates are only available for at most three vertices.")

    return (sum(float(t) * c[0] for t, c in zip(x, corners)),
            sum(float(t) * c[1] for t, c in zip(x, corners)))


class CellPartition:
    """The partition of the polytope of X into the nonempty cells obtained by intersecting the hyperplane Σ x = 1 with
    the products of the intervals {0}, (0,ε), {ε}, (ε,1), {1}.

    Sets of cells (representable sets) are plain Python sets of cell labels, and this class provides the exact
    topological operations on them.
    """

    def __init__(self, X: SimplicialComplex, eps: Fraction = None):
        """
        Raises:
            GeometryError: if ε does not satisfy 0 < ε < 1/(1 + dim X).
        """
        self.X = X
        self.eps = check_epsilon(default_epsilon(X) if eps is None else eps, X)

        cells = set()
        for s in X.simplices:
            choices = [(LOW, EPS, HIGH, ONE) if v in s else (ZERO,) for v in range(X.d)]
            for labels in itertools.product(*choices):
                c = ''.join(labels)
                if is_feasible(c, self.eps):
                    cells.add(c)

        self.cells = sorted(cells)
        self.universe = frozenset(self.cells)
        self._id = {c: k for k, c in enumerate(self.cells)}

        logger.debug("partition with epsilon = %s: %d cells", self.eps, len(self.cells))

    def __len__(self):
        return len(self.cells)

    def __contains__(self, cell: PartitionCell):
        return cell in self.universe

    def cell_id(self, cell: PartitionCell) -> int:
        return self._id[cell]

    def cell_of_point(self, x: Point) -> PartitionCell:
        """The cell containing an exact point of the polytope."""
        return ''.join(label_of(Fraction(t), self.eps) for t in x)

    def dim(self, cell: PartitionCell) -> int:
        """Dimension of the cell: the number of open coordinates minus one for the constraint Σ x = 1."""
        n = sum(1 for c in cell if c in OPEN_LABELS)
        return max(n - 1, 0)

    def support(self, cell: PartitionCell) -> Simplex:
        return Simplex(v for v, c in enumerate(cell) if c != ZERO)

    def sigma_min(self, cell: PartitionCell) -> Simplex:
        return Simplex(v for v, c in enumerate(cell) if c in (HIGH, ONE))

    def sigma_max(self, cell: PartitionCell) -> Simplex:
        return Simplex(v for v, c in enumerate(cell) if c in (EPS, HIGH, ONE))

    @functools.cache
    def closure_of_cell(self, cell: PartitionCell) -> frozenset[PartitionCell]:
        """All cells contained in the topological closure of the given cell."""
        out = set()
        for labels in itertools.product(*(_LABEL_CLOSURE[c] for c in cell)):
            c = ''.join(labels)
            if c in self.universe:
                out.add(c)

        return frozenset(out)

    def closure(self, A: Iterable[PartitionCell]) -> set[PartitionCell]:
        out = set()
        for c in A:
            out |= self.closure_of_cell(c)
        return out

    def interior(self, A: Iterable[PartitionCell]) -> set[PartitionCell]:
        return set(self.universe - self.closure(self.universe - set(A)))

    def boundary(self, A: Iterable[PartitionCell]) -> set[PartitionCell]:
        A = set(A)
        return self.closure(A) - self.interior(A)

    def is_closed(self, A: Iterable[PartitionCell]) -> bool:
        A = set(A)
        return self.closure(A) == A

    def epsilon_cell(self, sigma: Simplex) -> set[PartitionCell]:
        """The cells making up the ε-cell of sigma: coordinates above ε exactly on sigma."""
        return {c for c in self.cells
                if all((ch in (HIGH, ONE)) == (v in sigma) for v, ch in enumerate(c))}

    def epsilon_cell_closure(self, sigma: Simplex) -> set[PartitionCell]:
        """The cells of the closure of the ε-cell of sigma: coordinates at least ε on sigma, at most ε elsewhere."""
        return {c for c in self.cells
                if all((ch in (EPS, HIGH, ONE)) if v in sigma else (ch in (ZERO, LOW, EPS))
                       for v, ch in enumerate(c))}

    def n_epsilon(self, A: Iterable[Simplex]) -> set[PartitionCell]:
        """N_ε(A), the union of the closed ε-cells of the simplices of A."""
        out = set()
        for s in A:
            self.X.check(s)
            out |= self.epsilon_cell_closure(s)
        return out

    def flow_tile(self, cell: FlowCell) -> set[PartitionCell]:
        """The flow tile of a cell of a vector field: the union of the closed ε-cells of ω⁻ and ω⁺."""
        return self.epsilon_cell_closure(cell.minus) | self.epsilon_cell_closure(cell.plus)

    def tiles_cover(self, V: CombinatorialVectorField) -> bool:
        """Whether the flow tiles of V cover the whole polytope."""
        covered = set()
        for c in V.cells:
            covered |= self.flow_tile(c)
        return covered == self.universe

    @functools.cached_property
    def face_poset(self) -> nx.DiGraph:
        """The strict face order of the cells, with an edge C -> C' whenever C' ≠ C lies in the closure of C."""
        P = nx.DiGraph()
        P.add_nodes_from(self.cells)
        for c in self.cells:
            P.add_edges_from((c, f) for f in self.closure_of_cell(c) if f != c)
        return P

    def order_complex(self, A: Iterable[PartitionCell]) -> set[Simplex]:
        """The order complex of the face poset of the closed set A: one simplex per chain of cells, with vertices
        given by the cell ids.

        Raises:
            GeometryError: if A is not closed.
        """
        A = set(A)
        if not self.is_closed(A):
            raise GeometryError("The order complex is only defined for closed sets of cells.")

        P = self.face_poset
        chains = set()

        def extend(chain, top):
            chains.add(Simplex(self._id[c] for c in chain))
            for f in P.successors(top):
                extend(chain + [f], f)

        for c in A:
            extend([c], c)

        return chains

    def triangulate_pair(self, A: Iterable[PartitionCell], B: Iterable[PartitionCell]) -> tuple[set[Simplex], set[Simplex]]:
        """Simplicial model (OC(A), OC(B)) of the pair of closed sets B ⊆ A.

        Raises:
            GeometryError: if a set is not closed, or B is not contained in A.
        """
        A, B = set(A), set(B)
        if not B <= A:
            raise GeometryError("B is not contained in A.")
        if not self.is_closed(B):
            raise GeometryError("The order complex is only defined for closed sets of cells.")

        OA = self.order_complex(A)
        OB = {s for s in OA if all(self.cells[k] in B for k in s)}

        return OA, OB

    def betti(self, A: Iterable[PartitionCell], B: Iterable[PartitionCell] = ()) -> tuple[int, ...]:
        """Relative Betti numbers of the pair of closed representable sets (A, B)."""
        return relative_betti(*self.triangulate_pair(A, B))

    def dump(self, A: Iterable[PartitionCell]) -> list[str]:
        """Sorted labels of a set of cells, one vertex name per position, e.g. `'A:H B:E D:H'`."""
        return [' '.join(f"{self.X.names[v]}:{ch}" for v, ch in enumerate(c) if ch != ZERO) for c in sorted(A)]

    def coordinates_csv(self, A: Iterable[PartitionCell]) -> str:
        """CSV with one representative point per cell (and planar coordinates when there are at most three vertices)."""
        header = ['cell'] + [f"x_{n}" for n in self.X.names]
        planar = self.X.d <= 3
        if planar:
            header += ['px', 'py']

        lines = [','.join(header)]
        for c in sorted(A):
            x = representative_point(c, self.eps)
            row = [c] + [str(t) for t in x]
            if planar:
                row += [repr(t) for t in planar_coordinates(x)]
            lines.append(','.join(row))

        return '\n'.join(lines) + '\n'


@dataclass(frozen=True)
class IndexPairs:
    """The isolating block B = N_ε(S) of an isolated invariant set, its exit set, and the two index pairs
    (P₁, P₂) = (B, B⁻) and (Q₁, Q₂) = (N_ε(Cl S), N_ε(Mo S))."""
    B: frozenset
    B_minus: frozenset
    P1: frozenset
    P2: frozenset
    Q1: frozenset
    Q2: frozenset


def exit_set_by_classification(partition: CellPartition, B: set[PartitionCell], mouth: Iterable[Simplex]) -> set[PartitionCell]:
    """The boundary cells of B through which solutions leave or bounce off: those whose σ_min lies in the mouth."""
    mouth = set(mouth)
    return {c for c in partition.boundary(B) if partition.sigma_min(c) in mouth}

def index_pairs(S, partition: CellPartition) -> IndexPairs:
    """Builds the isolating block and the index pairs of an isolated invariant set.

    The exit set is computed both as N_ε(Mo S) ∩ bd B and by classifying the boundary cells of B.

    Args:
        S (IsolatedInvariantSet): the isolated invariant set.
        partition (CellPartition): the cell partition of the same complex.

    Raises:
        GeometryError: if the two computations of the exit set differ.
    """
    B = partition.n_epsilon(S.simplices)
    Q2 = partition.n_epsilon(S.mouth)
    P2 = Q2 & partition.boundary(B)

    by_table = exit_set_by_classification(partition, B, S.mouth)
    if by_table != P2:
        raise GeometryError(f"Exit set mismatch for {S.name}: {sorted(P2 ^ by_table)}")

    Q1 = partition.n_epsilon(S.closure)
    return IndexPairs(frozenset(B), frozenset(P2), frozenset(B), frozenset(P2), frozenset(Q1), frozenset(Q2))

def index_pair_betti(S, partition: CellPartition) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Relative Betti numbers of (P₁, P₂), of (Q₁, Q₂) and of the combinatorial pair (Cl S, Mo S)."""
    pairs = index_pairs(S, partition)
    bp = partition.betti(pairs.P1, pairs.P2)
    bq = partition.betti(pairs.Q1, pairs.Q2)
    bc = relative_betti(S.closure, S.mouth)

    logger.debug("%s: betti (P1, P2) = %s, (Q1, Q2) = %s, (Cl S, Mo S) = %s", S.name, bp, bq, bc)
    return bp, bq, bc
