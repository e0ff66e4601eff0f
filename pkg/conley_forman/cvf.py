import functools
import logging

from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx

from .complex import ComplexDomainError, Simplex, SimplicialComplex, combinatorial_boundary

logger = logging.getLogger(__name__)


class InvalidFieldError(ValueError):
    """This error is thrown when a collection of cells is not a combinatorial vector field on the given complex.

    The list of violations is kept in the `report` attribute."""

    def __init__(self, report: list[str]):
        super().__init__("Invalid combinatorial vector field: " + "; ".join(report))
        self.report = report


@dataclass(frozen=True)
class Critical:
    """A critical cell {σ} of a combinatorial vector field."""
    sigma: Simplex

    @property
    def minus(self) -> Simplex:
        return self.sigma

    @property
    def plus(self) -> Simplex:
        return self.sigma

    @property
    def simplices(self) -> tuple[Simplex, ...]:
        return (self.sigma,)

    def is_critical(self) -> bool:
        return True


@dataclass(frozen=True)
class Arrow:
    """An arrow {τ, σ} of a combinatorial vector field, going from the tail τ to the head σ, τ a facet of σ."""
    tail: Simplex
    head: Simplex

    @property
    def minus(self) -> Simplex:
        return self.tail

    @property
    def plus(self) -> Simplex:
        return self.head

    @property
    def simplices(self) -> tuple[Simplex, ...]:
        return (self.tail, self.head)

    def is_critical(self) -> bool:
        return False


FlowCell = Critical | Arrow


def _cell_key(cell: FlowCell):
    return (cell.plus, cell.minus)

def _cell_violations(X: SimplicialComplex, cells: Iterable[FlowCell]) -> list[str]:
    report = []
    seen = set()
    for c in cells:
        for s in c.simplices:
            if s not in X:
                report.append(f"{X.label(s)} is not a simplex of the complex")
            elif s in seen:
                report.append(f"{X.label(s)} is covered twice")
            seen.add(s)

        if isinstance(c, Arrow) and not c.tail.is_facet_of(c.head):
            report.append(f"arrow {X.label(c.tail)} -> {X.label(c.head)}: "
                          f"{X.label(c.tail)} is not a facet of {X.label(c.head)}")

    for s in X.simplices:
        if s not in seen:
            report.append(f"{X.label(s)} is not covered")

    return report


class CombinatorialVectorField:
    """A combinatorial vector field on a simplicial complex, in its partition form:
    a partition of X into critical singletons and arrows between a facet and its coface.
    """

    def __init__(self, X: SimplicialComplex, cells: Iterable[FlowCell]):
        """Creates a combinatorial vector field from its cells.

        Raises:
            InvalidFieldError: if the cells are not a partition of X into valid critical cells and arrows.
        """
        cells = list(cells)
        report = _cell_violations(X, cells)
        if report:
            raise InvalidFieldError(report)

        self.X = X
        self.cells = sorted(cells, key=_cell_key)
        self._lookup = {s: c for c in self.cells for s in c.simplices}

    @classmethod
    def from_json(cls, X: SimplicialComplex, obj: dict, complete_critical: bool = False):
        """Reads `{"critical": [[names]...], "arrows": [[[tail names], [head names]]...]}`.

        Args:
            complete_critical (bool, optional): if True, every simplex not listed anywhere becomes critical.
                Defaults to False, in which case every simplex must be covered explicitly.
        """
        cells = cells_from_json(X, obj)
        if complete_critical:
            covered = {s for c in cells for s in c.simplices}
            cells.extend(Critical(s) for s in X.simplices if s not in covered)

        return cls(X, cells)

    def to_json(self) -> dict:
        names = lambda s: [self.X.names[v] for v in s]
        return {
            'critical': [names(c.sigma) for c in self.cells if isinstance(c, Critical)],
            'arrows': [[names(c.tail), names(c.head)] for c in self.cells if isinstance(c, Arrow)],
        }

    @classmethod
    def all_critical(cls, X: SimplicialComplex):
        """The field in which every simplex of X is critical."""
        return cls(X, [Critical(s) for s in X.simplices])

    def cell(self, sigma: Simplex) -> FlowCell:
        """Returns the cell of the partition containing sigma.

        Raises:
            ComplexDomainError: if sigma is not in X.
        """
        try:
            return self._lookup[sigma]
        except KeyError:
            raise ComplexDomainError(f"{self.X.label(sigma)} is not a simplex of the complex.") from None

    def flow_cells(self) -> list[FlowCell]:
        return list(self.cells)

    def crit(self) -> set[Simplex]:
        return {c.sigma for c in self.cells if isinstance(c, Critical)}

    def tail(self) -> set[Simplex]:
        return {c.tail for c in self.cells if isinstance(c, Arrow)}

    def head(self) -> set[Simplex]:
        return {c.head for c in self.cells if isinstance(c, Arrow)}

    def is_critical(self, sigma: Simplex) -> bool:
        return isinstance(self.cell(sigma), Critical)

    def is_tail(self, sigma: Simplex) -> bool:
        c = self.cell(sigma)
        return isinstance(c, Arrow) and c.tail == sigma

    def is_head(self, sigma: Simplex) -> bool:
        c = self.cell(sigma)
        return isinstance(c, Arrow) and c.head == sigma

    def sigma_minus_plus(self, sigma: Simplex) -> tuple[Simplex, Simplex]:
        c = self.cell(sigma)
        return c.minus, c.plus

    def pi(self, sigma: Simplex) -> set[Simplex]:
        """The multivalued flow map: Cl σ for critical σ, {V(σ)} for a tail, Bd σ without the tail for a head."""
        c = self.cell(sigma)
        if isinstance(c, Critical):
            return set(sigma.faces())
        if c.tail == sigma:
            return {c.head}
        return combinatorial_boundary(sigma) - {c.tail}

    @functools.cached_property
    def digraph(self) -> nx.DiGraph:
        """The multivalued flow map as a digraph on the simplices of X, with an edge σ -> τ for each τ in Π(σ).
        Critical simplices carry a self-loop."""
        G = nx.DiGraph()
        G.add_nodes_from(self.X.simplices)
        for s in self.X.simplices:
            G.add_edges_from((s, t) for t in self.pi(s))

        logger.debug("flow digraph: %d nodes, %d edges", G.number_of_nodes(), G.number_of_edges())
        return G

    def label(self, cell: FlowCell) -> str:
        """Renders a cell as `F` (critical) or `A->AD` (arrow)."""
        if isinstance(cell, Critical):
            return self.X.label(cell.sigma)
        return f"{self.X.label(cell.tail)}->{self.X.label(cell.head)}"

    def __iter__(self):
        return iter(self.cells)

    def __len__(self):
        return len(self.cells)

    def __eq__(self, other):
        if not isinstance(other, CombinatorialVectorField):
            return NotImplemented
        return self.X.simplices == other.X.simplices and self.cells == other.cells

    def __hash__(self):
        return hash(tuple(self.cells))


def cells_from_json(X: SimplicialComplex, obj: dict) -> list[FlowCell]:
    """Parses the cells listed in a JSON field description, without any validation beyond vertex names.

    Raises:
        ComplexDomainError: for unknown vertex names or a malformed description.
    """
    if not isinstance(obj, dict):
        raise ComplexDomainError("A vector field needs the keys 'critical' and 'arrows'.")

    def to_simplex(names):
        if isinstance(names, str) or not isinstance(names, Sequence):
            raise ComplexDomainError(f"Malformed simplex {names!r}, expected a list of vertex names.")
        return Simplex([X.vertex_id(str(n)) for n in names])

    cells = [Critical(to_simplex(s)) for s in obj.get('critical', [])]
    for a in obj.get('arrows', []):
        if not isinstance(a, Sequence) or len(a) != 2:
            raise ComplexDomainError(f"Malformed arrow {a!r}, expected [tail, head].")
        cells.append(Arrow(to_simplex(a[0]), to_simplex(a[1])))

    return cells


def validate_field(X: SimplicialComplex, V: CombinatorialVectorField | Iterable[FlowCell]) -> list[str]:
    """Checks that the given cells form a partition of X into critical cells and facet arrows.

    Returns:
        list[str]: the violations (uncovered or duplicated simplices, non-facet arrows); empty iff valid.
    """
    cells = V.cells if isinstance(V, CombinatorialVectorField) else list(V)
    return _cell_violations(X, cells)


def forman_map_form(V: CombinatorialVectorField) -> dict[Simplex, Simplex | None]:
    """Returns the map form of the field: V(τ) = σ for each arrow τ -> σ, None (the zero map value) otherwise."""
    m = {s: None for s in V.X.simplices}
    for c in V.cells:
        if isinstance(c, Arrow):
            m[c.tail] = c.head

    return m

def map_form_violations(X: SimplicialComplex, m: dict[Simplex, Simplex | None]) -> list[str]:
    """Checks the three conditions of the map form: each nonzero value is a coface of codimension one,
    the image consists of zeros of the map, and no simplex has two preimages."""
    report = []
    preimages = {}
    for s in X.simplices:
        t = m.get(s)
        if t is None:
            continue
        if t not in X:
            report.append(f"V({X.label(s)}) = {X.label(t)} is not a simplex of the complex")
            continue
        if not s.is_facet_of(t):
            report.append(f"V({X.label(s)}) = {X.label(t)}: {X.label(s)} is not a facet of {X.label(t)}")
        if m.get(t) is not None:
            report.append(f"V({X.label(t)}) must vanish since {X.label(t)} is in the image")
        if t in preimages:
            report.append(f"{X.label(t)} has two preimages {X.label(preimages[t])} and {X.label(s)}")
        preimages[t] = s

    for s in m:
        if s not in X:
            report.append(f"{X.label(s)} is not a simplex of the complex")

    return report

def field_from_map(X: SimplicialComplex, m: dict[Simplex, Simplex | None]) -> CombinatorialVectorField:
    """Builds the partition form from the map form; the inverse of `forman_map_form`.

    Raises:
        InvalidFieldError: if the map violates any of the three conditions.
    """
    report = map_form_violations(X, m)
    if report:
        raise InvalidFieldError(report)

    image = {t for t in m.values() if t is not None}
    cells = []
    for s in X.simplices:
        t = m.get(s)
        if t is not None:
            cells.append(Arrow(s, t))
        elif s not in image:
            cells.append(Critical(s))

    return CombinatorialVectorField(X, cells)


def sigma_minus_plus(sigma: Simplex, V: CombinatorialVectorField) -> tuple[Simplex, Simplex]:
    """Returns (σ⁻, σ⁺): both equal σ when it is critical, otherwise the tail and head of its arrow."""
    return V.sigma_minus_plus(sigma)

def pi_map(sigma: Simplex, V: CombinatorialVectorField, X: SimplicialComplex = None) -> set[Simplex]:
    if X is not None:
        X.check(sigma)
    return V.pi(sigma)


class CombinatorialSolution:
    """A solution ρ: [start, start + n - 1] ∩ Z -> X of the multivalued flow map, stored as its list of values."""

    def __init__(self, values: Sequence[Simplex], start: int = 0):
        self.values = list(values)
        self.start = start

    @property
    def domain(self) -> tuple[int, int]:
        """The integer interval of definition, as a closed range (start, end)."""
        return (self.start, self.start + len(self.values) - 1)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, k: int) -> Simplex:
        if not (self.domain[0] <= k <= self.domain[1]):
            raise IndexError(f"{k} is outside the domain {self.domain} of the solution.")
        return self.values[k - self.start]

    def is_solution(self, V: CombinatorialVectorField) -> bool:
        return is_solution(self.values, V)

    def __repr__(self):
        return f"CombinatorialSolution(start={self.start}, values={self.values})"


def is_solution(rho: Sequence[Simplex] | CombinatorialSolution, V: CombinatorialVectorField,
                X: SimplicialComplex = None) -> bool:
    """Checks that ρ_{k+1} ∈ Π(ρ_k) for every consecutive pair. Sequences of length at most one are solutions."""
    rho = list(rho)
    X = V.X if X is None else X
    if any(s not in X for s in rho):
        return False

    return all(b in V.pi(a) for a, b in zip(rho, rho[1:]))
