import functools
import logging

from typing import Iterable

from .util import nonempty_subsets

logger = logging.getLogger(__name__)


class ComplexDomainError(ValueError):
    """This error is thrown when a simplex or vertex does not belong to the complex it is used with,
    or when the description of a complex is malformed."""

    def __init__(self, *args):
        super().__init__(*args)


@functools.total_ordering
class Simplex:
    """A simplex of an abstract simplicial complex, stored as the strictly increasing tuple of its vertex ids.

    Simplices are ordered by dimension first and then lexicographically by vertex ids,
    so that sorting a list of simplices lists vertices first.
    """

    __slots__ = ('vertices', '_hash')

    def __init__(self, vertices: Iterable[int]):
        vs = tuple(sorted(vertices))
        if len(vs) == 0:
            raise ComplexDomainError("A simplex must have at least one vertex.")
        if len(set(vs)) != len(vs):
            raise ComplexDomainError(f"Repeated vertex in simplex {vs}.")

        self.vertices = vs
        self._hash = hash(vs)

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __contains__(self, v: int):
        return v in self.vertices

    def __eq__(self, other):
        if not isinstance(other, Simplex):
            return NotImplemented
        return self.vertices == other.vertices

    def __lt__(self, other):
        if not isinstance(other, Simplex):
            return NotImplemented
        return (len(self.vertices), self.vertices) < (len(other.vertices), other.vertices)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Simplex{self.vertices}"

    def faces(self, proper=False) -> list['Simplex']:
        """Returns all nonempty faces of the simplex, including itself unless `proper=True`."""
        return [Simplex(f) for f in nonempty_subsets(self.vertices, proper=proper)]

    def facets(self) -> list['Simplex']:
        """Returns the faces of codimension one (empty for a vertex)."""
        if len(self.vertices) == 1:
            return []
        return [Simplex(self.vertices[:k] + self.vertices[k+1:]) for k in range(len(self.vertices))]

    def is_face_of(self, other: 'Simplex') -> bool:
        return set(self.vertices) <= set(other.vertices)

    def is_facet_of(self, other: 'Simplex') -> bool:
        return len(other.vertices) == len(self.vertices) + 1 and self.is_face_of(other)


def combinatorial_boundary(sigma: Simplex) -> set[Simplex]:
    """Returns Bd sigma, the set of all proper nonempty faces of sigma. It is empty iff sigma is a vertex."""
    return set(sigma.faces(proper=True))


class SimplicialComplex:
    """A finite abstract simplicial complex over the vertex names `names`.

    Vertices are identified by their position in `names`; all the internal logic is id-based,
    names are only used for parsing and rendering.
    """

    def __init__(self, names: list[str], simplices: Iterable, close: bool = True):
        """Builds a complex from a list of vertex names and a list of simplices.

        Args:
            names (list[str]): unique vertex names, the id of a vertex is its index in this list.
            simplices (Iterable[Simplex | Iterable[int]]): the simplices, possibly only the maximal ones.
            close (bool, optional): whether all faces of the given simplices are added. Defaults to True.
                With `close=False` the complex is stored as given, and `validate` reports what is missing.

        Raises:
            ComplexDomainError: if the vertex names are not unique.
        """
        names = [str(n) for n in names]
        if len(set(names)) != len(names):
            raise ComplexDomainError("Vertex names must be unique.")

        self.names = names
        self._ids = {n: k for k, n in enumerate(names)}

        found = set()
        for s in simplices:
            s = s if isinstance(s, Simplex) else Simplex(s)
            if close:
                found.update(s.faces())
            else:
                found.add(s)

        self.simplices = sorted(found)
        self._index = {s: k for k, s in enumerate(self.simplices)}

    @classmethod
    def from_names(cls, vertices: list[str], simplices: list[list[str]], close: bool = True):
        """Builds a complex from simplices given as lists of vertex names."""
        ids = {n: k for k, n in enumerate(vertices)}
        try:
            sx = [[ids[str(n)] for n in s] for s in simplices]
        except KeyError as e:
            raise ComplexDomainError(f"Unknown vertex {e.args[0]!r} in simplex list.") from None

        return cls(vertices, sx, close=close)

    @classmethod
    def from_json(cls, obj: dict, close: bool = True):
        """Builds a complex from `{"vertices": [names...], "simplices": [[names...]...]}`."""
        if not isinstance(obj, dict) or 'vertices' not in obj or 'simplices' not in obj:
            raise ComplexDomainError("A complex needs the keys 'vertices' and 'simplices'.")

        return cls.from_names(obj['vertices'], obj['simplices'], close=close)

    def to_json(self) -> dict:
        """Returns the JSON form, listing every simplex so that it can be read back with `close=False`."""
        return {
            'vertices': list(self.names),
            'simplices': [[self.names[v] for v in s] for s in self.simplices],
        }

    @property
    def d(self) -> int:
        """Number of vertices."""
        return len(self.names)

    @property
    def dim(self) -> int:
        """Dimension of the complex, -1 for the empty complex."""
        return max((s.dim for s in self.simplices), default=-1)

    def __contains__(self, sigma: Simplex):
        return sigma in self._index

    def __iter__(self):
        return iter(self.simplices)

    def __len__(self):
        return len(self.simplices)

    def index(self, sigma: Simplex) -> int:
        """Returns the position of sigma in the sorted simplex list."""
        try:
            return self._index[sigma]
        except KeyError:
            raise ComplexDomainError(f"{self.label(sigma)} is not a simplex of the complex.") from None

    def check(self, sigma: Simplex) -> Simplex:
        """Returns sigma unchanged if it belongs to the complex.

        Raises:
            ComplexDomainError: otherwise.
        """
        if sigma not in self._index:
            raise ComplexDomainError(f"{self.label(sigma)} is not a simplex of the complex.")
        return sigma

    def vertex_id(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise ComplexDomainError(f"Unknown vertex {name!r}.") from None

    def vertex(self, name: str) -> Simplex:
        """Returns the 0-simplex with the given name."""
        return self.check(Simplex([self.vertex_id(name)]))

    def label(self, sigma: Simplex) -> str:
        """Renders a simplex by its vertex names: concatenated when all names are single characters
        (as in `ABD`), joined by `-` otherwise."""
        names = [self.names[v] if 0 <= v < len(self.names) else str(v) for v in sigma]
        if all(len(n) == 1 for n in self.names):
            return ''.join(names)
        return '-'.join(names)

    def parse_simplex(self, text: str) -> Simplex:
        """Inverse of `label`.

        Raises:
            ComplexDomainError: for unknown vertices, or if the simplex is not in the complex.
        """
        text = text.strip()
        if '-' in text:
            parts = text.split('-')
        elif all(len(n) == 1 for n in self.names):
            parts = list(text)
        else:
            parts = [text]

        if not parts or any(p == '' for p in parts):
            raise ComplexDomainError(f"Malformed simplex {text!r}.")

        return self.check(Simplex([self.vertex_id(p) for p in parts]))

    def simplex(self, *names: str) -> Simplex:
        """Shortcut: `X.simplex('A', 'B')` or `X.simplex('AB')`."""
        if len(names) == 1:
            return self.parse_simplex(names[0])
        return self.check(Simplex([self.vertex_id(n) for n in names]))

    def parse_simplices(self, text: str) -> set[Simplex]:
        """Parses a whitespace (or comma) separated list of simplices, e.g. `"EF E"`."""
        return {self.parse_simplex(t) for t in text.replace(',', ' ').split()}

    def labels(self, simplices: Iterable[Simplex]) -> list[str]:
        """Labels of the given simplices, in the canonical simplex order."""
        return [self.label(s) for s in sorted(simplices)]

    def closure(self, S: Iterable[Simplex]) -> set[Simplex]:
        return combinatorial_closure(S, self)

    def star(self, v: int | str) -> set[Simplex]:
        return star(v, self)

    def maximal_simplices(self) -> list[Simplex]:
        """Simplices which are not a proper face of another simplex."""
        faces = set()
        for s in self.simplices:
            faces.update(s.facets())
        return [s for s in self.simplices if s not in faces]

    def cofacets(self, sigma: Simplex) -> list[Simplex]:
        """Simplices of the complex having sigma as a facet."""
        return [t for t in self.simplices if sigma.is_facet_of(t)]

    def is_closed(self, S: Iterable[Simplex]) -> bool:
        """Whether the set of simplices is combinatorially closed (contains all faces of its members)."""
        S = set(S)
        return all(f in S for s in S for f in s.facets())

    def euler_characteristic(self) -> int:
        return sum((-1) ** s.dim for s in self.simplices)


def combinatorial_closure(S: Iterable[Simplex], X: SimplicialComplex) -> set[Simplex]:
    """Returns Cl S, that is S together with all the nonempty faces of its members.

    Raises:
        ComplexDomainError: if a simplex of S is not in X.
    """
    cl = set()
    for s in S:
        X.check(s)
        cl.update(s.faces())

    return cl

def star(v: int | str, X: SimplicialComplex) -> set[Simplex]:
    """Returns all the simplices of X containing the vertex v (given as an id or a name).

    Raises:
        ComplexDomainError: for an unknown vertex.
    """
    if isinstance(v, str):
        v = X.vertex_id(v)
    if not (0 <= v < X.d):
        raise ComplexDomainError(f"Unknown vertex id {v}.")

    return {s for s in X.simplices if v in s}

def validate(X: SimplicialComplex) -> list[str]:
    """Checks the closure axiom of the complex.

    Returns:
        list[str]: one message per violation (an unknown vertex id, a missing face, a vertex
        without its 0-simplex); the list is empty iff the complex is valid.
    """
    report = []
    missing = set()
    for s in X.simplices:
        for v in s:
            if not (0 <= v < X.d):
                report.append(f"simplex {X.label(s)} uses unknown vertex id {v}")

        for f in s.faces(proper=True):
            if f not in X and f not in missing:
                missing.add(f)

    for f in sorted(missing):
        report.append(f"missing face {X.label(f)}")

    present = {s.vertices[0] for s in X.simplices if s.dim == 0}
    for v in range(X.d):
        if v not in present and not any(v in s for s in X.simplices):
            continue # an isolated name that no simplex uses is harmless
        if v not in present and Simplex([v]) not in missing:
            report.append(f"vertex {X.names[v]} has no 0-simplex")

    if report:
        logger.debug("complex validation found %d violations", len(report))

    return report
