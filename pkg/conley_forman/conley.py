import functools
import json
import logging

from typing import Iterable

import networkx as nx

from .complex import Simplex, SimplicialComplex
from .cvf import Arrow, CombinatorialSolution, CombinatorialVectorField
from .homology import PoincarePolynomial, relative_betti
from .util import stable_hash

logger = logging.getLogger(__name__)


class NotIsolatedError(ValueError):
    """This error is thrown when a set of simplices is used as an isolated invariant set but is not one.
    The `diagnostic` attribute names the first violated condition."""

    def __init__(self, diagnostic: str):
        super().__init__(f"Not an isolated invariant set: {diagnostic}")
        self.diagnostic = diagnostic


def _cyclic_nodes(G: nx.DiGraph) -> set:
    """Nodes lying on a directed cycle: members of a strongly connected component with at least two nodes,
    or nodes carrying a self-loop."""
    cyc = set(nx.nodes_with_selfloops(G))
    for c in nx.strongly_connected_components(G):
        if len(c) > 1:
            cyc.update(c)

    return cyc

def _restricted(V: CombinatorialVectorField, S: Iterable[Simplex]) -> nx.DiGraph:
    return V.digraph.subgraph(set(S))

def _full_solution_nodes(G: nx.DiGraph) -> set:
    cyc = _cyclic_nodes(G)
    fwd, bwd = set(cyc), set(cyc)
    for c in cyc:
        fwd.update(nx.descendants(G, c))
        bwd.update(nx.ancestors(G, c))

    return fwd & bwd


def is_invariant(S: Iterable[Simplex], V: CombinatorialVectorField, X: SimplicialComplex = None) -> bool:
    """Whether every simplex of S lies on a bi-infinite solution contained in S.

    On the flow digraph restricted to S, a simplex qualifies iff it is reachable from a cycle and reaches a cycle.
    """
    S = set(S)
    if X is not None:
        for s in S:
            X.check(s)

    return S <= _full_solution_nodes(_restricted(V, S))

def isolation_diagnostic(S: Iterable[Simplex], V: CombinatorialVectorField) -> str | None:
    """Returns None if S is an isolated invariant set, otherwise a message naming the first violated condition
    among invariance, closedness of the mouth, and not splitting an arrow."""
    S = set(S)
    X = V.X

    full = _full_solution_nodes(_restricted(V, S))
    for s in sorted(S):
        if s not in full:
            return f"not invariant: no full solution through {X.label(s)} inside the set"

    mouth = mouth_of(S, X)
    if not X.is_closed(mouth):
        for m in sorted(mouth):
            for f in m.facets():
                if f not in mouth:
                    return f"mouth not closed: {X.label(f)} is a face of {X.label(m)} but lies in the set"

    for c in V.cells:
        if isinstance(c, Arrow) and (c.tail in S) != (c.head in S):
            return f"arrow {V.label(c)} is split by the set"

    return None

def is_isolated_invariant(S: Iterable[Simplex], V: CombinatorialVectorField,
                          X: SimplicialComplex = None) -> tuple[bool, str | None]:
    """Checks whether S is an isolated invariant set.

    Returns:
        tuple[bool, str | None]: the verdict and, when negative, the diagnostic.
    """
    S = set(S)
    if X is not None:
        for s in S:
            X.check(s)

    diag = isolation_diagnostic(S, V)
    return diag is None, diag

def mouth_of(S: Iterable[Simplex], X: SimplicialComplex) -> set[Simplex]:
    """Mo S = Cl S \\ S."""
    S = set(S)
    return X.closure(S) - S

def conley_index(S: Iterable[Simplex], V: CombinatorialVectorField, X: SimplicialComplex = None) -> PoincarePolynomial:
    """Returns the Poincaré polynomial of the Conley index H(Cl S, Mo S).

    Raises:
        NotIsolatedError: if S is not an isolated invariant set.
    """
    return IsolatedInvariantSet(S, V).index


class IsolatedInvariantSet:
    """An isolated invariant set S of a combinatorial vector field, with its closure (the isolating block),
    its mouth and its Conley index computed on demand."""

    def __init__(self, S: Iterable[Simplex], V: CombinatorialVectorField):
        """
        Raises:
            NotIsolatedError: if S is not an isolated invariant set of V.
            ComplexDomainError: if S contains a simplex outside the complex.
        """
        S = frozenset(S)
        for s in S:
            V.X.check(s)

        diag = isolation_diagnostic(S, V)
        if diag is not None:
            raise NotIsolatedError(diag)

        self.V = V
        self.X = V.X
        self.simplices = S

    @functools.cached_property
    def closure(self) -> frozenset[Simplex]:
        return frozenset(self.X.closure(self.simplices))

    @functools.cached_property
    def mouth(self) -> frozenset[Simplex]:
        return self.closure - self.simplices

    @functools.cached_property
    def index(self) -> PoincarePolynomial:
        return PoincarePolynomial(relative_betti(self.closure, self.mouth))

    @property
    def name(self) -> str:
        return "{" + ", ".join(self.X.labels(self.simplices)) + "}"

    def top_dim(self) -> int:
        return max(s.dim for s in self.simplices)

    def sort_key(self):
        return (self.top_dim(), self.X.labels(self.simplices))

    def __contains__(self, sigma: Simplex):
        return sigma in self.simplices

    def __iter__(self):
        return iter(sorted(self.simplices))

    def __len__(self):
        return len(self.simplices)

    def __eq__(self, other):
        if not isinstance(other, IsolatedInvariantSet):
            return NotImplemented
        return self.simplices == other.simplices

    def __hash__(self):
        return hash(self.simplices)

    def __repr__(self):
        return f"IsolatedInvariantSet({self.name})"


def full_solution_through(sigma: Simplex, S: Iterable[Simplex], V: CombinatorialVectorField) -> CombinatorialSolution | None:
    """Finds a witness of invariance: a finite solution inside S which starts with a closed walk, passes through
    sigma and ends with a closed walk. Repeating the two closed walks gives a full solution through sigma.

    Returns:
        CombinatorialSolution | None: the witness, or None if there is no full solution through sigma in S.
    """
    G = _restricted(V, S)
    if sigma not in G:
        return None

    cyc = _cyclic_nodes(G)
    sources = [c for c in sorted(cyc) if c == sigma or nx.has_path(G, c, sigma)]
    sinks = [c for c in sorted(cyc) if c == sigma or nx.has_path(G, sigma, c)]
    if not sources or not sinks:
        return None

    def closed_walk(c):
        if G.has_edge(c, c):
            return [c, c]
        nxt = min(s for s in G.successors(c) if nx.has_path(G, s, c))
        return [c] + nx.shortest_path(G, nxt, c)

    c1, c2 = sources[0], sinks[0]
    values = closed_walk(c1) + nx.shortest_path(G, c1, sigma)[1:]
    values += nx.shortest_path(G, sigma, c2)[1:] + closed_walk(c2)[1:]

    return CombinatorialSolution(values)


class MorseGraph:
    """A Conley-Morse graph: an ordered family of Morse sets labelled with their Poincaré polynomials.

    An edge (p, q) means p > q: there is a connection from the Morse set p to the Morse set q. Only the transitive
    reduction is stored in `edges`; the full order is in `reach`.
    """

    def __init__(self, V: CombinatorialVectorField, nodes: list[IsolatedInvariantSet], reach: set[tuple[int, int]]):
        self.V = V
        self.X = V.X
        self.nodes = nodes
        self.reach = set(reach)

        R = nx.DiGraph()
        R.add_nodes_from(range(len(nodes)))
        R.add_edges_from(self.reach)
        if not nx.is_directed_acyclic_graph(R):
            raise ValueError("The connections between Morse sets contain a cycle.")

        self.edges = sorted(nx.transitive_reduction(R).edges())
        self._owner = {s: p for p, M in enumerate(nodes) for s in M.simplices}

    @property
    def labels(self) -> list[PoincarePolynomial]:
        return [M.index for M in self.nodes]

    def reachability(self) -> set[tuple[int, int]]:
        """The full strict order as pairs (p, q) with p > q."""
        return set(self.reach)

    def morse_set_of(self, sigma: Simplex) -> int | None:
        """Index of the Morse set containing sigma, None if sigma lies in no Morse set."""
        return self._owner.get(sigma)

    def node_id(self, p: int) -> str:
        """Identifier stable across runs, derived from the sorted simplex list of the Morse set."""
        return "m" + stable_hash(self.X.labels(self.nodes[p].simplices))

    def morse_equation_defect(self) -> int:
        """Σ_p p_{M_p}(-1) - χ(X). It vanishes when X is invariant and the Morse sets carry all of its homology,
        for instance for the all-critical field."""
        return sum(M.index(-1) for M in self.nodes) - self.X.euler_characteristic()

    def to_dot(self, full_reachability: bool = False) -> str:
        pairs = sorted(self.reach) if full_reachability else self.edges

        lines = ["digraph morse {", "  node [shape=box];"]
        for p, M in enumerate(self.nodes):
            lines.append(f'  "{self.node_id(p)}" [label="{M.name}\\np(t)={M.index}"];')
        for p, q in pairs:
            lines.append(f'  "{self.node_id(p)}" -> "{self.node_id(q)}";')
        lines.append("}")

        return "\n".join(lines) + "\n"

    def to_json(self, full_reachability: bool = False) -> dict:
        obj = {
            'nodes': [{
                'id': self.node_id(p),
                'simplices': self.X.labels(M.simplices),
                'poincare': str(M.index),
                'betti': list(M.index.betti),
            } for p, M in enumerate(self.nodes)],
            'edges': [[self.node_id(p), self.node_id(q)] for p, q in self.edges],
        }
        if full_reachability:
            obj['reachability'] = [[self.node_id(p), self.node_id(q)] for p, q in sorted(self.reach)]

        return obj

    def dumps(self, full_reachability: bool = False) -> str:
        return json.dumps(self.to_json(full_reachability), indent=2) + "\n"

    def __len__(self):
        return len(self.nodes)


def finest_morse_decomposition(V: CombinatorialVectorField, X: SimplicialComplex = None, verbose=False) -> MorseGraph:
    """Computes the finest Morse decomposition of the field: the strongly connected components of the flow digraph
    which carry an edge, ordered by the reachability between them.

    Args:
        V (CombinatorialVectorField): the field.
        X (SimplicialComplex, optional): unused beyond a consistency check, the complex of V is used.
        verbose (bool, optional): log the decomposition at INFO level. Defaults to False.

    Returns:
        MorseGraph: the Conley-Morse graph, nodes sorted by (dimension of the top simplex, simplex labels).
    """
    if X is not None and X.simplices != V.X.simplices:
        raise ValueError("The field is defined on a different complex.")

    G = V.digraph
    sccs = list(nx.strongly_connected_components(G))
    C = nx.condensation(G, sccs)

    morse = [k for k, c in enumerate(sccs) if len(c) > 1 or G.has_edge(next(iter(c)), next(iter(c)))]
    sets = [IsolatedInvariantSet(sccs[k], V) for k in morse]
    order = sorted(range(len(sets)), key=lambda i: sets[i].sort_key())
    position = {morse[i]: p for p, i in enumerate(order)}

    reach = set()
    for k in morse:
        for j in nx.descendants(C, k):
            if j in position:
                reach.add((position[k], position[j]))

    graph = MorseGraph(V, [sets[i] for i in order], reach)

    log = logger.info if verbose else logger.debug
    for p, M in enumerate(graph.nodes):
        log("Morse set %d: %s, p(t) = %s", p, M.name, M.index)
    log("%d Morse sets, %d edges in the transitive reduction", len(graph.nodes), len(graph.edges))

    return graph


def check_morse_decomposition(M: list[Iterable[Simplex]], order: Iterable[tuple[int, int]] | None,
                              V: CombinatorialVectorField) -> list[str]:
    """Checks that the family M, with the strict order given by the pairs (p, q) meaning p > q, is a Morse
    decomposition: the sets are disjoint, every cycle of the flow digraph lies in one of them (so that all
    limit behaviour is captured), connections between them respect the order, and no connection leaves a Morse
    set and comes back to it. Invariance of the single sets is not checked.

    Returns:
        list[str]: the violations, empty iff the family is a Morse decomposition.
    """
    X = V.X
    G = V.digraph
    M = [set(m) for m in M]
    report = []

    owner = {}
    for p, m in enumerate(M):
        for s in m:
            if s in owner:
                report.append(f"{X.label(s)} lies in Morse sets {owner[s]} and {p}")
            owner[s] = p
    if report:
        return report

    for c in nx.strongly_connected_components(G):
        first = next(iter(c))
        if len(c) == 1 and not G.has_edge(first, first):
            continue
        if len({owner.get(s) for s in c}) != 1 or owner.get(first) is None:
            report.append("(a) the recurrent component {" + ", ".join(X.labels(c)) + "} is not inside a Morse set")

    R = nx.DiGraph()
    R.add_nodes_from(range(len(M)))
    R.add_edges_from(order or ())
    if not nx.is_directed_acyclic_graph(R):
        report.append("(b) the given order is not a strict partial order")
        return report
    closure = nx.transitive_closure_dag(R)

    for p, m in enumerate(M):
        reached = set()
        for s in m:
            reached.update(nx.descendants(G, s))
        reaching = set()
        for s in m:
            reaching.update(nx.ancestors(G, s))

        for q in sorted({owner[s] for s in reached if s in owner} - {p}):
            if not closure.has_edge(p, q):
                report.append(f"(b) Morse set {p} connects to Morse set {q} but {p} > {q} does not hold")

        for s in sorted((reached & reaching) - m):
            report.append(f"(c) {X.label(s)} lies on a connection from Morse set {p} back to itself")

    return report
