import logging

from typing import Iterable, Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .complex import Simplex

logger = logging.getLogger(__name__)


class HomologyDomainError(ValueError):
    """This error is thrown when a pair of simplex sets is not a pair of subcomplexes,
    i.e. one of them is not closed or the second is not contained in the first."""

    def __init__(self, *args):
        super().__init__(*args)


class PoincarePolynomial:
    """The Poincaré polynomial p(t) = Σ β_k t^k of a graded vector space, stored as its Betti numbers."""

    def __init__(self, coefs: Iterable[int] = ()):
        coefs = [int(c) for c in coefs]
        if any(c < 0 for c in coefs):
            raise ValueError("The coefficients of a Poincaré polynomial must be non-negative.")

        while coefs and coefs[-1] == 0:
            coefs.pop()

        self.coefs = tuple(coefs)

    @property
    def betti(self) -> tuple[int, ...]:
        return self.coefs

    def degree(self) -> int:
        """Degree of the polynomial, -1 for the zero polynomial."""
        return len(self.coefs) - 1

    def is_zero(self) -> bool:
        return len(self.coefs) == 0

    def __getitem__(self, k: int) -> int:
        return self.coefs[k] if 0 <= k < len(self.coefs) else 0

    def __call__(self, t):
        return sum(c * t**k for k, c in enumerate(self.coefs))

    def __add__(self, other):
        if not isinstance(other, PoincarePolynomial):
            return NotImplemented
        n = max(len(self.coefs), len(other.coefs))
        return PoincarePolynomial([self[k] + other[k] for k in range(n)])

    def __eq__(self, other):
        if isinstance(other, PoincarePolynomial):
            return self.coefs == other.coefs
        if isinstance(other, (tuple, list)):
            return self.coefs == PoincarePolynomial(other).coefs
        return NotImplemented

    def __hash__(self):
        return hash(self.coefs)

    def __str__(self):
        if self.is_zero():
            return "0"

        terms = []
        for k, c in enumerate(self.coefs):
            if c == 0:
                continue
            if k == 0:
                terms.append(str(c))
                continue

            mono = "t" if k == 1 else f"t^{k}"
            terms.append(mono if c == 1 else f"{c}{mono}")

        return " + ".join(terms)

    def __repr__(self):
        return f"PoincarePolynomial({list(self.coefs)})"


def _check_closed(S: set[Simplex], what: str):
    for s in S:
        for f in s.facets():
            if f not in S:
                raise HomologyDomainError(f"{what} is not closed: a facet of {s} is missing.")


class ChainComplex:
    """The relative simplicial chain complex C(A, B) = C(A)/C(B) with rational coefficients.

    The basis in degree k is the sorted list of k-simplices of A \\ B; the boundary of a simplex is the
    alternating sum of its facets (sign (-1)^i for the facet omitting the i-th vertex), with the facets
    lying in B dropped.
    """

    def __init__(self, A: Iterable[Simplex], B: Iterable[Simplex] = (), vertex_order: Sequence[int] = None):
        """Builds the relative chain complex of the pair (A, B).

        Args:
            A (Iterable[Simplex]): a combinatorially closed set of simplices.
            B (Iterable[Simplex], optional): a closed subset of A. Defaults to the empty set.
            vertex_order (Sequence[int], optional): the global vertex order used for the incidence signs.
                Defaults to the order of the vertex ids.

        Raises:
            HomologyDomainError: if A or B is not closed, or B is not contained in A.
        """
        A, B = set(A), set(B)
        _check_closed(A, "A")
        _check_closed(B, "B")
        if not B <= A:
            raise HomologyDomainError("B is not contained in A.")

        self.rank_of = None if vertex_order is None else {v: k for k, v in enumerate(vertex_order)}

        top = max((s.dim for s in A - B), default=-1)
        self.basis = [sorted(s for s in A - B if s.dim == k) for k in range(top + 1)]
        self._pos = [{s: i for i, s in enumerate(b)} for b in self.basis]

    @property
    def top_dim(self) -> int:
        return len(self.basis) - 1

    def rank(self, k: int) -> int:
        """Dimension of the chain group C_k."""
        return len(self.basis[k]) if 0 <= k < len(self.basis) else 0

    def _ordered(self, s: Simplex) -> list[int]:
        if self.rank_of is None:
            return list(s.vertices)
        return sorted(s.vertices, key=lambda v: self.rank_of[v])

    def boundary_matrix(self, k: int) -> DomainMatrix:
        """The matrix of ∂_k: C_k -> C_{k-1} over QQ, with rows indexed by basis[k-1] and columns by basis[k]."""
        rows, cols = self.rank(k - 1), self.rank(k)
        entries = {}
        if rows > 0 and cols > 0:
            for j, s in enumerate(self.basis[k]):
                vs = self._ordered(s)
                for i in range(len(vs)):
                    f = Simplex(vs[:i] + vs[i+1:])
                    r = self._pos[k-1].get(f)
                    if r is None:
                        continue # facet in B
                    entries.setdefault(r, {})[j] = QQ(-1 if i % 2 else 1)

        return DomainMatrix(entries, (rows, cols), QQ)

    def boundary_rank(self, k: int) -> int:
        if self.rank(k) == 0 or self.rank(k - 1) == 0:
            return 0
        return self.boundary_matrix(k).rank()

    def check(self) -> bool:
        """Whether ∂_{k-1} ∘ ∂_k = 0 in every degree."""
        for k in range(2, len(self.basis)):
            if self.rank(k) == 0 or self.rank(k - 2) == 0:
                continue
            prod = self.boundary_matrix(k - 1) * self.boundary_matrix(k)
            if not prod.to_Matrix().is_zero_matrix:
                return False

        return True

    def euler_characteristic(self) -> int:
        return sum((-1)**k * self.rank(k) for k in range(len(self.basis)))

    def betti(self) -> tuple[int, ...]:
        """Betti numbers β_k = dim C_k - rank ∂_k - rank ∂_{k+1}, trailing zeros trimmed."""
        ranks = [self.boundary_rank(k) for k in range(len(self.basis) + 1)]
        b = [self.rank(k) - ranks[k] - ranks[k+1] for k in range(len(self.basis))]

        logger.debug("chain ranks %s, boundary ranks %s, betti %s",
                     [self.rank(k) for k in range(len(self.basis))], ranks, b)
        return PoincarePolynomial(b).coefs


def relative_betti(A: Iterable[Simplex], B: Iterable[Simplex] = (), vertex_order: Sequence[int] = None) -> tuple[int, ...]:
    """Returns the rational Betti numbers of the simplicial pair (A, B), trailing zeros trimmed.

    Raises:
        HomologyDomainError: if the input is not a pair of subcomplexes.
    """
    return ChainComplex(A, B, vertex_order=vertex_order).betti()

def absolute_betti(A: Iterable[Simplex], vertex_order: Sequence[int] = None) -> tuple[int, ...]:
    return relative_betti(A, (), vertex_order=vertex_order)

def poincare_polynomial(A: Iterable[Simplex], B: Iterable[Simplex] = ()) -> PoincarePolynomial:
    return PoincarePolynomial(relative_betti(A, B))
