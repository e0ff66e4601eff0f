"""Small complexes and combinatorial vector fields used as examples and in the tests."""

from .complex import SimplicialComplex
from .cvf import Arrow, CombinatorialVectorField, Critical


def running_example() -> CombinatorialVectorField:
    """Two triangles ABD, BCD glued along BD, with the edges DE and DF attached at D.
    The critical cells are F, BD and ABD; every other simplex is paired."""
    X = SimplicialComplex.from_names(list("ABCDEF"), ["ABD", "BCD", "DE", "DF"])
    s = X.simplex
    cells = [
        Critical(s("F")), Critical(s("B", "D")), Critical(s("A", "B", "D")),
        Arrow(s("A"), s("A", "D")),
        Arrow(s("B"), s("A", "B")),
        Arrow(s("B", "C"), s("B", "C", "D")),
        Arrow(s("C"), s("C", "D")),
        Arrow(s("D"), s("D", "F")),
        Arrow(s("E"), s("D", "E")),
    ]
    return CombinatorialVectorField(X, cells)

def periodic_triangle() -> CombinatorialVectorField:
    """The boundary of a triangle with the arrows A -> AB, B -> BC, C -> CA: a single periodic orbit."""
    X = SimplicialComplex.from_names(list("ABC"), ["AB", "BC", "AC"])
    s = X.simplex
    return CombinatorialVectorField(X, [
        Arrow(s("A"), s("A", "B")),
        Arrow(s("B"), s("B", "C")),
        Arrow(s("C"), s("A", "C")),
    ])

def all_critical_triangle() -> CombinatorialVectorField:
    """A filled triangle where all 7 simplices are critical."""
    X = SimplicialComplex.from_names(list("ABC"), ["ABC"])
    return CombinatorialVectorField.all_critical(X)

def critical_edge() -> CombinatorialVectorField:
    """A single edge EF with all three simplices critical."""
    X = SimplicialComplex.from_names(list("EF"), ["EF"])
    return CombinatorialVectorField.all_critical(X)


EXAMPLES = {
    'running': running_example,
    'periodic-triangle': periodic_triangle,
    'critical-triangle': all_critical_triangle,
    'critical-edge': critical_edge,
}

def example(name: str) -> CombinatorialVectorField:
    """Returns the example field with the given name.

    Raises:
        KeyError: if there is no such example.
    """
    try:
        return EXAMPLES[name]()
    except KeyError:
        raise KeyError(f"Unknown example {name!r}, available: {', '.join(EXAMPLES)}.") from None
