"""Combinatorial Conley theory for Forman vector fields on simplicial complexes, and the semiflows realizing them
on the polytope of the complex."""

__version__ = "1.0.0"
