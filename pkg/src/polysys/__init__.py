"""Polynomial functors, coalgebraic dynamical systems and learners over finite sets."""
from .coalg import Coalgebra, InitializedMachine, PTree, mk_moore, run_stream
from .finpoly import (
    FinPoly,
    FinSet,
    HomTooLarge,
    InterfaceMismatch,
    PolyMap,
    compose_poly,
    internal_hom,
    monomial,
    parse,
    tensor,
)

__version__ = "0.1.0"

__all__ = [
    "Coalgebra", "FinPoly", "FinSet", "HomTooLarge", "InitializedMachine", "InterfaceMismatch",
    "PTree", "PolyMap", "compose_poly", "internal_hom", "mk_moore", "monomial", "parse",
    "run_stream", "tensor",
]
