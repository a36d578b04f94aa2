"""Knowledge-compilation toolkit: NNF circuits, v-trees, SDDs, rectangle
oracles, the unambiguous-DNF lifting construction and monotone arithmetic
circuits, all checkable by brute force on small instances."""

__version__ = "0.1.0"

from .core import Assignment, Dnf, FunTable, GuardError, KcError, Term, dnf_to_fn, is_unambiguous
from .nnf import Circuit, circuit_to_fn, is_decomposable, is_deterministic
from .vtree import VTree, compile_unambiguous_dnf, respects, shannon_join

__all__ = [
    "Assignment", "Circuit", "Dnf", "FunTable", "GuardError", "KcError", "Term", "VTree",
    "circuit_to_fn", "compile_unambiguous_dnf", "dnf_to_fn", "is_decomposable",
    "is_deterministic", "is_unambiguous", "respects", "shannon_join",
]
