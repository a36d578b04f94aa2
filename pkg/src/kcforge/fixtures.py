"""Golden fixtures: the two worked figures and the small lifting instance."""

from fractions import Fraction

from .core import Dnf
from .nnf import Circuit
from .vtree import VTree

A, B, C, D, E = 1, 2, 3, 4, 5


def figure1_vtree() -> VTree:
    return VTree.from_nested((((A, B), C), (D, E)))


def figure1_circuit() -> Circuit:
    """The structured d-DNNF drawn next to the v-tree (15 nodes)."""
    nodes = [
        ("L", A, True),     # 0
        ("L", B, True),     # 1
        ("A", 0, 1),        # 2  a & b
        ("L", C, False),    # 3  ~c
        ("A", 2, 3),        # 4  (a & b) & ~c
        ("L", C, True),     # 5
        ("A", 2, 5),        # 6  (a & b) & c
        ("L", E, True),     # 7
        ("A", 6, 7),        # 8  abc & e
        ("L", D, True),     # 9
        ("L", E, False),    # 10
        ("A", 9, 10),       # 11 d & ~e
        ("A", 6, 11),       # 12 abc & (d & ~e)
        ("O", 12, 8),       # 13
        ("O", 13, 4),       # 14 root
    ]
    return Circuit(tuple(nodes), 14, (A, B, C, D, E))


def figure1_dnf() -> Dnf:
    return Dnf.of((A, B, C, D, E), [[A, B, -C], [A, B, C, E], [A, B, C, D, -E]])


def figure2_circuit(exact: bool = True):
    """(a + 0) * (b * (~c + 3)) over dom {a, b, c}."""
    from .ac import ArithCircuit

    three = Fraction(3) if exact else 3.0
    zero = Fraction(0) if exact else 0.0
    nodes = [
        ("L", A, True),   # 0 a
        ("C", zero),      # 1 0
        ("P", 0, 1),      # 2 a + 0
        ("L", B, True),   # 3 b
        ("L", C, False),  # 4 ~c
        ("C", three),     # 5 3
        ("P", 4, 5),      # 6 ~c + 3
        ("M", 3, 6),      # 7 b * (~c + 3)
        ("M", 2, 7),      # 8 root
    ]
    return ArithCircuit(tuple(nodes), 8, (A, B, C))


def xor_dnf() -> Dnf:
    """(x1 & ~x2) | (~x1 & x2): the two-variable lifting fixture."""
    return Dnf.of((1, 2), [[1, -2], [-1, 2]])


def eq_dnf() -> Dnf:
    """(x1 & x2) | (~x1 & ~x2): the two-variable fixture used for the lifting checks.

    Unlike XOR, its copy expansion is not symmetric under slot permutations,
    so the lifted function keeps the source cover numbers under every
    balanced partition.
    """
    return Dnf.of((1, 2), [[1, 2], [-1, -2]])


def random_unambiguous_dnf(universe, rng, stop: float = 0.3, keep: float = 0.5) -> Dnf:
    """Paths of a random decision tree, keeping each leaf as a term with probability ``keep``.

    Distinct root-to-leaf paths disagree on the variable where they part,
    so the result is unambiguous by construction.
    """
    universe = tuple(universe)
    terms = []

    def grow(path, free):
        if not free or (path and rng.random() < stop):
            if rng.random() < keep:
                terms.append(list(path))
            return
        v = rng.choice(free)
        rest = [u for u in free if u != v]
        grow(path + [v], rest)
        grow(path + [-v], rest)

    grow([], list(universe))
    return Dnf.of(universe, terms)
