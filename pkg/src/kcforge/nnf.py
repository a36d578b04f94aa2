"""NNF circuits with fan-in two, and the decomposability / determinism checkers.

A circuit is a tuple of nodes addressed by position.  Each node is a plain
tuple whose first entry is its kind::

    ("F",)  ("T",)  ("L", var, positive)  ("A", left, right)  ("O", left, right)

Nodes may appear in any order as long as the graph is acyclic; the root is an
explicit index and nodes not reachable from it are ignored by every query.
"""

from __future__ import annotations

import typing as t
from dataclasses import dataclass
from functools import cached_property

from .core import (
    Assignment,
    Dnf,
    FunTable,
    KcError,
    Universe,
    UniverseMismatch,
    VarId,
    _Masks,
    _check_universe,
    check_guard,
)

Node = t.Tuple
FALSE: Node = ("F",)
TRUE: Node = ("T",)


class CircuitError(KcError):
    pass


@dataclass(frozen=True)
class Check:
    """Outcome of a structural check; falsy when a violation was found."""

    ok: bool
    witness: t.Any = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def _mask_of(vars_: t.Iterable[VarId]) -> int:
    m = 0
    for v in vars_:
        m |= 1 << v
    return m


def mask_vars(mask: int) -> t.List[VarId]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def topo_order(nodes: t.Sequence[Node], root: int, internal: t.Container[str]) -> t.Tuple[int, ...]:
    """Node ids reachable from ``root``, children before parents; raises on cycles."""
    out: t.List[int] = []
    state: t.Dict[int, int] = {}
    stack = [(root, False)]
    while stack:
        i, expanded = stack.pop()
        if expanded:
            state[i] = 2
            out.append(i)
            continue
        s = state.get(i)
        if s == 2:
            continue
        if s == 1:
            raise CircuitError(f"cycle through node {i}")
        state[i] = 1
        stack.append((i, True))
        node = nodes[i]
        if node[0] in internal:
            for c in (node[2], node[1]):
                if state.get(c) == 1:
                    raise CircuitError(f"cycle through node {c}")
                if c not in state:
                    stack.append((c, False))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Circuit:
    nodes: t.Tuple[Node, ...]
    root: int
    dom: Universe

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(tuple(n) for n in self.nodes))
        object.__setattr__(self, "dom", _check_universe(self.dom))
        if not 0 <= self.root < len(self.nodes):
            raise CircuitError(f"root {self.root} out of range")
        dom = set(self.dom)
        for i, node in enumerate(self.nodes):
            kind = node[0]
            if kind in ("A", "O"):
                if len(node) != 3:
                    raise CircuitError(f"node {i}: internal nodes have fan-in two")
                for c in node[1:]:
                    if not 0 <= c < len(self.nodes):
                        raise CircuitError(f"node {i}: child {c} out of range")
            elif kind == "L":
                if node[1] not in dom:
                    raise CircuitError(f"node {i}: variable {node[1]} not in dom")
            elif kind not in ("F", "T"):
                raise CircuitError(f"node {i}: unknown kind {kind!r}")
        self.order  # raises on cycles

    def __eq__(self, other):
        return (isinstance(other, Circuit) and self.nodes == other.nodes
                and self.root == other.root and self.dom == other.dom)

    def __hash__(self):
        return hash((self.nodes, self.root, self.dom))

    @cached_property
    def order(self) -> t.Tuple[int, ...]:
        """Reachable node ids, children before parents."""
        return topo_order(self.nodes, self.root, ("A", "O"))

    @cached_property
    def var_masks(self) -> t.Dict[int, int]:
        """var(C(g)) as a bitmask over variable ids, for every reachable g."""
        masks: t.Dict[int, int] = {}
        for i in self.order:
            node = self.nodes[i]
            kind = node[0]
            if kind == "L":
                masks[i] = 1 << node[1]
            elif kind in ("A", "O"):
                masks[i] = masks[node[1]] | masks[node[2]]
            else:
                masks[i] = 0
        return masks

    def variables(self) -> t.List[VarId]:
        return mask_vars(self.var_masks[self.root])

    def __len__(self) -> int:
        return circuit_size(self)

    def children(self, i: int) -> t.Tuple[int, ...]:
        node = self.nodes[i]
        return tuple(node[1:]) if node[0] in ("A", "O") else ()

    def with_dom(self, dom: t.Sequence[VarId]) -> "Circuit":
        return Circuit(self.nodes, self.root, tuple(dom))


class Builder:
    """Incremental circuit construction with optional structural hashing."""

    def __init__(self, dedup: bool = True):
        self.nodes: t.List[Node] = []
        self.dedup = dedup
        self._index: t.Dict[Node, int] = {}

    def add(self, node: Node) -> int:
        node = tuple(node)
        if self.dedup:
            i = self._index.get(node)
            if i is not None:
                return i
        self.nodes.append(node)
        i = len(self.nodes) - 1
        if self.dedup:
            self._index[node] = i
        return i

    def false(self) -> int:
        return self.add(FALSE)

    def true(self) -> int:
        return self.add(TRUE)

    def lit(self, var: VarId, positive: bool = True) -> int:
        return self.add(("L", var, bool(positive)))

    def signed(self, lit: int) -> int:
        return self.lit(abs(lit), lit > 0)

    def and_(self, left: int, right: int) -> int:
        return self.add(("A", left, right))

    def or_(self, left: int, right: int) -> int:
        return self.add(("O", left, right))

    def and_all(self, ids: t.Sequence[int]) -> int:
        """Left-leaning binary conjunction; the empty conjunction is 1."""
        return self._fold(ids, self.and_, self.true)

    def or_all(self, ids: t.Sequence[int]) -> int:
        return self._fold(ids, self.or_, self.false)

    @staticmethod
    def _fold(ids, op, empty):
        ids = list(ids)
        if not ids:
            return empty()
        acc = ids[0]
        for i in ids[1:]:
            acc = op(acc, i)
        return acc

    def copy_from(self, c: Circuit, root: int | None = None) -> int:
        """Import the subcircuit of ``c`` rooted at ``root``; returns the new id."""
        root = c.root if root is None else root
        sub = Circuit(c.nodes, root, c.dom)
        remap: t.Dict[int, int] = {}
        for i in sub.order:
            node = c.nodes[i]
            if node[0] in ("A", "O"):
                remap[i] = self.add((node[0], remap[node[1]], remap[node[2]]))
            else:
                remap[i] = self.add(node)
        return remap[root]

    def build(self, root: int, dom: t.Sequence[VarId]) -> Circuit:
        return Circuit(tuple(self.nodes), root, tuple(dom))


def dnf_circuit(d: Dnf) -> Circuit:
    """The direct OR-of-term-ANDs circuit for a DNF (terms in file order)."""
    b = Builder()
    terms = [b.and_all([b.signed(l) for l in term.signed()]) for term in d.terms]
    return b.build(b.or_all(terms), d.universe)


def eval_circuit(c: Circuit, a: Assignment) -> int:
    if a.universe != c.dom:
        raise UniverseMismatch("assignment universe differs from dom(C)")
    values = a.as_dict()
    val: t.Dict[int, int] = {}
    for i in c.order:
        node = c.nodes[i]
        kind = node[0]
        if kind == "F":
            val[i] = 0
        elif kind == "T":
            val[i] = 1
        elif kind == "L":
            val[i] = values[node[1]] if node[2] else 1 - values[node[1]]
        elif kind == "A":
            val[i] = val[node[1]] & val[node[2]]
        else:
            val[i] = val[node[1]] | val[node[2]]
    return val[c.root]


def circuit_size(c: Circuit) -> int:
    return len(c.order)


def node_tables(c: Circuit, guard: int | None = None) -> t.Dict[int, int]:
    """Satisfying sets (bitsets over ``c.dom``) of every reachable subcircuit."""
    n = len(c.dom)
    check_guard(n, "circuit-table", guard)
    masks = _Masks.get(n)
    full = FunTable.full_mask(n)
    pos = {v: i for i, v in enumerate(c.dom)}
    tab: t.Dict[int, int] = {}
    for i in c.order:
        node = c.nodes[i]
        kind = node[0]
        if kind == "F":
            tab[i] = 0
        elif kind == "T":
            tab[i] = full
        elif kind == "L":
            m = masks[pos[node[1]]]
            tab[i] = m if node[2] else full ^ m
        elif kind == "A":
            tab[i] = tab[node[1]] & tab[node[2]]
        else:
            tab[i] = tab[node[1]] | tab[node[2]]
    return tab


def circuit_to_fn(c: Circuit, guard: int | None = None) -> FunTable:
    return FunTable(c.dom, node_tables(c, guard)[c.root])


def is_decomposable(c: Circuit) -> Check:
    masks = c.var_masks
    for i in c.order:
        node = c.nodes[i]
        if node[0] == "A":
            shared = masks[node[1]] & masks[node[2]]
            if shared:
                return Check(False, i, f"AND node {i}: children share variables {mask_vars(shared)}")
    return Check(True)


def is_deterministic(c: Circuit, guard: int | None = None) -> Check:
    """Semantic determinism: the children of every OR node have disjoint models over dom(C)."""
    tab = node_tables(c, guard)
    for i in c.order:
        node = c.nodes[i]
        if node[0] == "O":
            both = tab[node[1]] & tab[node[2]]
            if both:
                rank = (both & -both).bit_length() - 1
                a = Assignment.from_rank(c.dom, rank)
                return Check(False, (i, a), f"OR node {i}: both children accept {a.as_dict()}")
    return Check(True)


def is_decision_deterministic(c: Circuit) -> Check:
    """Sufficient only: every OR node has the shape (x AND .) OR (not-x AND .).

    A ``True`` verdict implies determinism; ``False`` says nothing.
    """
    for i in c.order:
        node = c.nodes[i]
        if node[0] != "O":
            continue
        l, r = c.nodes[node[1]], c.nodes[node[2]]
        if l[0] != "A" or r[0] != "A":
            return Check(False, i, f"OR node {i} is not a decision node")
        lits_l = _lit_children(c, l)
        lits_r = _lit_children(c, r)
        if not any((v, not p) in lits_r for v, p in lits_l):
            return Check(False, i, f"OR node {i} is not a decision node")
    return Check(True)


def _lit_children(c: Circuit, node: Node) -> t.Set[t.Tuple[VarId, bool]]:
    out = set()
    for ch in node[1:]:
        n = c.nodes[ch]
        if n[0] == "L":
            out.add((n[1], n[2]))
    return out


def prune(c: Circuit) -> Circuit:
    """Drop unreachable nodes, renumbering in children-first order."""
    b = Builder(dedup=False)
    root = b.copy_from(c)
    return b.build(root, c.dom)


def deduplicate(c: Circuit) -> Circuit:
    """Merge structurally identical subcircuits."""
    b = Builder(dedup=True)
    root = b.copy_from(c)
    return b.build(root, c.dom)


def expanded_formula(c: Circuit, limit: int = 4096) -> str:
    """The formula obtained by expanding the DAG into a tree (for small fixtures)."""
    memo: t.Dict[int, str] = {}
    for i in c.order:
        node = c.nodes[i]
        kind = node[0]
        if kind == "F":
            s = "0"
        elif kind == "T":
            s = "1"
        elif kind == "L":
            s = f"x{node[1]}" if node[2] else f"~x{node[1]}"
        else:
            op = " & " if kind == "A" else " | "
            s = f"({memo[node[1]]}{op}{memo[node[2]]})"
        if len(s) > limit:
            raise CircuitError("expanded formula too large to print")
        memo[i] = s
    return memo[c.root]
