"""V-trees, the respects relation, and circuit constructions that follow a v-tree."""

from __future__ import annotations

import itertools
import typing as t
from dataclasses import dataclass
from functools import cached_property

from .core import Dnf, GuardError, KcError, VarId, require_unambiguous
from .nnf import Builder, Check, Circuit, mask_vars, prune

VNode = t.Tuple

MAX_ENUMERATION_VARS = 7


class VTreeError(KcError):
    pass


@dataclass(frozen=True)
class VTree:
    """Full binary tree over variables, stored children-first; the root is the last node.

    Nodes are ``("L", var)`` or ``("I", left, right)``.  Children are ordered.
    """

    nodes: t.Tuple[VNode, ...]

    def __post_init__(self):
        nodes = tuple(tuple(n) for n in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if not nodes:
            raise VTreeError("empty v-tree")
        seen_vars: t.Set[VarId] = set()
        used = [0] * len(nodes)
        for i, node in enumerate(nodes):
            if node[0] == "L":
                if len(node) != 2 or node[1] <= 0:
                    raise VTreeError(f"node {i}: bad leaf")
                if node[1] in seen_vars:
                    raise VTreeError(f"variable {node[1]} labels two leaves")
                seen_vars.add(node[1])
            elif node[0] == "I":
                if len(node) != 3:
                    raise VTreeError(f"node {i}: internal nodes have two children")
                for c in node[1:]:
                    if not 0 <= c < i:
                        raise VTreeError(f"node {i}: child {c} must precede its parent")
                    used[c] += 1
            else:
                raise VTreeError(f"node {i}: unknown kind {node[0]!r}")
        root = len(nodes) - 1
        if used[root] or any(u != 1 for k, u in enumerate(used) if k != root):
            raise VTreeError("nodes do not form a single tree rooted at the last node")

    @classmethod
    def from_nested(cls, nested) -> "VTree":
        """Build from nested pairs, e.g. ``(((1, 2), 3), (4, 5))``."""
        nodes: t.List[VNode] = []

        def walk(s) -> int:
            if isinstance(s, int):
                nodes.append(("L", s))
            else:
                left, right = s
                l, r = walk(left), walk(right)
                nodes.append(("I", l, r))
            return len(nodes) - 1

        walk(nested)
        return cls(tuple(nodes))

    @classmethod
    def right_linear(cls, variables: t.Sequence[VarId]) -> "VTree":
        nested: t.Any = variables[-1]
        for v in reversed(variables[:-1]):
            nested = (v, nested)
        return cls.from_nested(nested)

    @classmethod
    def balanced(cls, variables: t.Sequence[VarId]) -> "VTree":
        def split(vs):
            if len(vs) == 1:
                return vs[0]
            h = (len(vs) + 1) // 2
            return (split(vs[:h]), split(vs[h:]))

        return cls.from_nested(split(list(variables)))

    @property
    def root(self) -> int:
        return len(self.nodes) - 1

    def __len__(self) -> int:
        return len(self.nodes)

    def is_leaf(self, i: int) -> bool:
        return self.nodes[i][0] == "L"

    def left(self, i: int) -> int:
        return self.nodes[i][1]

    def right(self, i: int) -> int:
        return self.nodes[i][2]

    @cached_property
    def masks(self) -> t.Tuple[int, ...]:
        out: t.List[int] = []
        for node in self.nodes:
            if node[0] == "L":
                out.append(1 << node[1])
            else:
                out.append(out[node[1]] | out[node[2]])
        return tuple(out)

    @cached_property
    def leaves(self) -> t.Tuple[VarId, ...]:
        """Variables in left-to-right leaf order."""
        out: t.List[VarId] = []
        stack = [self.root]
        while stack:
            i = stack.pop()
            node = self.nodes[i]
            if node[0] == "L":
                out.append(node[1])
            else:
                stack.append(node[2])
                stack.append(node[1])
        return tuple(out)

    @cached_property
    def leaf_of(self) -> t.Dict[VarId, int]:
        return {node[1]: i for i, node in enumerate(self.nodes) if node[0] == "L"}

    @cached_property
    def parent(self) -> t.Dict[int, int]:
        out = {}
        for i, node in enumerate(self.nodes):
            if node[0] == "I":
                out[node[1]] = i
                out[node[2]] = i
        return out

    def variables(self, i: int | None = None) -> t.List[VarId]:
        return mask_vars(self.masks[self.root if i is None else i])

    def internal_nodes(self) -> t.List[int]:
        return [i for i, n in enumerate(self.nodes) if n[0] == "I"]

    def in_subtree(self, i: int, ancestor: int) -> bool:
        """Whether node ``i`` lies in the subtree rooted at ``ancestor``."""
        return (self.masks[i] & ~self.masks[ancestor]) == 0

    def lowest_cover(self, mask: int) -> int | None:
        """Deepest node whose variable set contains ``mask`` (None for empty masks)."""
        if not mask:
            return None
        i = self.root
        if mask & ~self.masks[i]:
            raise VTreeError("variables outside the v-tree")
        while self.nodes[i][0] == "I":
            l, r = self.nodes[i][1], self.nodes[i][2]
            if not mask & ~self.masks[l]:
                i = l
            elif not mask & ~self.masks[r]:
                i = r
            else:
                break
        return i

    def nested(self, i: int | None = None):
        i = self.root if i is None else i
        node = self.nodes[i]
        if node[0] == "L":
            return node[1]
        return (self.nested(node[1]), self.nested(node[2]))

    def __str__(self):
        return str(self.nested())


def split_respects(t_: VTree, left_mask: int, right_mask: int) -> int | None:
    """A v-tree node whose left/right spans contain the given variable sets, if any."""
    masks = t_.masks
    for i, node in enumerate(t_.nodes):
        if node[0] == "I":
            if not left_mask & ~masks[node[1]] and not right_mask & ~masks[node[2]]:
                return i
    return None


def respects(c: Circuit, t_: VTree) -> Check:
    """Every AND node splits along (left, right) of some v-tree node, children in order."""
    vm = c.var_masks
    outside = vm[c.root] & ~t_.masks[t_.root]
    if outside:
        raise VTreeError(f"circuit variables {mask_vars(outside)} are not v-tree leaves")
    for i in c.order:
        node = c.nodes[i]
        if node[0] == "A":
            if split_respects(t_, vm[node[1]], vm[node[2]]) is None:
                return Check(False, i, f"AND node {i}: no v-tree node separates "
                                       f"{mask_vars(vm[node[1]])} | {mask_vars(vm[node[2]])}")
    return Check(True)


def compile_unambiguous_dnf(d: Dnf, t_: VTree) -> Circuit:
    """d-SDNNF for an unambiguous DNF: each term follows the v-tree, terms are OR-ed."""
    if set(t_.leaves) != set(d.universe):
        raise VTreeError("v-tree leaves must equal the DNF universe")
    require_unambiguous(d)
    b = Builder()

    def term_at(term_lits: t.Dict[VarId, bool], mask: int, i: int) -> int:
        node = t_.nodes[i]
        if node[0] == "L":
            return b.lit(node[1], term_lits[node[1]])
        lm, rm = t_.masks[node[1]], t_.masks[node[2]]
        if mask & lm and mask & rm:
            return b.and_(term_at(term_lits, mask & lm, node[1]), term_at(term_lits, mask & rm, node[2]))
        if mask & lm:
            return term_at(term_lits, mask, node[1])
        return term_at(term_lits, mask, node[2])

    ids = []
    for term in d.terms:
        if not term.mask:
            ids.append(b.true())
            continue
        lits = {v: p for v, p in term.literals}
        ids.append(term_at(lits, term.mask, t_.root))
    return b.build(b.or_all(ids), d.universe)


def shannon_join(cf: Circuit, cg: Circuit, x: VarId, t_: VTree) -> t.Tuple[Circuit, VTree]:
    """Build (x AND C_f) OR (not-x AND C_g) over a v-tree with a new root (x, T).

    Node lists are concatenated without merging, so the size is exactly
    ``|C_f| + |C_g| + 5``.
    """
    if x in t_.leaf_of:
        raise VTreeError(f"variable {x} already labels a v-tree leaf")
    for name, c in (("f", cf), ("g", cg)):
        if x in c.dom:
            raise VTreeError(f"variable {x} already in dom(C_{name})")
        verdict = respects(c, t_)
        if not verdict:
            raise VTreeError(f"C_{name} does not respect the v-tree: {verdict.reason}")
    vnodes = list(t_.nodes)
    old_root = t_.root
    vnodes.append(("L", x))
    vnodes.append(("I", len(vnodes) - 1, old_root))
    new_t = VTree(tuple(vnodes))

    pf, pg = prune(cf), prune(cg)
    nodes = list(pf.nodes)
    off = len(nodes)
    for node in pg.nodes:
        if node[0] in ("A", "O"):
            node = (node[0], node[1] + off, node[2] + off)
        nodes.append(node)
    fx = len(nodes)
    nodes += [("L", x, True), ("L", x, False)]
    nodes.append(("A", fx, pf.root))
    nodes.append(("A", fx + 1, pg.root + off))
    nodes.append(("O", fx + 2, fx + 3))
    dom = (x,) + tuple(v for v in t_.leaves)
    return Circuit(tuple(nodes), len(nodes) - 1, dom), new_t


def enumerate_vtrees(universe: t.Sequence[VarId], start: int = 0,
                     stop: int | None = None) -> t.Iterator[VTree]:
    """Every v-tree over ``universe`` (ordered children), each exactly once.

    The stream order is deterministic, so ``start``/``stop`` select a
    reproducible slice for splitting the work.
    """
    universe = tuple(universe)
    if len(universe) > MAX_ENUMERATION_VARS:
        raise GuardError("vtree-enumeration", len(universe), MAX_ENUMERATION_VARS)
    if not universe:
        return iter(())
    gen = (VTree.from_nested(s) for s in _shapes(universe))
    return itertools.islice(gen, start, stop)


def _shapes(vs: t.Tuple[VarId, ...]):
    if len(vs) == 1:
        yield vs[0]
        return
    n = len(vs)
    for size in range(1, n):
        for left in itertools.combinations(vs, size):
            right = tuple(v for v in vs if v not in left)
            for ls in _shapes(left):
                for rs in _shapes(right):
                    yield (ls, rs)


def count_vtrees(n: int) -> int:
    """Closed form for the stream length: (2n-3)!! unordered shapes times 2^(n-1) child orders."""
    if n <= 0:
        return 0
    df = 1
    for k in range(2 * n - 3, 0, -2):
        df *= k
    return df * 2 ** (n - 1)


def find_respecting_vtree(c: Circuit) -> VTree | None:
    """Exhaustive search for a v-tree over dom(C) that C respects (small doms only)."""
    for vt in enumerate_vtrees(c.dom):
        if respects(c, vt):
            return vt
    return None
