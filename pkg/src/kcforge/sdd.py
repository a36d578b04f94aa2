"""Sentential decision diagrams over a fixed v-tree.

A manager owns every node.  Node ids are small integers; ``0`` is false and
``1`` is true.  Other nodes are literals ``("L", var, positive)`` or
decisions ``("D", vnode, elements)`` where ``elements`` is a tuple of
``(prime, sub)`` id pairs sorted by prime id.

Normal form kept by the manager:

* a decision sits at the lowest v-tree node covering both operands of the
  apply that produced it;
* elements whose prime is false are dropped;
* a decision with the single element ``(true, s)`` is replaced by ``s``;
* a decision whose subs are all false (all true) is replaced by false (true).

The last rule keeps the constants canonical: a node is unsatisfiable iff its
id is 0, which is what the apply loop uses to discard inconsistent primes.
Compression (merging elements with equal subs) is optional.
"""

from __future__ import annotations

import typing as t

from .core import Dnf, FunTable, KcError, VarId, _Masks, check_guard
from .nnf import Builder, Check, Circuit, mask_vars
from .vtree import VTree, VTreeError

FALSE = 0
TRUE = 1

AND = "and"
OR = "or"
OPS = (AND, OR)

Element = t.Tuple[int, int]


class SddError(KcError):
    pass


class SddManager:
    def __init__(self, vtree: VTree, compress: bool = False):
        self.vtree = vtree
        self.compress = compress
        self.universe: t.Tuple[VarId, ...] = vtree.leaves
        self.nodes: t.List[t.Tuple] = [("F",), ("T",)]
        self.vnode: t.List[int | None] = [None, None]
        self.masks: t.List[int] = [0, 0]
        self._unique: t.Dict[t.Tuple, int] = {("F",): FALSE, ("T",): TRUE}
        self._neg: t.Dict[int, int] = {FALSE: TRUE, TRUE: FALSE}
        self._apply: t.Dict[t.Tuple[int, int, str], int] = {}
        self._tables: t.Dict[int, int] = {}
        self.cache_hits = 0

    # -- node construction -------------------------------------------------

    def _intern(self, node: t.Tuple, vnode: int, mask: int) -> int:
        i = self._unique.get(node)
        if i is None:
            i = len(self.nodes)
            self.nodes.append(node)
            self.vnode.append(vnode)
            self.masks.append(mask)
            self._unique[node] = i
        return i

    def literal(self, var: VarId, positive: bool = True) -> int:
        leaf = self.vtree.leaf_of.get(var)
        if leaf is None:
            raise VTreeError(f"variable {var} is not a v-tree leaf")
        return self._intern(("L", var, bool(positive)), leaf, 1 << var)

    def signed(self, lit: int) -> int:
        return self.literal(abs(lit), lit > 0)

    def raw_decision(self, vnode: int, elements: t.Iterable[Element]) -> int:
        """Intern a decision exactly as given (no trimming); used by parsers and tests."""
        elems = tuple(sorted((int(p), int(s)) for p, s in elements))
        if not elems:
            raise SddError("a decision needs at least one element")
        if not 0 <= vnode < len(self.vtree) or self.vtree.is_leaf(vnode):
            raise SddError(f"decision must sit at an internal v-tree node, got {vnode}")
        for p, s in elems:
            for x in (p, s):
                if not 0 <= x < len(self.nodes):
                    raise SddError(f"unknown node id {x}")
        mask = 0
        for p, s in elems:
            mask |= self.masks[p] | self.masks[s]
        return self._intern(("D", vnode, elems), vnode, mask)

    def decision(self, vnode: int, elements: t.Iterable[Element]) -> int:
        """Intern a decision after applying the normal-form rules."""
        elems = [(p, s) for p, s in elements if p != FALSE]
        if self.compress:
            merged: t.Dict[int, int] = {}
            for p, s in elems:
                merged[s] = p if s not in merged else self.apply(merged[s], p, OR)
            elems = [(p, s) for s, p in merged.items()]
        if not elems:
            raise SddError("all primes are false; elements are not exhaustive")
        if len(elems) == 1:
            p, s = elems[0]
            if p != TRUE:
                raise SddError("single prime that is not true; elements are not exhaustive")
            return s
        subs = {s for _, s in elems}
        if subs == {FALSE}:
            return FALSE
        if subs == {TRUE}:
            return TRUE
        return self.raw_decision(vnode, elems)

    # -- queries -----------------------------------------------------------

    def is_terminal(self, n: int) -> bool:
        return self.nodes[n][0] != "D"

    def elements(self, n: int) -> t.Tuple[Element, ...]:
        node = self.nodes[n]
        if node[0] != "D":
            raise SddError(f"node {n} is not a decision")
        return node[2]

    def variables(self, n: int) -> t.List[VarId]:
        return mask_vars(self.masks[n])

    def reachable(self, n: int) -> t.List[int]:
        """Node ids reachable from ``n``, children first."""
        out: t.List[int] = []
        seen: t.Set[int] = set()
        stack = [(n, False)]
        while stack:
            i, done = stack.pop()
            if done:
                out.append(i)
                continue
            if i in seen:
                continue
            seen.add(i)
            stack.append((i, True))
            node = self.nodes[i]
            if node[0] == "D":
                for p, s in reversed(node[2]):
                    stack.append((s, False))
                    stack.append((p, False))
        return out

    def size(self, n: int) -> int:
        """Total number of elements over all reachable decisions."""
        return sum(len(self.nodes[i][2]) for i in self.reachable(n) if self.nodes[i][0] == "D")

    def count_nodes(self, n: int) -> int:
        return len(self.reachable(n))

    def table(self, n: int, guard: int | None = None) -> int:
        """Satisfying set of node ``n`` as a bitset over the manager universe."""
        nv = len(self.universe)
        check_guard(nv, "sdd-table", guard)
        masks = _Masks.get(nv)
        full = FunTable.full_mask(nv)
        pos = {v: i for i, v in enumerate(self.universe)}
        tables = self._tables
        for i in self.reachable(n):
            if i in tables:
                continue
            node = self.nodes[i]
            if node[0] == "F":
                tables[i] = 0
            elif node[0] == "T":
                tables[i] = full
            elif node[0] == "L":
                m = masks[pos[node[1]]]
                tables[i] = m if node[2] else full ^ m
            else:
                bits = 0
                for p, s in node[2]:
                    bits |= tables[p] & tables[s]
                tables[i] = bits
        return tables[n]

    def to_fn(self, n: int) -> FunTable:
        return FunTable(self.universe, self.table(n))

    # -- operations ----------------------------------------------------------

    def negate(self, n: int) -> int:
        """Complement: terminals flip, decisions keep their primes and negate every sub."""
        hit = self._neg.get(n)
        if hit is not None:
            return hit
        for i in self.reachable(n):
            if i in self._neg:
                continue
            node = self.nodes[i]
            if node[0] == "L":
                r = self.literal(node[1], not node[2])
            else:
                elems = [(p, self._neg[s]) for p, s in node[2]]
                r = self.raw_decision(node[1], elems)
            self._neg[i] = r
            self._neg[r] = i
        return self._neg[n]

    def conjoin(self, a: int, b: int) -> int:
        return self.apply(a, b, AND)

    def disjoin(self, a: int, b: int) -> int:
        return self.apply(a, b, OR)

    def apply(self, a: int, b: int, op: str) -> int:
        if op not in OPS:
            raise SddError(f"unknown operation {op!r}")
        for x in (a, b):
            if not 0 <= x < len(self.nodes):
                raise SddError(f"node {x} does not belong to this manager")
        return self._apply_rec(a, b, op)

    def _apply_rec(self, a: int, b: int, op: str) -> int:
        short = _shortcut(a, b, op)
        if short is not None:
            return short
        if a > b:
            a, b = b, a
        key = (a, b, op)
        hit = self._apply.get(key)
        if hit is not None:
            self.cache_hits += 1
            return hit
        na, nb = self.nodes[a], self.nodes[b]
        if na[0] == "L" and nb[0] == "L" and na[1] == nb[1]:
            # same variable: equal literals were handled by the shortcut
            r = FALSE if op == AND else TRUE
        else:
            # lca of the operands' v-tree nodes (a decision's variables may be
            # fewer than the span of the node it sits at)
            vm = self.vtree.masks
            v = self.vtree.lowest_cover(vm[self.vnode[a]] | vm[self.vnode[b]])
            ea, eb = self.elements_at(a, v), self.elements_at(b, v)
            elems = []
            for p, s in ea:
                for q, u in eb:
                    pq = self._apply_rec(p, q, AND)
                    if pq != FALSE:
                        elems.append((pq, self._apply_rec(s, u, op)))
            r = self.decision(v, elems)
        self._apply[key] = r
        return r

    def elements_at(self, n: int, v: int) -> t.Tuple[Element, ...]:
        """Elements of ``n`` viewed as a decomposition at v-tree node ``v``."""
        vt = self.vtree
        if self.nodes[n][0] == "D" and self.vnode[n] == v:
            return self.nodes[n][2]
        if n in (FALSE, TRUE):
            return ((TRUE, n),)
        if vt.is_leaf(v):
            raise SddError("cannot decompose at a leaf")
        if vt.in_subtree(self.vnode[n], vt.left(v)):
            return ((n, TRUE), (self.negate(n), FALSE))
        if vt.in_subtree(self.vnode[n], vt.right(v)):
            return ((TRUE, n),)
        raise SddError(f"node {n} is not below v-tree node {v}")

    def condition(self, n: int, var: VarId, value: int) -> int:
        """Restrict ``var`` to ``value`` (the variable stays in the universe, now unused)."""
        memo: t.Dict[int, int] = {}
        for i in self.reachable(n):
            node = self.nodes[i]
            if node[0] in ("F", "T"):
                memo[i] = i
            elif node[0] == "L":
                if node[1] == var:
                    memo[i] = TRUE if bool(value) == node[2] else FALSE
                else:
                    memo[i] = i
            elif not (self.masks[i] >> var) & 1:
                memo[i] = i
            else:
                memo[i] = self.decision(node[1], [(memo[p], memo[s]) for p, s in node[2]])
        return memo[n]

    def exists(self, n: int, var: VarId) -> int:
        return self.apply(self.condition(n, var, 0), self.condition(n, var, 1), OR)

    def term(self, literals: t.Iterable[int]) -> int:
        acc = TRUE
        for lit in literals:
            acc = self.apply(acc, self.signed(lit), AND)
        return acc

    def compile_dnf(self, d: Dnf) -> int:
        if set(d.universe) != set(self.universe):
            raise VTreeError("v-tree leaves must equal the DNF universe")
        acc = FALSE
        for term in d.terms:
            acc = self.apply(acc, self.term(term.signed()), OR)
        return acc


def _shortcut(a: int, b: int, op: str) -> int | None:
    if op == AND:
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE:
            return b
        if b == TRUE or a == b:
            return a
    else:
        if a == TRUE or b == TRUE:
            return TRUE
        if a == FALSE:
            return b
        if b == FALSE or a == b:
            return a
    return None


def compile_dnf(d: Dnf, vtree: VTree, compress: bool = False) -> t.Tuple[SddManager, int]:
    mgr = SddManager(vtree, compress)
    return mgr, mgr.compile_dnf(d)


def validate_sdd(mgr: SddManager, n: int, guard: int | None = None) -> Check:
    """Structural placement and the three decomposition conditions at every decision.

    Placement is checked on variable sets: primes must only mention variables
    under the left child of the decision's v-tree node, subs only variables
    under the right child.
    """
    vt = mgr.vtree
    full = FunTable.full_mask(len(mgr.universe))
    for i in mgr.reachable(n):
        node = mgr.nodes[i]
        if node[0] != "D":
            if node[0] == "L" and node[1] not in vt.leaf_of:
                return Check(False, i, f"literal {i} on variable {node[1]} outside the v-tree")
            continue
        v, elems = node[1], node[2]
        if vt.is_leaf(v):
            return Check(False, i, f"decision {i} sits at leaf v-tree node {v}")
        lm, rm = vt.masks[vt.left(v)], vt.masks[vt.right(v)]
        if not elems:
            return Check(False, i, f"decision {i} has no elements")
        union = 0
        for k, (p, s) in enumerate(elems):
            if mgr.masks[p] & ~lm:
                return Check(False, i, f"decision {i}: prime {p} leaves the left v-tree span")
            if mgr.masks[s] & ~rm:
                return Check(False, i, f"decision {i}: sub {s} leaves the right v-tree span")
            tp = mgr.table(p, guard)
            if not tp:
                return Check(False, i, f"decision {i}: prime {p} is unsatisfiable")
            if union & tp:
                return Check(False, i, f"decision {i}: prime {p} overlaps an earlier prime")
            union |= tp
        if union != full:
            return Check(False, i, f"decision {i}: primes are not exhaustive")
    return Check(True)


def sdd_to_circuit(mgr: SddManager, n: int) -> Circuit:
    """Unfold decisions into OR-spines of (prime AND sub) pairs."""
    b = Builder()
    ids: t.Dict[int, int] = {}
    for i in mgr.reachable(n):
        node = mgr.nodes[i]
        if node[0] == "F":
            ids[i] = b.false()
        elif node[0] == "T":
            ids[i] = b.true()
        elif node[0] == "L":
            ids[i] = b.lit(node[1], node[2])
        else:
            ids[i] = b.or_all([b.and_(ids[p], ids[s]) for p, s in node[2]])
    return b.build(ids[n], mgr.universe)


def random_sdd(mgr: SddManager, rng, depth: int = 3, width: int = 3) -> int:
    """A random node built by apply/negate from literals (for testing)."""
    if depth == 0 or rng.random() < 0.2:
        v = rng.choice(mgr.universe)
        return mgr.literal(v, rng.random() < 0.5)
    acc = random_sdd(mgr, rng, depth - 1, width)
    for _ in range(rng.randint(1, width)):
        other = random_sdd(mgr, rng, depth - 1, width)
        if rng.random() < 0.3:
            other = mgr.negate(other)
        acc = mgr.apply(acc, other, rng.choice(OPS))
    return acc


def random_vtree(variables: t.Sequence[VarId], rng) -> VTree:
    vs = list(variables)
    rng.shuffle(vs)

    def build(items):
        if len(items) == 1:
            return items[0]
        k = rng.randint(1, len(items) - 1)
        return (build(items[:k]), build(items[k:]))

    return VTree.from_nested(build(vs))
