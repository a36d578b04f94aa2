"""Monotone arithmetic circuits, their support, the map to NNF, and PSDDs.

Node kinds::

    ("C", value)  ("L", var, positive)  ("P", left, right)  ("M", left, right)

``P`` is addition and ``M`` multiplication.  A positive literal evaluates to
the variable's bit, a negative one to ``1 - bit``.  With ``exact=True`` every
constant is converted to a :class:`fractions.Fraction` and evaluation is
rational.

A PSDD is recognised structurally: an addition spine (the maximal tree of
``P`` nodes below the root) whose frontier nodes are elements of the form
``M(C(alpha), M(prime, sub))`` (the constant may be either child).  A root
that is itself an element is read as a one-element decomposition.
"""

from __future__ import annotations

import typing as t
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .core import Assignment, FunTable, KcError, Universe, UniverseMismatch, _check_universe, check_guard
from .nnf import Check, Circuit, CircuitError, mask_vars, topo_order
from .sdd import FALSE, TRUE, SddManager
from .vtree import VTree, VTreeError, split_respects

SUPPORT_TOL = 1e-12
ALPHA_TOL = 1e-9

Number = t.Union[int, float, Fraction]


class AcError(KcError):
    pass


class NotMonotone(AcError):
    pass


class SignNormalizeError(AcError):
    """Flipping constant signs changed the function, or the input violates a precondition."""

    def __init__(self, message: str, witness: Assignment | None = None):
        self.witness = witness
        super().__init__(message)


def _to_number(value, exact: bool) -> Number:
    if exact:
        return Fraction(value) if not isinstance(value, float) else Fraction(str(value))
    return value


@dataclass(frozen=True, eq=False)
class ArithCircuit:
    nodes: t.Tuple[t.Tuple, ...]
    root: int
    dom: Universe
    exact: bool = False

    def __post_init__(self):
        nodes = []
        for node in self.nodes:
            node = tuple(node)
            if node and node[0] == "C":
                node = ("C", _to_number(node[1], self.exact))
            nodes.append(node)
        object.__setattr__(self, "nodes", tuple(nodes))
        object.__setattr__(self, "dom", _check_universe(self.dom))
        if not 0 <= self.root < len(self.nodes):
            raise CircuitError(f"root {self.root} out of range")
        dom = set(self.dom)
        for i, node in enumerate(self.nodes):
            kind = node[0]
            if kind in ("P", "M"):
                if len(node) != 3:
                    raise CircuitError(f"node {i}: internal nodes have fan-in two")
                for c in node[1:]:
                    if not 0 <= c < len(self.nodes):
                        raise CircuitError(f"node {i}: child {c} out of range")
            elif kind == "L":
                if node[1] not in dom:
                    raise CircuitError(f"node {i}: variable {node[1]} not in dom")
            elif kind != "C":
                raise CircuitError(f"node {i}: unknown kind {kind!r}")
        self.order

    def __eq__(self, other):
        return (isinstance(other, ArithCircuit) and self.nodes == other.nodes
                and self.root == other.root and self.dom == other.dom)

    def __hash__(self):
        return hash((self.nodes, self.root, self.dom))

    @cached_property
    def order(self) -> t.Tuple[int, ...]:
        return topo_order(self.nodes, self.root, ("P", "M"))

    @cached_property
    def var_masks(self) -> t.Dict[int, int]:
        masks: t.Dict[int, int] = {}
        for i in self.order:
            node = self.nodes[i]
            if node[0] == "L":
                masks[i] = 1 << node[1]
            elif node[0] in ("P", "M"):
                masks[i] = masks[node[1]] | masks[node[2]]
            else:
                masks[i] = 0
        return masks

    def constants(self) -> t.List[Number]:
        return [self.nodes[i][1] for i in self.order if self.nodes[i][0] == "C"]

    @property
    def monotone(self) -> bool:
        return all(v >= 0 for v in self.constants())

    def __len__(self) -> int:
        return len(self.order)

    def with_exact(self, exact: bool = True) -> "ArithCircuit":
        return ArithCircuit(self.nodes, self.root, self.dom, exact)


def eval_ac(c: ArithCircuit, a: Assignment) -> Number:
    if a.universe != c.dom:
        raise UniverseMismatch("assignment universe differs from dom(C)")
    values = a.as_dict()
    val: t.Dict[int, Number] = {}
    one = Fraction(1) if c.exact else 1
    for i in c.order:
        node = c.nodes[i]
        kind = node[0]
        if kind == "C":
            val[i] = node[1]
        elif kind == "L":
            x = values[node[1]]
            val[i] = one * x if node[2] else one - x
        elif kind == "P":
            val[i] = val[node[1]] + val[node[2]]
        else:
            val[i] = val[node[1]] * val[node[2]]
    return val[c.root]


def node_values(c: ArithCircuit, guard: int | None = None) -> t.Dict[int, np.ndarray]:
    """Value of every reachable node on every assignment, as arrays indexed by rank."""
    n = len(c.dom)
    check_guard(n, "ac-evaluation", guard)
    ranks = np.arange(1 << n, dtype=np.int64)
    dtype = object if c.exact else np.float64
    pos = {v: i for i, v in enumerate(c.dom)}
    vals: t.Dict[int, np.ndarray] = {}
    for i in c.order:
        node = c.nodes[i]
        kind = node[0]
        if kind == "C":
            arr = np.empty(1 << n, dtype=dtype)
            arr.fill(node[1])
            vals[i] = arr
        elif kind == "L":
            bits = (ranks >> (n - 1 - pos[node[1]])) & 1
            if not node[2]:
                bits = 1 - bits
            vals[i] = bits.astype(np.float64) if not c.exact else np.array(
                [Fraction(int(b)) for b in bits], dtype=object)
        elif kind == "P":
            vals[i] = vals[node[1]] + vals[node[2]]
        else:
            vals[i] = vals[node[1]] * vals[node[2]]
    return vals


def _nonzero_bits(arr: np.ndarray, exact: bool) -> int:
    if exact:
        mask = np.array([v != 0 for v in arr], dtype=bool)
    else:
        mask = np.abs(arr) > SUPPORT_TOL
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


def node_supports(c: ArithCircuit, guard: int | None = None) -> t.Dict[int, int]:
    return {i: _nonzero_bits(v, c.exact) for i, v in node_values(c, guard).items()}


def support(c: ArithCircuit, guard: int | None = None) -> FunTable:
    vals = node_values(c, guard)
    return FunTable(c.dom, _nonzero_bits(vals[c.root], c.exact))


def phi_map(c: ArithCircuit) -> Circuit:
    """Relabel node for node: 0-constants become false, other constants true, + is OR, x is AND."""
    if not c.monotone:
        raise NotMonotone("the map to NNF is defined for monotone circuits only")
    out = []
    for node in c.nodes:
        kind = node[0]
        if kind == "C":
            out.append(("F",) if node[1] == 0 else ("T",))
        elif kind == "L":
            out.append(node)
        elif kind == "P":
            out.append(("O", node[1], node[2]))
        else:
            out.append(("A", node[1], node[2]))
    return Circuit(tuple(out), c.root, c.dom)


def from_nnf(c: Circuit, exact: bool = False) -> ArithCircuit:
    """Inverse relabelling: OR becomes +, AND becomes x, constants become 0/1."""
    out = []
    for node in c.nodes:
        kind = node[0]
        if kind == "F":
            out.append(("C", 0))
        elif kind == "T":
            out.append(("C", 1))
        elif kind == "L":
            out.append(node)
        else:
            out.append(("P" if kind == "O" else "M", node[1], node[2]))
    return ArithCircuit(tuple(out), c.root, c.dom, exact)


def is_decomposable_ac(c: ArithCircuit) -> Check:
    masks = c.var_masks
    for i in c.order:
        node = c.nodes[i]
        if node[0] == "M":
            shared = masks[node[1]] & masks[node[2]]
            if shared:
                return Check(False, i, f"x node {i}: children share variables {mask_vars(shared)}")
    return Check(True)


def is_deterministic_ac(c: ArithCircuit, guard: int | None = None) -> Check:
    supp = node_supports(c, guard)
    for i in c.order:
        node = c.nodes[i]
        if node[0] == "P":
            both = supp[node[1]] & supp[node[2]]
            if both:
                rank = (both & -both).bit_length() - 1
                a = Assignment.from_rank(c.dom, rank)
                return Check(False, (i, a), f"+ node {i}: both children are nonzero at {a.as_dict()}")
    return Check(True)


def respects_ac(c: ArithCircuit, t_: VTree) -> Check:
    vm = c.var_masks
    if vm[c.root] & ~t_.masks[t_.root]:
        raise VTreeError("circuit variables are not all v-tree leaves")
    for i in c.order:
        node = c.nodes[i]
        if node[0] == "M" and split_respects(t_, vm[node[1]], vm[node[2]]) is None:
            return Check(False, i, f"x node {i} does not follow any v-tree split")
    return Check(True)


def ac_property_checks(c: ArithCircuit, t_: VTree | None = None,
                       guard: int | None = None) -> t.Dict[str, Check]:
    out = {"decomposable": is_decomposable_ac(c), "deterministic": is_deterministic_ac(c, guard)}
    if t_ is not None:
        out["respects"] = respects_ac(c, t_)
    return out


# ---------------------------------------------------------------------------
# PSDDs


@dataclass(frozen=True)
class PElement:
    node: int
    prime: int
    sub: int
    alpha: Number
    alpha_node: int


def addition_spine(c: ArithCircuit, i: int) -> t.List[int]:
    """Frontier of the maximal tree of + nodes rooted at ``i`` (left to right)."""
    out: t.List[int] = []
    stack = [i]
    while stack:
        j = stack.pop()
        node = c.nodes[j]
        if node[0] == "P":
            stack.append(node[2])
            stack.append(node[1])
        else:
            out.append(j)
    return out


def parse_element(c: ArithCircuit, i: int) -> PElement | None:
    node = c.nodes[i]
    if node[0] != "M":
        return None
    for a, b in ((node[1], node[2]), (node[2], node[1])):
        if c.nodes[a][0] == "C" and c.nodes[b][0] == "M":
            inner = c.nodes[b]
            return PElement(i, inner[1], inner[2], c.nodes[a][1], a)
    return None


def decomposition(c: ArithCircuit, i: int) -> t.List[PElement] | None:
    """The elements of node ``i`` read as a p-decomposition, or None for other shapes."""
    if c.nodes[i][0] not in ("P", "M"):
        return None
    elems = []
    for j in addition_spine(c, i):
        e = parse_element(c, j)
        if e is None:
            return None
        elems.append(e)
    return elems


def validate_psdd(c: ArithCircuit, t_: VTree, guard: int | None = None) -> Check:
    """Check the PSDD grammar against ``t_`` with supports as the semantic tables.

    A decomposition may sit at any v-tree node inside the subtree it has to
    respect; its primes then respect that node's left subtree and its subs
    the right subtree.
    """
    if not c.monotone:
        return Check(False, None, "a PSDD is monotone: negative constant found")
    vm = c.var_masks
    if vm[c.root] & ~t_.masks[t_.root]:
        return Check(False, c.root, "circuit variables outside the v-tree")
    supp = node_supports(c, guard)
    full = FunTable.full_mask(len(c.dom))
    memo: t.Dict[t.Tuple[int, int], Check] = {}
    subtree_nodes = {u: [w for w in t_.internal_nodes() if t_.in_subtree(w, u)] for u in range(len(t_))}

    def check(i: int, u: int) -> Check:
        key = (i, u)
        if key in memo:
            return memo[key]
        node = c.nodes[i]
        if node[0] == "C":
            res = Check(True)
        elif node[0] == "L":
            ok = (t_.masks[u] >> node[1]) & 1
            res = Check(True) if ok else Check(False, i, f"literal {i} outside v-tree span of node {u}")
        else:
            res = check_decomposition(i, u)
        memo[key] = res
        return res

    def check_decomposition(i: int, u: int) -> Check:
        elems = decomposition(c, i)
        if not elems:
            return Check(False, i, f"node {i} is neither a terminal nor a p-decomposition")
        total = 0
        for e in elems:
            if not e.alpha > 0:
                return Check(False, i, f"node {i}: parameter {e.alpha} is not positive")
            total += e.alpha
        if (total != 1) if c.exact else abs(total - 1) > ALPHA_TOL:
            return Check(False, i, f"node {i}: parameters sum to {total}, not 1")
        union = 0
        for e in elems:
            sp = supp[e.prime]
            if not sp:
                return Check(False, i, f"node {i}: prime {e.prime} is identically zero")
            if union & sp:
                return Check(False, i, f"node {i}: prime {e.prime} overlaps an earlier prime")
            union |= sp
        if union != full:
            return Check(False, i, f"node {i}: primes are not exhaustive")
        pm = sm = 0
        for e in elems:
            pm |= vm[e.prime]
            sm |= vm[e.sub]
        placements = [w for w in subtree_nodes[u]
                      if not pm & ~t_.masks[t_.left(w)] and not sm & ~t_.masks[t_.right(w)]]
        if not placements:
            return Check(False, i, f"node {i}: no v-tree node below {u} separates primes from subs")
        last = None
        for w in sorted(placements, key=lambda w: bin(t_.masks[w]).count("1")):
            bad = None
            for e in elems:
                r = check(e.prime, t_.left(w))
                if not r:
                    bad = r
                    break
                r = check(e.sub, t_.right(w))
                if not r:
                    bad = r
                    break
            if bad is None:
                return Check(True, w)
            last = bad
        return last

    return check(c.root, t_.root)


def psdd_placement(c: ArithCircuit, t_: VTree, i: int) -> int | None:
    """Lowest v-tree node at which decomposition ``i`` fits (None for terminals)."""
    elems = decomposition(c, i)
    if not elems:
        return None
    vm = c.var_masks
    pm = sm = 0
    for e in elems:
        pm |= vm[e.prime]
        sm |= vm[e.sub]
    best = None
    for w in t_.internal_nodes():
        if not pm & ~t_.masks[t_.left(w)] and not sm & ~t_.masks[t_.right(w)]:
            if best is None or bin(t_.masks[w]).count("1") < bin(t_.masks[best]).count("1"):
                best = w
    return best


def strip_parameters(c: ArithCircuit, t_: VTree, guard: int | None = None) -> t.Tuple[SddManager, int]:
    """SDD obtained by dropping the parameters of a validated PSDD."""
    verdict = validate_psdd(c, t_, guard)
    if not verdict:
        raise AcError(f"not a PSDD for this v-tree: {verdict.reason}")
    if set(c.dom) != set(t_.leaves):
        raise VTreeError("v-tree leaves must equal dom(C)")
    mgr = SddManager(t_)
    ids: t.Dict[int, int] = {}

    def build(i: int) -> int:
        if i in ids:
            return ids[i]
        node = c.nodes[i]
        if node[0] == "C":
            r = FALSE if node[1] == 0 else TRUE
        elif node[0] == "L":
            r = mgr.literal(node[1], node[2])
        else:
            elems = decomposition(c, i)
            w = psdd_placement(c, t_, i)
            r = mgr.raw_decision(w, [(build(e.prime), build(e.sub)) for e in elems])
        ids[i] = r
        return r

    return mgr, build(c.root)


def psdd_from_sdd(mgr: SddManager, n: int, rng=None, exact: bool = False) -> ArithCircuit:
    """Attach parameters to an SDD: uniform, or random when ``rng`` is given."""
    nodes: t.List[t.Tuple] = []
    ids: t.Dict[int, int] = {}

    def add(node) -> int:
        nodes.append(node)
        return len(nodes) - 1

    for i in mgr.reachable(n):
        node = mgr.nodes[i]
        if node[0] == "F":
            ids[i] = add(("C", 0))
        elif node[0] == "T":
            ids[i] = add(("C", 1))
        elif node[0] == "L":
            ids[i] = add(node)
        else:
            k = len(node[2])
            if rng is None:
                weights = [Fraction(1, k)] * k
            else:
                raw = [rng.randint(1, 9) for _ in range(k)]
                weights = [Fraction(r, sum(raw)) for r in raw]
            if not exact:
                weights = [float(w) for w in weights]
                weights[-1] = 1.0 - sum(weights[:-1])
            terms = []
            for (p, s), w in zip(node[2], weights):
                inner = add(("M", ids[p], ids[s]))
                terms.append(add(("M", add(("C", w)), inner)))
            acc = terms[0]
            for j in terms[1:]:
                acc = add(("P", acc, j))
            ids[i] = acc
    return ArithCircuit(tuple(nodes), ids[n], mgr.universe, exact)


def sign_normalize(c: ArithCircuit, t_: VTree | None = None, strict: bool = False,
                   guard: int | None = None) -> ArithCircuit:
    """Replace every constant by its absolute value, checking the function is unchanged.

    The input must be non-negative everywhere; with ``strict`` it must also be
    decomposable and deterministic (and respect ``t_`` when given).
    """
    if strict:
        for name, verdict in ac_property_checks(c, t_, guard).items():
            if not verdict:
                raise SignNormalizeError(f"input is not {name}: {verdict.reason}")
    before = node_values(c, guard)[c.root]
    nodes = tuple(("C", abs(n[1])) if n[0] == "C" else n for n in c.nodes)
    out = ArithCircuit(nodes, c.root, c.dom, c.exact)
    after = node_values(out, guard)[out.root]
    for r in range(1 << len(c.dom)):
        b, a = before[r], after[r]
        if b < 0:
            raise SignNormalizeError("input takes a negative value", Assignment.from_rank(c.dom, r))
        same = (a == b) if c.exact else abs(a - b) <= SUPPORT_TOL * max(1.0, abs(b))
        if not same:
            raise SignNormalizeError(
                f"input outside the sign-flip preconditions: value {b} becomes {a}",
                Assignment.from_rank(c.dom, r))
    return out


def random_monotone_ac(variables: t.Sequence[int], rng, size: int = 12,
                       zero_rate: float = 0.2) -> ArithCircuit:
    """A random monotone circuit grown bottom-up; constants are small non-negative integers."""
    nodes: t.List[t.Tuple] = []
    for _ in range(max(2, size // 2)):
        r = rng.random()
        if r < 0.7:
            nodes.append(("L", rng.choice(variables), rng.random() < 0.5))
        elif r < 0.7 + 0.3 * zero_rate:
            nodes.append(("C", 0))
        else:
            nodes.append(("C", rng.randint(1, 4)))
    while len(nodes) < size:
        l, r = rng.randrange(len(nodes)), rng.randrange(len(nodes))
        nodes.append((rng.choice("PM"), l, r))
    return ArithCircuit(tuple(nodes), len(nodes) - 1, tuple(variables))
