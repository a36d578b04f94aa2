"""Line-oriented text formats.

All formats skip blank lines and lines starting with ``c``.  Variables are
numbered from 1 and a declared variable count ``n`` means the universe
``(1, ..., n)``.

DNF::

    p udnf <nvars> <nterms>
    <signed literals> 0          (one term per line)

NNF circuit (node ids are line positions from 0)::

    nnf <count> <root> <domSize>
    F | T | L <+-var> | A <l> <r> | O <l> <r>

v-tree (root is the highest id)::

    vtree <count>
    L <id> <var> | I <id> <left> <right>

SDD over a given v-tree (root is the highest id)::

    sdd <count>
    T <0|1> <id> | L <id> <+-var> | D <id> <vnode> <k> <p1> <s1> ... <pk> <sk>

arithmetic circuit::

    ac <count> <root> <domSize>
    C <number> | L <+-var> | P <l> <r> | M <l> <r>

function table (one satisfying assignment per line, first variable first)::

    p fn <nvars> <count>
    <bitstring>
"""

from __future__ import annotations

import typing as t
from fractions import Fraction

from .ac import ArithCircuit
from .core import Dnf, FunTable, KcError, Term
from .nnf import Circuit
from .sdd import FALSE, TRUE, SddManager
from .vtree import VTree


class FormatError(KcError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _lines(text: str) -> t.Iterator[t.Tuple[int, t.List[str]]]:
    for no, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s or s.startswith("c"):
            continue
        yield no, s.split()


def _int(tok: str, no: int, what: str = "integer") -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"expected {what}, got {tok!r}", no) from None


def _header(lines, keyword: t.Sequence[str], nfields: int):
    try:
        no, toks = next(lines)
    except StopIteration:
        raise FormatError("empty input") from None
    k = len(keyword)
    if toks[:k] != list(keyword) or len(toks) != k + nfields:
        raise FormatError(f"expected header '{' '.join(keyword)}' with {nfields} fields", no)
    return no, [_int(x, no) for x in toks[k:]]


def _contiguous(universe, what: str) -> int:
    n = len(universe)
    if tuple(universe) != tuple(range(1, n + 1)):
        raise FormatError(f"{what} universe must be 1..n to be written, got {universe}")
    return n


# -- DNF -------------------------------------------------------------------


def parse_dnf(text: str) -> Dnf:
    lines = _lines(text)
    no, (n, m) = _header(lines, ("p", "udnf"), 2)
    if n < 0 or m < 0:
        raise FormatError("negative counts", no)
    terms: t.List[Term] = []
    for no, toks in lines:
        lits = [_int(x, no, "literal") for x in toks]
        if not lits or lits[-1] != 0 or 0 in lits[:-1]:
            raise FormatError("a term is a list of literals terminated by 0", no)
        lits = lits[:-1]
        for lit in lits:
            if abs(lit) > n:
                raise FormatError(f"literal {lit} outside 1..{n}", no)
        try:
            terms.append(Term.of(lits))
        except ValueError as exc:
            raise FormatError(str(exc), no) from None
    if len(terms) != m:
        raise FormatError(f"header declares {m} terms, found {len(terms)}")
    return Dnf(tuple(range(1, n + 1)), tuple(terms))


def print_dnf(d: Dnf) -> str:
    n = _contiguous(d.universe, "DNF")
    out = [f"p udnf {n} {len(d.terms)}"]
    for term in d.terms:
        out.append(" ".join(str(x) for x in term.signed() + [0]))
    return "\n".join(out) + "\n"


# -- NNF -------------------------------------------------------------------


def _lit_tok(tok: str, no: int, dom: int) -> t.Tuple[int, bool]:
    v = _int(tok, no, "literal")
    if v == 0 or abs(v) > dom:
        raise FormatError(f"literal {v} outside 1..{dom}", no)
    return abs(v), v > 0


def _children(toks, no, count):
    if len(toks) != 3:
        raise FormatError(f"'{toks[0]}' takes two child ids", no)
    l, r = _int(toks[1], no), _int(toks[2], no)
    for c in (l, r):
        if not 0 <= c < count:
            raise FormatError(f"child id {c} out of range", no)
    return l, r


def parse_nnf(text: str) -> Circuit:
    lines = _lines(text)
    no, (count, root, dom) = _header(lines, ("nnf",), 3)
    nodes = []
    for no, toks in lines:
        kind = toks[0]
        if kind in ("F", "T") and len(toks) == 1:
            nodes.append((kind,))
        elif kind == "L" and len(toks) == 2:
            v, pos = _lit_tok(toks[1], no, dom)
            nodes.append(("L", v, pos))
        elif kind in ("A", "O"):
            nodes.append((kind,) + _children(toks, no, count))
        else:
            raise FormatError(f"bad node line {' '.join(toks)!r}", no)
    if len(nodes) != count:
        raise FormatError(f"header declares {count} nodes, found {len(nodes)}")
    if not 0 <= root < count:
        raise FormatError(f"root {root} out of range")
    return Circuit(tuple(nodes), root, tuple(range(1, dom + 1)))


def print_nnf(c: Circuit) -> str:
    n = _contiguous(c.dom, "circuit")
    out = [f"nnf {len(c.nodes)} {c.root} {n}"]
    for node in c.nodes:
        if node[0] == "L":
            out.append(f"L {node[1] if node[2] else -node[1]}")
        else:
            out.append(" ".join(str(x) for x in node))
    return "\n".join(out) + "\n"


# -- v-tree ----------------------------------------------------------------


def parse_vtree(text: str) -> VTree:
    lines = _lines(text)
    no, (count,) = _header(lines, ("vtree",), 1)
    raw: t.Dict[int, t.Tuple] = {}
    for no, toks in lines:
        if toks[0] == "L" and len(toks) == 3:
            i, v = _int(toks[1], no), _int(toks[2], no)
            node = ("L", v)
        elif toks[0] == "I" and len(toks) == 4:
            i, l, r = (_int(x, no) for x in toks[1:])
            node = ("I", l, r)
        else:
            raise FormatError(f"bad v-tree line {' '.join(toks)!r}", no)
        if i in raw:
            raise FormatError(f"duplicate id {i}", no)
        raw[i] = (node, no)
    if len(raw) != count:
        raise FormatError(f"header declares {count} nodes, found {len(raw)}")
    root = max(raw)
    # renumber children-first with the root last
    index: t.Dict[int, int] = {}
    nodes: t.List[t.Tuple] = []

    def visit(i: int, depth: int = 0):
        if i not in raw:
            raise FormatError(f"reference to undefined v-tree node {i}")
        if depth > count:
            raise FormatError("v-tree contains a cycle")
        node, no = raw[i]
        if node[0] == "I":
            for c in node[1:]:
                if c in index:
                    raise FormatError(f"v-tree node {c} has two parents", no)
                visit(c, depth + 1)
            node = ("I", index[node[1]], index[node[2]])
        index[i] = len(nodes)
        nodes.append(node)

    visit(root)
    if len(nodes) != count:
        raise FormatError("v-tree has nodes unreachable from the root")
    try:
        return VTree(tuple(nodes))
    except KcError as exc:
        raise FormatError(str(exc)) from None


def print_vtree(vt: VTree) -> str:
    out = [f"vtree {len(vt.nodes)}"]
    for i, node in enumerate(vt.nodes):
        if node[0] == "L":
            out.append(f"L {i} {node[1]}")
        else:
            out.append(f"I {i} {node[1]} {node[2]}")
    return "\n".join(out) + "\n"


# -- SDD -------------------------------------------------------------------


def parse_sdd(text: str, vtree: VTree, mgr: SddManager | None = None) -> t.Tuple[SddManager, int]:
    """Load into ``mgr`` (a fresh manager over ``vtree`` by default); returns the root id."""
    mgr = SddManager(vtree) if mgr is None else mgr
    if mgr.vtree != vtree:
        raise FormatError("manager is over a different v-tree")
    lines = _lines(text)
    no, (count,) = _header(lines, ("sdd",), 1)
    ids: t.Dict[int, int] = {}
    for no, toks in lines:
        kind = toks[0]
        if kind == "T" and len(toks) == 3:
            bit, i = _int(toks[1], no), _int(toks[2], no)
            if bit not in (0, 1):
                raise FormatError("constant must be 0 or 1", no)
            node = TRUE if bit else FALSE
        elif kind == "L" and len(toks) == 3:
            i, lit = _int(toks[1], no), _int(toks[2], no)
            if lit == 0:
                raise FormatError("0 is not a literal", no)
            try:
                node = mgr.signed(lit)
            except KcError as exc:
                raise FormatError(str(exc), no) from None
        elif kind == "D" and len(toks) >= 4:
            i, v, k = (_int(x, no) for x in toks[1:4])
            rest = [_int(x, no) for x in toks[4:]]
            if k < 1 or len(rest) != 2 * k:
                raise FormatError(f"decision declares {k} elements, found {len(rest) / 2:g}", no)
            for x in rest:
                if x not in ids:
                    raise FormatError(f"reference to undefined node {x}", no)
            elems = [(ids[rest[2 * j]], ids[rest[2 * j + 1]]) for j in range(k)]
            try:
                node = mgr.raw_decision(v, elems)
            except KcError as exc:
                raise FormatError(str(exc), no) from None
        else:
            raise FormatError(f"bad sdd line {' '.join(toks)!r}", no)
        if i in ids:
            raise FormatError(f"duplicate id {i}", no)
        ids[i] = node
    if len(ids) != count:
        raise FormatError(f"header declares {count} nodes, found {len(ids)}")
    if not ids:
        raise FormatError("empty SDD")
    return mgr, ids[max(ids)]


def print_sdd(mgr: SddManager, n: int) -> str:
    order = mgr.reachable(n)
    index = {x: i for i, x in enumerate(order)}
    out = [f"sdd {len(order)}"]
    for x in order:
        node = mgr.nodes[x]
        i = index[x]
        if node[0] == "F":
            out.append(f"T 0 {i}")
        elif node[0] == "T":
            out.append(f"T 1 {i}")
        elif node[0] == "L":
            out.append(f"L {i} {node[1] if node[2] else -node[1]}")
        else:
            flat = " ".join(f"{index[p]} {index[s]}" for p, s in node[2])
            out.append(f"D {i} {node[1]} {len(node[2])} {flat}")
    return "\n".join(out) + "\n"


# -- arithmetic circuits -----------------------------------------------------


def _number(tok: str, no: int, exact: bool):
    try:
        value = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"expected a number, got {tok!r}", no) from None
    if exact:
        return value
    if "/" in tok:
        return float(value)
    return int(tok) if value.denominator == 1 and "." not in tok and "e" not in tok.lower() else float(tok)


def parse_ac(text: str, exact: bool = False) -> ArithCircuit:
    lines = _lines(text)
    no, (count, root, dom) = _header(lines, ("ac",), 3)
    nodes = []
    for no, toks in lines:
        kind = toks[0]
        if kind == "C" and len(toks) == 2:
            nodes.append(("C", _number(toks[1], no, exact)))
        elif kind == "L" and len(toks) == 2:
            v, pos = _lit_tok(toks[1], no, dom)
            nodes.append(("L", v, pos))
        elif kind in ("P", "M"):
            nodes.append((kind,) + _children(toks, no, count))
        else:
            raise FormatError(f"bad node line {' '.join(toks)!r}", no)
    if len(nodes) != count:
        raise FormatError(f"header declares {count} nodes, found {len(nodes)}")
    if not 0 <= root < count:
        raise FormatError(f"root {root} out of range")
    return ArithCircuit(tuple(nodes), root, tuple(range(1, dom + 1)), exact)


def _fmt_number(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return repr(v)


def print_ac(c: ArithCircuit) -> str:
    n = _contiguous(c.dom, "circuit")
    out = [f"ac {len(c.nodes)} {c.root} {n}"]
    for node in c.nodes:
        if node[0] == "C":
            out.append(f"C {_fmt_number(node[1])}")
        elif node[0] == "L":
            out.append(f"L {node[1] if node[2] else -node[1]}")
        else:
            out.append(f"{node[0]} {node[1]} {node[2]}")
    return "\n".join(out) + "\n"


# -- function tables ---------------------------------------------------------


def parse_fn(text: str) -> FunTable:
    lines = _lines(text)
    no, (n, m) = _header(lines, ("p", "fn"), 2)
    bits = 0
    seen = 0
    for no, toks in lines:
        if len(toks) != 1 or len(toks[0]) != n or set(toks[0]) - {"0", "1"}:
            raise FormatError(f"expected a {n}-bit assignment", no)
        bits |= 1 << int(toks[0], 2) if n else 1
        seen += 1
    if seen != m:
        raise FormatError(f"header declares {m} assignments, found {seen}")
    return FunTable(tuple(range(1, n + 1)), bits)


def print_fn(f: FunTable) -> str:
    n = _contiguous(f.universe, "function")
    out = [f"p fn {n} {f.count()}"]
    for r in f.ranks():
        out.append(format(r, f"0{n}b") if n else "")
    return "\n".join(out) + "\n"


def sniff(text: str) -> str:
    """Name of the format announced by the first non-comment line."""
    for _, toks in _lines(text):
        if toks[:2] == ["p", "udnf"]:
            return "dnf"
        if toks[:2] == ["p", "fn"]:
            return "fn"
        if toks[0] in ("nnf", "vtree", "sdd", "ac"):
            return toks[0]
        break
    raise FormatError("unrecognised file header")
