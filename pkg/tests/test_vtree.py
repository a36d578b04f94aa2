import itertools
import random

import pytest
from hypothesis import given, strategies as st

from kcforge.core import Dnf, FunTable, dnf_to_fn, exists_fn, or_fn, AmbiguousDnf
from kcforge.fixtures import figure1_circuit, figure1_dnf, figure1_vtree, random_unambiguous_dnf
from kcforge.nnf import Builder, Circuit, circuit_size, circuit_to_fn, is_decomposable, is_deterministic
from kcforge.sdd import random_vtree
from kcforge.vtree import (
    VTree,
    VTreeError,
    compile_unambiguous_dnf,
    count_vtrees,
    enumerate_vtrees,
    find_respecting_vtree,
    respects,
    shannon_join,
)

import oracles

A, B, C, D, E = 1, 2, 3, 4, 5


def _shape_key(nested):
    if isinstance(nested, int):
        return nested
    return (_shape_key(nested[0]), _shape_key(nested[1]))


def _brute_shapes(vs):
    """Independent enumeration of ordered full binary trees with leaves ``vs``."""
    if len(vs) == 1:
        return [vs[0]]
    out = []
    for mask in range(1, (1 << len(vs)) - 1):
        left = [v for i, v in enumerate(vs) if (mask >> i) & 1]
        right = [v for i, v in enumerate(vs) if not (mask >> i) & 1]
        for l in _brute_shapes(left):
            for r in _brute_shapes(right):
                out.append((l, r))
    return out


class TestVTree:
    def test_from_nested_round_trip(self):
        vt = figure1_vtree()
        assert vt.nested() == (((A, B), C), (D, E))
        assert vt.leaves == (A, B, C, D, E)

    def test_rejects_repeated_leaves(self):
        with pytest.raises(VTreeError):
            VTree.from_nested((1, 1))

    def test_lowest_cover(self):
        vt = figure1_vtree()
        i = vt.lowest_cover((1 << A) | (1 << C))
        assert set(vt.variables(i)) == {A, B, C}

    def test_balanced_and_right_linear(self):
        vs = [1, 2, 3, 4, 5]
        assert VTree.right_linear(vs).nested() == (1, (2, (3, (4, 5))))
        assert set(VTree.balanced(vs).leaves) == set(vs)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_enumeration_matches_brute_force(self, n):
        vs = tuple(range(1, n + 1))
        got = [_shape_key(vt.nested()) for vt in enumerate_vtrees(vs)]
        want = [_shape_key(s) for s in _brute_shapes(list(vs))]
        assert len(got) == len(set(got))
        assert set(got) == set(want)
        assert len(got) == count_vtrees(n)

    def test_counts(self):
        assert count_vtrees(1) == 1
        assert count_vtrees(2) == 2
        # 3 unordered shapes, each with 2^2 child orders
        assert count_vtrees(3) == 12

    def test_enumeration_slices(self):
        vs = (1, 2, 3, 4)
        all_ = [vt.nested() for vt in enumerate_vtrees(vs)]
        part = [vt.nested() for vt in enumerate_vtrees(vs, 10, 20)]
        assert part == all_[10:20]


class TestRespects:
    def test_figure1(self):
        assert respects(figure1_circuit(), figure1_vtree())

    def test_cross_split(self):
        b = Builder()
        c = b.build(b.and_(b.lit(A), b.lit(D)), (A, B, C, D, E))
        assert respects(c, figure1_vtree())

    def test_children_are_ordered(self):
        b = Builder()
        c = b.build(b.and_(b.lit(D), b.lit(A)), (A, B, C, D, E))
        assert not respects(c, figure1_vtree())

    def test_shared_variable_fails_everywhere(self):
        b = Builder()
        c = b.build(b.and_(b.lit(A), b.and_(b.lit(B), b.lit(A, False))), (A, B))
        assert all(not respects(c, vt) for vt in enumerate_vtrees((A, B)))
        assert find_respecting_vtree(c) is None

    def test_variable_outside_vtree(self):
        c = Circuit((("L", 9, True),), 0, (9,))
        with pytest.raises(VTreeError):
            respects(c, figure1_vtree())

    def test_subcircuits_respect(self):
        c, vt = figure1_circuit(), figure1_vtree()
        for i in c.order:
            assert respects(Circuit(c.nodes, i, c.dom), vt)


class TestCompile:
    def test_single_term(self):
        c = compile_unambiguous_dnf(Dnf.of((1, 2), [[1]]), VTree.from_nested((1, 2)))
        assert c.nodes[c.root] == ("L", 1, True)
        assert circuit_size(c) == 1

    def test_figure1(self):
        vt = figure1_vtree()
        c = compile_unambiguous_dnf(figure1_dnf(), vt)
        assert circuit_to_fn(c) == dnf_to_fn(figure1_dnf())
        assert is_deterministic(c) and is_decomposable(c) and respects(c, vt)

    def test_xor(self):
        c = compile_unambiguous_dnf(Dnf.of((1, 2), [[1, -2], [-1, 2]]), VTree.from_nested((1, 2)))
        assert circuit_size(c) <= 7
        assert circuit_to_fn(c).bits == oracles.table((1, 2), lambda e: e[1] != e[2])

    def test_rejects_ambiguous(self):
        with pytest.raises(AmbiguousDnf):
            compile_unambiguous_dnf(Dnf.of((1, 2), [[1], [2]]), VTree.from_nested((1, 2)))

    def test_rejects_leaf_mismatch(self):
        with pytest.raises(VTreeError):
            compile_unambiguous_dnf(Dnf.of((1, 2), [[1]]), VTree.from_nested((1, 3)))

    @given(st.integers(0, 2**32 - 1), st.integers(1, 10))
    def test_random_compilations(self, seed, n):
        rng = random.Random(seed)
        u = tuple(range(1, n + 1))
        d = random_unambiguous_dnf(u, rng)
        vt = random_vtree(u, rng)
        c = compile_unambiguous_dnf(d, vt)
        assert is_decomposable(c)
        assert is_deterministic(c)
        assert respects(c, vt)
        assert circuit_to_fn(c).bits == oracles.dnf_table(u, [t.signed() for t in d.terms])


class TestShannonJoin:
    def test_constants(self):
        one = Circuit((("T",),), 0, (A,))
        cj, tj = shannon_join(one, one, 9, VTree.from_nested(A))
        f = circuit_to_fn(cj)
        assert exists_fn(f, 9).count() == 2

    def test_literals(self):
        vt = VTree.from_nested((A, B))
        cf = Circuit((("L", A, True),), 0, (A, B))
        cg = Circuit((("L", B, True),), 0, (A, B))
        x = 7
        cj, tj = shannon_join(cf, cg, x, vt)
        f = circuit_to_fn(cj)
        assert f.bits == oracles.table(cj.dom, lambda e: (e[x] and e[A]) or (not e[x] and e[B]))
        g = exists_fn(f, x)
        assert g.bits == oracles.table(g.universe, lambda e: e[A] or e[B])
        assert circuit_size(cj) == 1 + 1 + 5
        assert respects(cj, tj) and is_deterministic(cj)

    def test_figure1_with_first_term(self):
        vt = figure1_vtree()
        cf = figure1_circuit()
        cg = compile_unambiguous_dnf(Dnf.of((A, B, C, D, E), [[A, B, -C]]), vt)
        cj, tj = shannon_join(cf, cg, 6, vt)
        assert is_deterministic(cj)
        assert respects(cj, tj)
        assert circuit_size(cj) == circuit_size(cf) + circuit_size(cg) + 5

    def test_rejects_used_variable(self):
        vt = VTree.from_nested((A, B))
        cf = Circuit((("L", A, True),), 0, (A, B))
        with pytest.raises(VTreeError):
            shannon_join(cf, cf, A, vt)
