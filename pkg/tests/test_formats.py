import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from kcforge.ac import random_monotone_ac
from kcforge.core import Dnf, FunTable
from kcforge.fixtures import figure1_circuit, figure1_dnf, figure1_vtree, figure2_circuit
from kcforge.formats import (
    FormatError,
    parse_ac,
    parse_dnf,
    parse_fn,
    parse_nnf,
    parse_sdd,
    parse_vtree,
    print_ac,
    print_dnf,
    print_fn,
    print_nnf,
    print_sdd,
    print_vtree,
    sniff,
)
from kcforge.nnf import circuit_to_fn
from kcforge.sdd import SddManager, random_sdd, random_vtree
from kcforge.vtree import VTree


class TestDnf:
    def test_parse(self):
        d = parse_dnf("c a comment\np udnf 3 2\n1 -2 0\n3 0\n")
        assert d.universe == (1, 2, 3)
        assert [t.signed() for t in d.terms] == [[1, -2], [3]]

    def test_empty_term_and_empty_dnf(self):
        assert parse_dnf("p udnf 2 1\n0\n").terms[0].signed() == []
        assert parse_dnf("p udnf 2 0\n").terms == ()

    @pytest.mark.parametrize("text,line", [
        ("p udnf 2 1\n1 2\n", 2),
        ("p udnf 2 1\n1 5 0\n", 2),
        ("p udnf 2 1\n1 x 0\n", 2),
        ("p udnf 2\n", 1),
        ("p cnf 2 1\n1 0\n", 1),
        ("c\n\np udnf 2 1\n1 -1 0\n", 4),
    ])
    def test_errors_carry_line(self, text, line):
        with pytest.raises(FormatError) as err:
            parse_dnf(text)
        assert err.value.line == line
        assert f"line {line}" in str(err.value)

    def test_term_count_mismatch(self):
        with pytest.raises(FormatError):
            parse_dnf("p udnf 2 2\n1 0\n")

    @given(st.integers(0, 2**32 - 1))
    def test_round_trip(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 8)
        u = tuple(range(1, n + 1))
        terms = [[v if rng.random() < 0.5 else -v for v in rng.sample(u, rng.randint(0, n))]
                 for _ in range(rng.randint(0, 6))]
        d = Dnf.of(u, terms)
        assert parse_dnf(print_dnf(d)) == d


class TestNnf:
    def test_figure1_round_trip(self):
        c = figure1_circuit()
        again = parse_nnf(print_nnf(c))
        assert again.nodes == c.nodes and again.root == c.root and again.dom == c.dom
        assert circuit_to_fn(again) == circuit_to_fn(c)

    def test_errors(self):
        with pytest.raises(FormatError) as err:
            parse_nnf("nnf 2 1 1\nL 1\nA 0 7\n")
        assert err.value.line == 3
        with pytest.raises(FormatError) as err:
            parse_nnf("nnf 1 0 1\nL 2\n")
        assert err.value.line == 2
        with pytest.raises(FormatError):
            parse_nnf("nnf 2 0 1\nT\n")


class TestVTree:
    def test_figure1_round_trip(self):
        vt = figure1_vtree()
        assert parse_vtree(print_vtree(vt)).nested() == vt.nested()

    def test_random_round_trip(self):
        rng = random.Random(3)
        for _ in range(50):
            vt = random_vtree(range(1, rng.randint(1, 9) + 1), rng)
            assert parse_vtree(print_vtree(vt)).nested() == vt.nested()

    def test_errors(self):
        with pytest.raises(FormatError):
            parse_vtree("vtree 3\nL 0 1\nL 1 1\nI 2 0 1\n")
        with pytest.raises(FormatError) as err:
            parse_vtree("vtree 2\nL 0 1\nQ 1 0\n")
        assert err.value.line == 3


class TestSdd:
    def test_random_round_trip(self):
        rng = random.Random(8)
        for _ in range(50):
            u = tuple(range(1, rng.randint(1, 6) + 1))
            vt = random_vtree(u, rng)
            mgr = SddManager(vt)
            s = random_sdd(mgr, rng)
            text = print_sdd(mgr, s)
            other, n = parse_sdd(text, vt)
            assert other.table(n) == mgr.table(s)
            assert print_sdd(other, n) == text
            # loading into the original manager lands on the same node
            assert parse_sdd(text, vt, mgr)[1] == s

    def test_constants(self):
        vt = VTree.from_nested((1, 2))
        mgr, n = parse_sdd("sdd 1\nT 1 0\n", vt)
        assert n == 1

    def test_errors(self):
        vt = VTree.from_nested((1, 2))
        with pytest.raises(FormatError) as err:
            parse_sdd("sdd 2\nL 0 1\nD 1 2 1 0 5\n", vt)
        assert err.value.line == 3
        with pytest.raises(FormatError):
            parse_sdd("sdd 1\nL 0 9\n", vt)
        with pytest.raises(FormatError):
            parse_sdd("sdd 1\nT 2 0\n", vt)


class TestAc:
    def test_figure2_round_trip_exact(self):
        c = figure2_circuit()
        again = parse_ac(print_ac(c), exact=True)
        assert again == c

    def test_float_and_rational_constants(self):
        c = parse_ac("ac 3 2 1\nC 0.25\nC 1/2\nP 0 1\n")
        assert c.nodes[0] == ("C", 0.25) and c.nodes[1] == ("C", 0.5)
        e = parse_ac("ac 1 0 1\nC 0.1\n", exact=True)
        assert e.nodes[0] == ("C", Fraction(1, 10))

    def test_random_round_trip(self):
        rng = random.Random(5)
        for _ in range(50):
            c = random_monotone_ac(tuple(range(1, rng.randint(1, 5) + 1)), rng, size=rng.randint(2, 15))
            assert parse_ac(print_ac(c)) == c

    def test_errors(self):
        with pytest.raises(FormatError) as err:
            parse_ac("ac 1 0 1\nC abc\n")
        assert err.value.line == 2
        with pytest.raises(FormatError):
            parse_ac("ac 1 0 1\nX 1\n")


class TestFn:
    def test_round_trip(self):
        rng = random.Random(1)
        for n in range(1, 7):
            f = FunTable(tuple(range(1, n + 1)), rng.getrandbits(1 << n))
            assert parse_fn(print_fn(f)) == f

    def test_errors(self):
        with pytest.raises(FormatError) as err:
            parse_fn("p fn 2 1\n102\n")
        assert err.value.line == 2
        with pytest.raises(FormatError):
            parse_fn("p fn 2 2\n10\n")

    def test_non_contiguous_universe(self):
        with pytest.raises(FormatError):
            print_fn(FunTable((2, 5), 1))


def test_sniff():
    assert sniff(print_dnf(figure1_dnf())) == "dnf"
    assert sniff(print_nnf(figure1_circuit())) == "nnf"
    assert sniff(print_vtree(figure1_vtree())) == "vtree"
    assert sniff(print_ac(figure2_circuit())) == "ac"
    assert sniff("c hi\np fn 1 0\n") == "fn"
    assert sniff("sdd 1\nT 0 0\n") == "sdd"
    with pytest.raises(FormatError):
        sniff("hello\n")
