import itertools
import random

import pytest

from kcforge.comm import PartitionedSpace, balanced_partitions
from kcforge.core import AmbiguousDnf, Assignment, Dnf, Term, find_overlap
from kcforge.fixtures import eq_dnf, random_unambiguous_dnf, xor_dnf
from kcforge.gf import AffinePerm, enumerate_perms, family_size
from kcforge.lift import (
    LiftConfig,
    LiftError,
    copy_expand,
    designated_copy,
    expected_expanded_terms,
    expected_lifted_terms,
    find_embedding_perm,
    lands,
    lift,
    lift_dnf,
    perm_term,
    project_copies,
    simulate_protocol_input,
)

import oracles


def signed_terms(d):
    return [sorted(t.signed(), key=abs) for t in d.terms]


class TestConfig:
    def test_sizes(self):
        cfg = LiftConfig(2, 2)
        assert (cfg.m, cfg.slots, cfg.t, cfg.size) == (4, 8, 3, 8)
        cfg = LiftConfig(2, 1)
        assert (cfg.m, cfg.slots, cfg.t, cfg.size) == (2, 4, 2, 4)
        assert len(cfg.lifted_universe()) == 8
        cfg = LiftConfig(1, 2)
        assert (cfg.t, cfg.size) == (1, 2)

    def test_padding_to_power_of_two(self):
        cfg = LiftConfig(3, 1)
        assert cfg.slots == 9 and cfg.size == 16 and cfg.t == 4

    def test_layout(self):
        cfg = LiftConfig(2, 1)
        assert cfg.copy_var(1, 1) == cfg.slot(1, 1) + 1 == 4
        assert cfg.z_var(0) == 1 and cfg.v_var(0) == 2 * cfg.t + 1

    def test_rejects_bad(self):
        with pytest.raises(LiftError):
            LiftConfig(0, 2)


class TestCopyExpand:
    def test_positive_single_variable(self):
        cfg = LiftConfig(1, 2)
        vee = copy_expand(Dnf.of((1,), [[1]]), cfg)
        assert signed_terms(vee) == [[1, -2], [-1, 2]]

    def test_negative_single_variable(self):
        vee = copy_expand(Dnf.of((1,), [[-1]]), LiftConfig(1, 2))
        assert signed_terms(vee) == [[-1, -2]]

    def test_mixed_term(self):
        cfg = LiftConfig(2, 1)
        vee = copy_expand(Dnf.of((1, 2), [[1, -2]]), cfg)
        assert len(vee.terms) == 2
        assert all(len(t) == 4 for t in vee.terms)
        assert find_overlap(vee) is None

    def test_rejects_ambiguous(self):
        with pytest.raises(AmbiguousDnf):
            copy_expand(Dnf.of((1, 2), [[1], [2]]), LiftConfig(2, 1))

    def test_projection_soundness(self):
        rng = random.Random(2)
        for _ in range(30):
            n = rng.randint(1, 3)
            u = tuple(range(1, n + 1))
            psi = random_unambiguous_dnf(u, rng)
            cfg = LiftConfig(n, 1)
            vee = copy_expand(psi, cfg)
            eu = vee.universe
            for env in oracles.assignments(eu):
                if oracles.dnf_holds(signed_terms(vee), env):
                    beta = project_copies(Assignment.from_dict(eu, env), cfg, u)
                    assert oracles.dnf_holds(signed_terms(psi), beta.as_dict())

    def test_expansion_equivalence(self):
        # psi_vee(y) == psi(OR of copies) whenever every variable has at most one true copy
        rng = random.Random(4)
        for _ in range(20):
            n = rng.randint(1, 3)
            u = tuple(range(1, n + 1))
            psi = random_unambiguous_dnf(u, rng)
            cfg = LiftConfig(n, 2 if n < 3 else 1)
            vee = copy_expand(psi, cfg)
            assert len(vee.terms) == expected_expanded_terms(psi, cfg)
            for env in oracles.assignments(vee.universe):
                counts = [sum(env[cfg.copy_var(i, j)] for j in range(cfg.m)) for i in range(n)]
                if max(counts) > 1:
                    continue
                src = {u[i]: counts[i] for i in range(n)}
                assert oracles.dnf_holds(signed_terms(vee), env) == oracles.dnf_holds(signed_terms(psi), src)


class TestPermTerm:
    def test_identity_t1(self):
        cfg = LiftConfig(1, 2)
        ident = AffinePerm(1, 1, 0)
        out = perm_term(Term.of([1]), ident, cfg)
        # rep = (1, 0): z1 positive, z2 negative; slot 0 stays slot 0
        assert sorted(out.signed(), key=abs) == [1, -2, cfg.v_var(0)]

    def test_empty_term(self):
        cfg = LiftConfig(2, 1)
        for s in enumerate_perms(cfg.t):
            out = perm_term(Term.of([]), s, cfg)
            assert len(out) == 2 * cfg.t

    def test_translation_by_one(self):
        cfg = LiftConfig(2, 1)
        s = AffinePerm(2, 1, 1)
        out = perm_term(Term.of([1, -2]), s, cfg)  # slots 0, 1
        body = [l for l in out.signed() if abs(l) > 2 * cfg.t]
        assert sorted(body, key=abs) == [-cfg.v_var(0), cfg.v_var(1)]

    def test_slot_out_of_range(self):
        cfg = LiftConfig(2, 1)
        with pytest.raises(LiftError):
            perm_term(Term.of([9]), AffinePerm(2, 1, 0), cfg)


class TestLiftDnf:
    def test_single_variable(self):
        res = lift(Dnf.of((1,), [[1]]), 2)
        assert len(res.lifted.terms) == 4

    def test_counts_and_unambiguity_small(self):
        rng = random.Random(9)
        for _ in range(25):
            n = rng.randint(1, 3)
            u = tuple(range(1, n + 1))
            psi = random_unambiguous_dnf(u, rng)
            for c in (1, 2):
                cfg = LiftConfig(n, c)
                res = lift(psi, c)
                assert len(res.expanded.terms) == expected_expanded_terms(psi, cfg)
                assert len(res.lifted.terms) == family_size(cfg.t) * len(res.expanded.terms)
                assert len(res.lifted.terms) == expected_lifted_terms(psi, cfg)
                assert find_overlap(res.lifted) is None
                if len(res.lifted.universe) <= 12:
                    assert find_overlap(res.lifted, "bruteforce") is None

    def test_xor_with_c1(self):
        res = lift(xor_dnf(), 1)
        assert len(res.lifted.terms) == 12 * len(res.expanded.terms)

    def test_lifted_reads_back_permutation(self):
        # on inputs whose z-block spells sigma, the lifted DNF is the expansion pulled back by sigma
        psi = eq_dnf()
        res = lift(psi, 1)
        cfg = res.cfg
        lifted = signed_terms(res.lifted)
        vee = signed_terms(res.expanded)
        for s in enumerate_perms(cfg.t):
            for bits in itertools.product((0, 1), repeat=cfg.size):
                env = {cfg.z_var(k): b for k, b in enumerate(s.rep())}
                for slot in range(cfg.size):
                    env[cfg.v_var(s(slot))] = bits[slot]
                src = {slot + 1: bits[slot] for slot in range(cfg.slots)}
                assert oracles.dnf_holds(lifted, env) == oracles.dnf_holds(vee, src)

    def test_stats(self):
        st = lift(eq_dnf(), 1).stats()
        assert st["lifted"]["variables"] == 8
        assert st["config"] == {"c": 1, "m": 2, "t": 2, "n_prime": 4}


class TestEmbedding:
    def test_search_and_landing(self):
        cfg = LiftConfig(2, 1)
        u = cfg.lifted_universe()
        found = 0
        for gamma in balanced_partitions(u, ordered=True):
            s = find_embedding_perm(gamma, cfg)
            brute = [p for p in enumerate_perms(cfg.t) if lands(p, gamma, cfg)]
            if s is None:
                assert not brute
                continue
            found += 1
            assert s == brute[0]
            for i in range(cfg.n):
                for k in (0, 1):
                    j = designated_copy(s, gamma, cfg, i, k)
                    assert cfg.v_var(s(cfg.slot(i, j))) in gamma.side(k)
                    assert all(cfg.v_var(s(cfg.slot(i, jj))) not in gamma.side(k) for jj in range(j))
        assert found > 0

    def test_z_only_side_has_no_embedding(self):
        cfg = LiftConfig(2, 1)
        u = cfg.lifted_universe()
        gamma = PartitionedSpace.from_side(u, [cfg.z_var(k) for k in range(2 * cfg.t)])
        assert find_embedding_perm(gamma, cfg) is None

    def test_rejects_foreign_partition(self):
        cfg = LiftConfig(2, 1)
        with pytest.raises(LiftError):
            find_embedding_perm(PartitionedSpace.from_side((1, 2, 3), [1]), cfg)


def _check_protocol(psi, c, gammas=None):
    res = lift(psi, c)
    cfg = res.cfg
    lifted = signed_terms(res.lifted)
    src = signed_terms(psi)
    u = psi.universe
    checked = 0
    for gamma in gammas or balanced_partitions(res.lifted.universe, ordered=True):
        s = find_embedding_perm(gamma, cfg)
        if s is None:
            continue
        for pi in balanced_partitions(u, ordered=True):
            for env in oracles.assignments(u):
                a = Assignment.from_dict(u, env)
                out = simulate_protocol_input(a, s, gamma, pi, cfg).as_dict()
                assert oracles.dnf_holds(lifted, out) == oracles.dnf_holds(src, env)
                checked += 1
    return checked


class TestProtocol:
    def test_eq_fixture(self):
        assert _check_protocol(eq_dnf(), 1) > 0

    def test_xor_fixture(self):
        assert _check_protocol(xor_dnf(), 1) > 0

    def test_three_variables_sampled(self):
        rng = random.Random(1)
        psi = random_unambiguous_dnf((1, 2, 3), rng, stop=0.0)
        cfg = LiftConfig(3, 1)
        u = cfg.lifted_universe()
        gammas = []
        while len(gammas) < 4:
            side = rng.sample(u, len(u) // 2)
            gamma = PartitionedSpace.from_side(u, side)
            if find_embedding_perm(gamma, cfg) is not None:
                gammas.append(gamma)
        res = lift(psi, 1)
        lifted = res.lifted
        for gamma in gammas:
            s = find_embedding_perm(gamma, cfg)
            for pi in balanced_partitions((1, 2, 3), ordered=True):
                for env in oracles.assignments((1, 2, 3)):
                    a = Assignment.from_dict((1, 2, 3), env)
                    out = simulate_protocol_input(a, s, gamma, pi, cfg)
                    hit = any(t.satisfied_by(out) for t in lifted.terms)
                    assert hit == oracles.dnf_holds(signed_terms(psi), env)

    def test_requires_landing(self):
        cfg = LiftConfig(2, 1)
        u = cfg.lifted_universe()
        gamma = PartitionedSpace.from_side(u, [cfg.z_var(k) for k in range(2 * cfg.t)])
        a = Assignment((1, 2), (0, 1))
        pi = PartitionedSpace.from_side((1, 2), [1])
        with pytest.raises(LiftError):
            simulate_protocol_input(a, AffinePerm(2, 1, 0), gamma, pi, cfg)
