import json
import random

import pytest

from kcforge.ac import psdd_from_sdd
from kcforge.cli import main
from kcforge.core import FunTable, dnf_to_fn, exists_fn
from kcforge.fixtures import (
    eq_dnf,
    figure1_circuit,
    figure1_dnf,
    figure1_vtree,
    figure2_circuit,
)
from kcforge.formats import (
    parse_dnf,
    parse_nnf,
    parse_sdd,
    parse_vtree,
    print_ac,
    print_dnf,
    print_fn,
    print_nnf,
    print_sdd,
    print_vtree,
)
from kcforge.gf import family_size
from kcforge.nnf import circuit_to_fn
from kcforge.sdd import SddManager, random_sdd
from kcforge.vtree import VTree

import oracles


def run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = main([*argv, "--report", str(out)])
    return code, json.loads(out.read_text())


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.fixture
def fig1(tmp_path):
    return (write(tmp_path, "fig1.nnf", print_nnf(figure1_circuit())),
            write(tmp_path, "fig1.vtree", print_vtree(figure1_vtree())))


class TestCheck:
    def test_figure1_all_true(self, tmp_path, fig1):
        code, rep = run(tmp_path, "check", fig1[0], "--vtree", fig1[1])
        assert code == 0
        assert rep["verdicts"] == {"decomposable": True, "deterministic": True, "respects": True}
        assert rep["metrics"]["size"] == 15

    def test_ambiguous_dnf(self, tmp_path):
        path = write(tmp_path, "amb.dnf", "p udnf 2 2\n1 0\n2 0\n")
        code, rep = run(tmp_path, "check", path)
        assert code == 1
        assert rep["verdicts"]["unambiguous"] is False
        a = {int(k): v for k, v in rep["witnesses"]["unambiguous"]["assignment"].items()}
        assert oracles.dnf_holds([[1]], a) and oracles.dnf_holds([[2]], a)

    def test_unambiguous_dnf(self, tmp_path):
        code, rep = run(tmp_path, "check", write(tmp_path, "f.dnf", print_dnf(figure1_dnf())))
        assert code == 0 and rep["verdicts"]["unambiguous"]

    def test_guard_is_named(self, tmp_path, fig1, monkeypatch):
        monkeypatch.setenv("KCFORGE_GUARD", "3")
        code, rep = run(tmp_path, "check", fig1[0])
        assert code == 2
        assert rep["error"]["type"] == "GuardError" and rep["error"]["guard"]
        assert rep["error"]["limit"] == 3

    def test_parse_error_line(self, tmp_path):
        path = write(tmp_path, "bad.nnf", "nnf 2 1 1\nL 1\nA 0 9\n")
        code, rep = run(tmp_path, "check", path)
        assert code == 2
        assert rep["error"]["type"] == "FormatError" and rep["error"]["line"] == 3

    def test_missing_file(self, tmp_path):
        code, rep = run(tmp_path, "check", str(tmp_path / "nope"))
        assert code == 2 and "error" in rep

    def test_ac_and_sdd(self, tmp_path):
        ac = write(tmp_path, "f2.ac", print_ac(figure2_circuit()))
        code, rep = run(tmp_path, "check", ac, "--exact")
        assert rep["verdicts"]["monotone"] and rep["verdicts"]["decomposable"]
        assert rep["verdicts"]["deterministic"] is False and code == 1
        vt = VTree.balanced([1, 2, 3])
        mgr = SddManager(vt)
        s = random_sdd(mgr, random.Random(1))
        sdd = write(tmp_path, "s.sdd", print_sdd(mgr, s))
        vtp = write(tmp_path, "s.vtree", print_vtree(vt))
        code, rep = run(tmp_path, "check", sdd, "--vtree", vtp)
        assert code == 0 and rep["verdicts"]["valid_sdd"]


class TestCompile:
    def test_dsdnnf_and_sdd(self, tmp_path):
        src = write(tmp_path, "f.dnf", print_dnf(figure1_dnf()))
        out, vout = str(tmp_path / "c.nnf"), str(tmp_path / "c.vtree")
        code, rep = run(tmp_path, "compile", src, "--out", out, "--vtree-out", vout)
        assert code == 0 and all(rep["verdicts"].values())
        assert circuit_to_fn(parse_nnf(open(out).read())) == dnf_to_fn(figure1_dnf())
        vt = parse_vtree(open(vout).read())
        code, rep = run(tmp_path, "compile", src, "--target", "sdd", "--vtree", vout,
                        "--out", str(tmp_path / "c.sdd"))
        assert code == 0 and rep["verdicts"]["valid_sdd"] and rep["verdicts"]["equivalent"]
        mgr, n = parse_sdd(open(tmp_path / "c.sdd").read(), vt)
        assert mgr.to_fn(n) == dnf_to_fn(figure1_dnf())

    def test_ambiguous_rejected(self, tmp_path):
        code, rep = run(tmp_path, "compile", write(tmp_path, "a.dnf", "p udnf 2 2\n1 0\n2 0\n"))
        assert code == 2 and rep["error"]["type"] == "AmbiguousDnf"


class TestLift:
    def test_counts(self, tmp_path):
        src = write(tmp_path, "eq.dnf", print_dnf(eq_dnf()))
        out = str(tmp_path / "lifted.dnf")
        code, rep = run(tmp_path, "lift", src, "--c", "1", "--out", out)
        assert code == 0
        m = rep["metrics"]
        assert m["lifted"]["terms"] == 12 * m["expanded"]["terms"]
        assert len(parse_dnf(open(out).read()).terms) == m["lifted"]["terms"]
        code, rep = run(tmp_path, "lift", src, "--c", "2")
        m = rep["metrics"]
        assert m["config"]["t"] == 3
        assert m["lifted"]["terms"] == family_size(3) * m["expanded"]["terms"]

    def test_one_variable(self, tmp_path):
        code, rep = run(tmp_path, "lift", write(tmp_path, "x.dnf", "p udnf 1 1\n1 0\n"), "--c", "2")
        assert code == 0 and rep["metrics"]["config"]["t"] == 1

    def test_malformed_header(self, tmp_path):
        code, rep = run(tmp_path, "lift", write(tmp_path, "b.dnf", "p udnf two 1\n1 0\n"))
        assert code == 2 and rep["error"]["line"] == 1


class TestMeasures:
    @pytest.mark.parametrize("cmd", ["cov", "par"])
    def test_xor_embedded(self, tmp_path, cmd):
        u = (1, 2, 3)
        f = FunTable(u, oracles.table(u, lambda e: e[1] != e[2]))
        src = write(tmp_path, "x.fn", print_fn(f))
        cert = str(tmp_path / "cert.json")
        code, rep = run(tmp_path, cmd, src, "--partition", "1", "--out", cert)
        assert code == 0 and rep["metrics"][cmd] == 2
        assert json.loads(open(cert).read())["valid"] is True

    def test_best_and_undefined(self, tmp_path):
        src = write(tmp_path, "z.fn", print_fn(FunTable((1, 2, 3), 0)))
        code, rep = run(tmp_path, "cov", src, "--best", "--bit", "1")
        assert code == 0
        assert rep["metrics"]["cov"] == 0 and rep["metrics"]["ncc"] == "undefined"

    def test_from_dnf(self, tmp_path):
        src = write(tmp_path, "f.dnf", print_dnf(figure1_dnf()))
        code, rep = run(tmp_path, "par", src)
        assert code == 0 and 1 <= rep["metrics"]["par"] <= 3


class TestSddCommands:
    def setup_files(self, tmp_path):
        vt = VTree.balanced([1, 2, 3, 4])
        mgr = SddManager(vt)
        rng = random.Random(4)
        a, b = random_sdd(mgr, rng), random_sdd(mgr, rng)
        return (mgr, a, b, write(tmp_path, "t.vtree", print_vtree(vt)),
                write(tmp_path, "a.sdd", print_sdd(mgr, a)), write(tmp_path, "b.sdd", print_sdd(mgr, b)))

    def test_apply(self, tmp_path):
        mgr, a, b, vt, pa, pb = self.setup_files(tmp_path)
        out = str(tmp_path / "r.sdd")
        code, rep = run(tmp_path, "apply", pa, pb, "--op", "or", "--vtree", vt, "--out", out)
        assert code == 0 and rep["verdicts"]["table_exact"]
        other, n = parse_sdd(open(out).read(), mgr.vtree)
        assert other.table(n) == mgr.table(a) | mgr.table(b)

    def test_neg_and_exists(self, tmp_path):
        mgr, a, b, vt, pa, pb = self.setup_files(tmp_path)
        code, rep = run(tmp_path, "neg", pa, "--vtree", vt, "--compress")
        assert code == 0 and rep["verdicts"]["involution"]
        out = str(tmp_path / "e.sdd")
        code, rep = run(tmp_path, "exists", pa, "--var", "2", "--vtree", vt, "--out", out)
        assert code == 0
        other, n = parse_sdd(open(out).read(), mgr.vtree)
        assert other.to_fn(n) == exists_fn(mgr.to_fn(a), 2).align(mgr.universe)


class TestAcCommands:
    def test_phi(self, tmp_path):
        out = str(tmp_path / "phi.nnf")
        code, rep = run(tmp_path, "phi", write(tmp_path, "f2.ac", print_ac(figure2_circuit())),
                        "--exact", "--out", out)
        assert code == 0 and rep["verdicts"] == {"same_dag": True, "supp_equals_sat": True}
        bits = circuit_to_fn(parse_nnf(open(out).read())).bits
        assert bits == oracles.table((1, 2, 3), lambda e: e[1] and e[2])

    def test_psdd_check(self, tmp_path):
        vt = VTree.balanced([1, 2, 3])
        mgr = SddManager(vt)
        s = random_sdd(mgr, random.Random(9))
        c = psdd_from_sdd(mgr, s, random.Random(9), exact=True)
        code, rep = run(tmp_path, "psdd-check", write(tmp_path, "p.ac", print_ac(c)),
                        "--vtree", write(tmp_path, "p.vtree", print_vtree(vt)), "--exact")
        assert code == 0 and all(rep["verdicts"].values())

    def test_psdd_check_rejects(self, tmp_path):
        text = "ac 5 4 2\nL 1\nL 2\nM 0 1\nC 1\nM 3 2\n"
        code, rep = run(tmp_path, "psdd-check", write(tmp_path, "p.ac", text),
                        "--vtree", write(tmp_path, "p.vtree", print_vtree(VTree.from_nested((1, 2)))))
        assert code == 1 and rep["verdicts"] == {"valid_psdd": False}


class TestPipeline:
    def test_eq_fixture(self, tmp_path):
        code, rep = run(tmp_path, "pipeline", write(tmp_path, "eq.dnf", print_dnf(eq_dnf())), "--c", "1")
        assert code == 0
        assert rep["verdicts"] and all(rep["verdicts"].values())
        m = rep["metrics"]
        assert m["stage"] == "done" and m["lift"]["lifted"]["variables"] == 8
        assert m["best_par_1"] <= m["dsdnnf_size"]

    def test_constant_true(self, tmp_path):
        code, rep = run(tmp_path, "pipeline", write(tmp_path, "one.dnf", "p udnf 2 1\n0\n"), "--c", "1")
        assert code == 0
        assert rep["metrics"]["cov_0_source_per_partition"] == [0]

    def test_guard_stops_after_lift(self, tmp_path, monkeypatch):
        monkeypatch.setenv("KCFORGE_GUARD", "6")
        code, rep = run(tmp_path, "pipeline", write(tmp_path, "eq.dnf", print_dnf(eq_dnf())), "--c", "1")
        assert code == 2 and rep["error"]["type"] == "GuardError"
        assert rep["metrics"]["lift"]["lifted"]["variables"] == 8
        assert rep["metrics"]["stage"] != "done"

    def test_deterministic_digest(self, tmp_path):
        src = write(tmp_path, "eq.dnf", print_dnf(eq_dnf()))
        _, r1 = run(tmp_path, "pipeline", src, "--c", "1")
        _, r2 = run(tmp_path, "pipeline", src, "--c", "1")
        assert r1["digest"] == r2["digest"]
        strip = lambda r: {k: v for k, v in r.items() if k != "timings"}
        assert strip(r1) == strip(r2)


def test_stdout_report(capsys, fig1):
    assert main(["check", fig1[0]]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["command"] == "check" and rep["schema_version"] == 1
