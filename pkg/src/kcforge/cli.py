"""Batch command-line front end.

Every command prints (or writes with ``--report``) one JSON report with
sorted keys.  The ``digest`` field hashes the report without its timings, so
two runs on the same inputs and flags produce the same digest.  The exit code
is 0 when every verdict in the report is true, 1 when some verdict is false
and 2 when the command failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
import typing as t
from pathlib import Path

from . import __version__
from .ac import (
    ac_property_checks,
    phi_map,
    strip_parameters,
    support,
    validate_psdd,
)
from .comm import (
    PartitionedSpace,
    UndefinedMeasure,
    best_cov,
    best_par,
    balanced_partitions,
    cov_number,
    log_measure,
    par_number,
)
from .core import (
    Dnf,
    FunTable,
    GuardError,
    KcError,
    dnf_to_fn,
    exists_fn,
    find_overlap,
    negate_fn,
    overlap_assignment,
)
from .formats import (
    parse_ac,
    parse_dnf,
    parse_fn,
    parse_nnf,
    parse_sdd,
    parse_vtree,
    print_dnf,
    print_nnf,
    print_sdd,
    print_vtree,
    sniff,
)
from .lift import lift
from .nnf import circuit_size, circuit_to_fn, is_decomposable, is_deterministic
from .sdd import AND, OR, SddManager, compile_dnf, sdd_to_circuit, validate_sdd
from .vtree import VTree, compile_unambiguous_dnf, respects

SCHEMA_VERSION = 1


class Report:
    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.inputs: t.List[t.Dict[str, str]] = []
        self.config: t.Dict[str, t.Any] = {"seed": args.seed, "jobs": args.jobs}
        self.outputs: t.Dict[str, str] = {}
        self.metrics: t.Dict[str, t.Any] = {}
        self.verdicts: t.Dict[str, bool] = {}
        self.witnesses: t.Dict[str, t.Any] = {}
        self.timings: t.Dict[str, float] = {}
        self.error: t.Dict[str, t.Any] | None = None
        self._clock = time.perf_counter()

    def read(self, path: str) -> str:
        data = Path(path).read_bytes()
        self.inputs.append({"path": path, "sha256": hashlib.sha256(data).hexdigest()})
        return data.decode()

    def write(self, key: str, path: str | None, text: str) -> None:
        if path:
            Path(path).write_text(text)
            self.outputs[key] = path

    def verdict(self, name: str, check) -> bool:
        ok = bool(check)
        self.verdicts[name] = ok
        if not ok:
            witness = getattr(check, "witness", None)
            reason = getattr(check, "reason", "")
            self.witnesses[name] = {"witness": _jsonable(witness), "reason": reason}
        return ok

    def stage(self, name: str) -> None:
        now = time.perf_counter()
        self.timings[name] = round(now - self._clock, 6)
        self._clock = now

    def as_dict(self) -> t.Dict[str, t.Any]:
        body = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "inputs": self.inputs,
            "config": self.config,
            "outputs": self.outputs,
            "metrics": self.metrics,
            "verdicts": self.verdicts,
            "witnesses": self.witnesses,
        }
        if self.error is not None:
            body["error"] = self.error
        canon = json.dumps(body, sort_keys=True, separators=(",", ":"), default=str)
        body["digest"] = hashlib.sha256(canon.encode()).hexdigest()
        body["timings"] = self.timings
        return body

    def dumps(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2, default=str) + "\n"

    def exit_code(self) -> int:
        if self.error is not None:
            return 2
        return 0 if all(self.verdicts.values()) else 1


def _jsonable(x):
    from .core import Assignment

    if isinstance(x, Assignment):
        return x.as_dict()
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    if isinstance(x, (int, float, str, bool)) or x is None:
        return x
    return str(x)


def _load_vtree(rep: Report, args, universe) -> VTree:
    if getattr(args, "vtree", None):
        return parse_vtree(rep.read(args.vtree))
    shape = getattr(args, "vtree_shape", "balanced")
    if shape == "right-linear":
        return VTree.right_linear(list(universe))
    return VTree.balanced(list(universe))


def _load_function(rep: Report, path: str) -> t.Tuple[FunTable, Dnf | None]:
    text = rep.read(path)
    kind = sniff(text)
    if kind == "fn":
        return parse_fn(text), None
    if kind == "dnf":
        d = parse_dnf(text)
        return dnf_to_fn(d), d
    if kind == "nnf":
        return circuit_to_fn(parse_nnf(text)), None
    raise KcError(f"expected a DNF, circuit or function table, got '{kind}'")


def _partition_arg(text: str, universe) -> PartitionedSpace:
    side = [int(x) for x in text.replace(" ", "").split(",") if x]
    return PartitionedSpace.from_side(universe, side)


# -- commands ----------------------------------------------------------------


def cmd_check(rep: Report, args) -> None:
    text = rep.read(args.path)
    kind = sniff(text)
    rep.metrics["format"] = kind
    if kind == "dnf":
        d = parse_dnf(text)
        w = find_overlap(d)
        rep.metrics.update(variables=len(d.universe), terms=len(d), width=d.width)
        if w is None:
            rep.verdicts["unambiguous"] = True
        else:
            a = overlap_assignment(d, w)
            rep.verdicts["unambiguous"] = False
            rep.witnesses["unambiguous"] = {"terms": [w.first, w.second], "assignment": a.as_dict(),
                                            "reason": "two terms are jointly satisfiable"}
        rep.stage("check")
        return
    if kind == "nnf":
        c = parse_nnf(text)
        rep.metrics.update(size=circuit_size(c), dom=len(c.dom))
        rep.verdict("decomposable", is_decomposable(c))
        rep.verdict("deterministic", is_deterministic(c))
        if args.vtree:
            rep.verdict("respects", respects(c, parse_vtree(rep.read(args.vtree))))
        rep.stage("check")
        return
    if kind == "ac":
        c = parse_ac(text, exact=args.exact)
        vt = parse_vtree(rep.read(args.vtree)) if args.vtree else None
        rep.metrics.update(size=len(c), dom=len(c.dom))
        rep.verdicts["monotone"] = c.monotone
        for name, v in ac_property_checks(c, vt).items():
            rep.verdict(name, v)
        rep.stage("check")
        return
    if kind == "sdd":
        if not args.vtree:
            raise KcError("checking an SDD needs --vtree")
        mgr, n = parse_sdd(text, parse_vtree(rep.read(args.vtree)))
        rep.metrics.update(size=mgr.size(n), nodes=mgr.count_nodes(n))
        rep.verdict("valid_sdd", validate_sdd(mgr, n))
        rep.stage("check")
        return
    raise KcError(f"nothing to check in a '{kind}' file")


def cmd_compile(rep: Report, args) -> None:
    d = parse_dnf(rep.read(args.path))
    vt = _load_vtree(rep, args, d.universe)
    rep.config.update(target=args.target, vtree=str(vt))
    rep.stage("parse")
    f = dnf_to_fn(d)
    if args.target == "sdd":
        mgr, n = compile_dnf(d, vt, compress=args.compress)
        rep.stage("compile")
        rep.metrics.update(sdd_size=mgr.size(n), sdd_nodes=mgr.count_nodes(n))
        rep.verdict("valid_sdd", validate_sdd(mgr, n))
        rep.verdicts["equivalent"] = mgr.table(n) == f.bits
        rep.write("sdd", args.out, print_sdd(mgr, n))
    else:
        c = compile_unambiguous_dnf(d, vt)
        rep.stage("compile")
        rep.metrics.update(size=circuit_size(c), terms=len(d))
        rep.verdict("decomposable", is_decomposable(c))
        rep.verdict("deterministic", is_deterministic(c))
        rep.verdict("respects", respects(c, vt))
        rep.verdicts["equivalent"] = circuit_to_fn(c) == f
        rep.write("circuit", args.out, print_nnf(c))
    rep.write("vtree", args.vtree_out, print_vtree(vt))
    rep.stage("verify")


def cmd_lift(rep: Report, args) -> None:
    d = parse_dnf(rep.read(args.path))
    rep.config["c"] = args.c
    res = lift(d, args.c)
    rep.stage("lift")
    rep.metrics.update(res.stats())
    rep.verdicts["expanded_unambiguous"] = find_overlap(res.expanded) is None
    rep.verdicts["lifted_unambiguous"] = find_overlap(res.lifted) is None
    rep.stage("verify")
    rep.write("lifted", args.out, print_dnf(res.lifted))


def _measure(rep: Report, args, mode: str) -> None:
    f, _ = _load_function(rep, args.path)
    rep.config.update(bit=args.bit, partition=args.partition or "best")
    if args.partition:
        pi = _partition_arg(args.partition, f.universe)
        value, cert = (cov_number if mode == "cover" else par_number)(f, pi, args.bit)
    else:
        value, pi, cert = (best_cov if mode == "cover" else best_par)(f, args.bit, args.jobs)
    rep.stage("solve")
    key = "cov" if mode == "cover" else "par"
    rep.metrics[key] = value
    rep.metrics["partition"] = pi.as_json()
    try:
        rep.metrics["ncc" if mode == "cover" else "ucc"] = log_measure(value)
    except UndefinedMeasure:
        rep.metrics["ncc" if mode == "cover" else "ucc"] = "undefined"
    check = cert.validate(f)
    rep.verdict("certificate_valid", check)
    rep.write("certificate", args.out, cert.dumps(bool(check)))
    rep.stage("verify")


def cmd_cov(rep: Report, args) -> None:
    _measure(rep, args, "cover")


def cmd_par(rep: Report, args) -> None:
    _measure(rep, args, "partition")


def _load_sdds(rep: Report, args, paths) -> t.Tuple[SddManager, t.List[int]]:
    vt = parse_vtree(rep.read(args.vtree))
    mgr = SddManager(vt, compress=args.compress)
    roots = []
    for p in paths:
        _, n = parse_sdd(rep.read(p), vt, mgr)
        roots.append(n)
    rep.stage("parse")
    return mgr, roots


def _sdd_result(rep: Report, args, mgr: SddManager, n: int, expected: int) -> None:
    rep.stage("apply")
    rep.metrics.update(size=mgr.size(n), nodes=mgr.count_nodes(n))
    rep.verdict("valid_sdd", validate_sdd(mgr, n))
    rep.verdicts["table_exact"] = mgr.table(n) == expected
    rep.write("sdd", args.out, print_sdd(mgr, n))
    rep.stage("verify")


def cmd_apply(rep: Report, args) -> None:
    mgr, (a, b) = _load_sdds(rep, args, [args.left, args.right])
    rep.config["op"] = args.op
    inputs_ok = validate_sdd(mgr, a) and validate_sdd(mgr, b)
    rep.verdict("inputs_valid", inputs_ok)
    n = mgr.apply(a, b, AND if args.op == "and" else OR)
    ta, tb = mgr.table(a), mgr.table(b)
    _sdd_result(rep, args, mgr, n, ta & tb if args.op == "and" else ta | tb)


def cmd_neg(rep: Report, args) -> None:
    mgr, (a,) = _load_sdds(rep, args, [args.path])
    n = mgr.negate(a)
    _sdd_result(rep, args, mgr, n, negate_fn(mgr.to_fn(a)).bits)
    rep.verdicts["involution"] = mgr.negate(n) == a


def cmd_exists(rep: Report, args) -> None:
    mgr, (a,) = _load_sdds(rep, args, [args.path])
    rep.config["var"] = args.var
    n = mgr.exists(a, args.var)
    projected = exists_fn(mgr.to_fn(a), args.var).align(mgr.universe)
    _sdd_result(rep, args, mgr, n, projected.bits)


def cmd_phi(rep: Report, args) -> None:
    c = parse_ac(rep.read(args.path), exact=args.exact)
    rep.stage("parse")
    nnf = phi_map(c)
    rep.metrics.update(ac_size=len(c), nnf_size=circuit_size(nnf))
    rep.verdicts["same_dag"] = len(c) == circuit_size(nnf)
    rep.verdicts["supp_equals_sat"] = support(c) == circuit_to_fn(nnf)
    rep.write("circuit", args.out, print_nnf(nnf))
    rep.stage("verify")


def cmd_psdd_check(rep: Report, args) -> None:
    c = parse_ac(rep.read(args.path), exact=args.exact)
    vt = parse_vtree(rep.read(args.vtree))
    rep.stage("parse")
    ok = rep.verdict("valid_psdd", validate_psdd(c, vt))
    if ok:
        mgr, n = strip_parameters(c, vt)
        rep.metrics.update(psdd_size=len(c), sdd_size=mgr.size(n),
                           sdd_circuit_size=circuit_size(sdd_to_circuit(mgr, n)))
        rep.verdict("stripped_valid_sdd", validate_sdd(mgr, n))
        rep.verdicts["sat_equals_supp"] = mgr.table(n) == support(c).bits
        rep.write("sdd", args.out, print_sdd(mgr, n))
    rep.stage("verify")


def cmd_pipeline(rep: Report, args) -> None:
    psi = parse_dnf(rep.read(args.path))
    rep.config["c"] = args.c
    res = lift(psi, args.c)
    rep.metrics["lift"] = res.stats()
    rep.verdicts["lifted_unambiguous"] = find_overlap(res.lifted) is None
    rep.stage("lift")

    rep.metrics["stage"] = "compile"
    vt = VTree.balanced(list(res.lifted.universe))
    circuit = compile_unambiguous_dnf(res.lifted, vt)
    size = circuit_size(circuit)
    rep.metrics["dsdnnf_size"] = size
    rep.verdict("dsdnnf_respects", respects(circuit, vt))
    rep.verdict("dsdnnf_deterministic", is_deterministic(circuit))
    rep.stage("compile")

    rep.metrics["stage"] = "measure"
    f = dnf_to_fn(res.lifted)
    src = dnf_to_fn(psi)
    par1, _, _ = best_par(f, 1, args.jobs)
    rep.metrics["best_par_1"] = par1
    rep.verdicts["par_le_size"] = par1 <= size
    cov_neg, _, _ = best_cov(negate_fn(f), 1, args.jobs)
    rep.metrics["best_cov_neg_1"] = cov_neg
    try:
        rep.metrics["ncc_neg_1"] = log_measure(cov_neg)
    except UndefinedMeasure:
        rep.metrics["ncc_neg_1"] = "undefined"
    rep.stage("measure")

    rep.metrics["stage"] = "inequality"
    parts = list(balanced_partitions(psi.universe))
    rep.metrics["source_partitions"] = len(parts)
    for delta in (0, 1):
        lifted, _, _ = best_cov(f, delta, args.jobs)
        fixed = [cov_number(src, pi, delta)[0] for pi in parts]
        rep.metrics[f"cov_{delta}_lifted"] = lifted
        rep.metrics[f"cov_{delta}_source_per_partition"] = fixed
        rep.verdicts[f"lifting_inequality_{delta}"] = all(lifted >= v for v in fixed)
    rep.metrics["stage"] = "done"
    rep.stage("inequality")


COMMANDS = {
    "check": cmd_check,
    "compile": cmd_compile,
    "lift": cmd_lift,
    "cov": cmd_cov,
    "par": cmd_par,
    "apply": cmd_apply,
    "neg": cmd_neg,
    "exists": cmd_exists,
    "phi": cmd_phi,
    "psdd-check": cmd_psdd_check,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps (default 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for partition sweeps")
    common.add_argument("--report", help="write the JSON report here instead of stdout")

    p = argparse.ArgumentParser(prog="kcforge", description="Knowledge-compilation toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="structural checks on a DNF, NNF, AC or SDD file")
    s.add_argument("path")
    s.add_argument("--vtree")
    s.add_argument("--exact", action="store_true", help="rational arithmetic for AC files")

    s = sub.add_parser("compile", parents=[common], help="compile an unambiguous DNF")
    s.add_argument("path")
    s.add_argument("--target", choices=("dsdnnf", "sdd"), default="dsdnnf")
    s.add_argument("--vtree")
    s.add_argument("--vtree-shape", choices=("balanced", "right-linear"), default="balanced")
    s.add_argument("--vtree-out")
    s.add_argument("--compress", action="store_true")
    s.add_argument("--out")

    s = sub.add_parser("lift", parents=[common], help="lift an unambiguous DNF to all balanced partitions")
    s.add_argument("path")
    s.add_argument("--c", type=int, default=2)
    s.add_argument("--out")

    for name in ("cov", "par"):
        s = sub.add_parser(name, parents=[common], help=f"exact {'cover' if name == 'cov' else 'partition'} number")
        s.add_argument("path")
        g = s.add_mutually_exclusive_group()
        g.add_argument("--partition", help="comma-separated variables of the X side")
        g.add_argument("--best", action="store_true", help="minimise over balanced partitions (default)")
        s.add_argument("--bit", type=int, choices=(0, 1), default=1)
        s.add_argument("--out", help="write the certificate JSON here")

    s = sub.add_parser("apply", parents=[common], help="conjoin or disjoin two SDDs")
    s.add_argument("left")
    s.add_argument("right")
    s.add_argument("--op", choices=("and", "or"), default="and")
    s.add_argument("--vtree", required=True)
    s.add_argument("--compress", action="store_true")
    s.add_argument("--out")

    s = sub.add_parser("neg", parents=[common], help="negate an SDD")
    s.add_argument("path")
    s.add_argument("--vtree", required=True)
    s.add_argument("--compress", action="store_true")
    s.add_argument("--out")

    s = sub.add_parser("exists", parents=[common], help="existentially quantify a variable of an SDD")
    s.add_argument("path")
    s.add_argument("--var", type=int, required=True)
    s.add_argument("--vtree", required=True)
    s.add_argument("--compress", action="store_true")
    s.add_argument("--out")

    s = sub.add_parser("phi", parents=[common], help="map a monotone AC to an NNF")
    s.add_argument("path")
    s.add_argument("--exact", action="store_true")
    s.add_argument("--out")

    s = sub.add_parser("psdd-check", parents=[common], help="validate a PSDD and strip its parameters")
    s.add_argument("path")
    s.add_argument("--vtree", required=True)
    s.add_argument("--exact", action="store_true")
    s.add_argument("--out")

    s = sub.add_parser("pipeline", parents=[common], help="lift, compile and measure end to end")
    s.add_argument("path")
    s.add_argument("--c", type=int, default=2)
    return p


def main(argv: t.Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    rep = Report(args.command, args)
    try:
        COMMANDS[args.command](rep, args)
    except GuardError as exc:
        rep.error = {"type": "GuardError", "guard": exc.name, "needed": exc.needed,
                     "limit": exc.limit, "message": str(exc)}
    except (KcError, OSError, ValueError) as exc:
        rep.error = {"type": type(exc).__name__, "message": str(exc)}
        line = getattr(exc, "line", None)
        if line is not None:
            rep.error["line"] = line
    text = rep.dumps()
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return rep.exit_code()


if __name__ == "__main__":
    sys.exit(main())
