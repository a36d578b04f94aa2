"""Lifting an unambiguous DNF from a fixed partition to every balanced partition.

Two steps.  Copy expansion replaces each source variable ``x_i`` by ``m``
copies and writes every term in exactly-one-copy form, which keeps the DNF
unambiguous.  The permutation step then takes one copy of the expanded DNF
per affine map ``sigma`` of GF(2^t), relabelling slot ``s`` to ``sigma(s)``
and guarding it with ``2t`` selector variables spelling ``sigma``.

Variable layout (all 0-indexed internally):

* source variable ``i`` is ``psi.universe[i]``;
* copy ``(i, j)`` is slot ``s = i*m + j``; in the expanded DNF it is variable ``s + 1``;
* in the lifted DNF the selectors are variables ``1 .. 2t`` and slot ``s`` is
  variable ``2t + 1 + s``.  Slots ``n*m .. 2^t - 1`` are padding and never
  carry literals.
"""

from __future__ import annotations

import itertools
import math
import typing as t
from dataclasses import dataclass

from .comm import PartitionedSpace
from .core import Assignment, Dnf, KcError, Term, VarId, require_unambiguous
from .gf import MAX_DEGREE, AffinePerm, FieldError, enumerate_perms, family_size

DEFAULT_C = 2


class LiftError(KcError):
    pass


@dataclass(frozen=True)
class LiftConfig:
    n: int
    c: int = DEFAULT_C

    def __post_init__(self):
        if self.n < 1 or self.c < 1:
            raise LiftError("need n >= 1 and c >= 1")
        if self.t > MAX_DEGREE:
            raise FieldError(f"{self.slots} slots need degree {self.t} > {MAX_DEGREE}")

    @property
    def m(self) -> int:
        return self.c * self.n

    @property
    def slots(self) -> int:
        """Copy variables actually used (before padding)."""
        return self.n * self.m

    @property
    def t(self) -> int:
        return max(1, math.ceil(math.log2(self.slots)))

    @property
    def size(self) -> int:
        """Padded slot count n' = 2^t."""
        return 1 << self.t

    def slot(self, i: int, j: int) -> int:
        return i * self.m + j

    def copy_var(self, i: int, j: int) -> VarId:
        return self.slot(i, j) + 1

    def z_var(self, k: int) -> VarId:
        """Selector variable for bit ``k`` (0-indexed) of rep(sigma)."""
        return k + 1

    def v_var(self, s: int) -> VarId:
        return 2 * self.t + 1 + s

    def expanded_universe(self) -> t.Tuple[VarId, ...]:
        return tuple(range(1, self.slots + 1))

    def lifted_universe(self) -> t.Tuple[VarId, ...]:
        return tuple(range(1, 2 * self.t + self.size + 1))

    def as_json(self):
        return {"c": self.c, "m": self.m, "t": self.t, "n_prime": self.size}


def copy_expand(psi: Dnf, cfg: LiftConfig) -> Dnf:
    """Step 1: exactly-one-copy expansion; ``origin[k]`` is the source term index."""
    if len(psi.universe) != cfg.n:
        raise LiftError(f"config is for {cfg.n} variables, DNF has {len(psi.universe)}")
    require_unambiguous(psi)
    index = {v: i for i, v in enumerate(psi.universe)}
    m = cfg.m
    terms: t.List[Term] = []
    origin: t.List[int] = []
    for p, term in enumerate(psi.terms):
        positives = sorted(index[v] for v, pol in term.literals if pol)
        negatives = sorted(index[v] for v, pol in term.literals if not pol)
        neg_base = 0
        for i in negatives:
            for j in range(m):
                neg_base |= 1 << cfg.copy_var(i, j)
        for choice in itertools.product(range(m), repeat=len(positives)):
            pos = 0
            neg = neg_base
            for i, ji in zip(positives, choice):
                for j in range(m):
                    if j == ji:
                        pos |= 1 << cfg.copy_var(i, j)
                    else:
                        neg |= 1 << cfg.copy_var(i, j)
            terms.append(Term(pos, neg))
            origin.append(p)
    return Dnf(cfg.expanded_universe(), tuple(terms), tuple(origin))


def expected_expanded_terms(psi: Dnf, cfg: LiftConfig) -> int:
    return sum(cfg.m ** sum(1 for _, pol in term.literals if pol) for term in psi.terms)


def _selector_masks(sigma: AffinePerm, cfg: LiftConfig) -> t.Tuple[int, int]:
    pos = neg = 0
    for k, bit in enumerate(sigma.rep()):
        if bit:
            pos |= 1 << cfg.z_var(k)
        else:
            neg |= 1 << cfg.z_var(k)
    return pos, neg


def perm_term(term: Term, sigma: AffinePerm, cfg: LiftConfig) -> Term:
    """Selector block for ``sigma`` conjoined with the term relabelled slot-wise by ``sigma``."""
    if sigma.t != cfg.t:
        raise LiftError("permutation degree does not match the config")
    zp, zn = _selector_masks(sigma, cfg)
    return Term(zp | _relabel(term.pos, sigma, cfg), zn | _relabel(term.neg, sigma, cfg))


def _relabel(mask: int, sigma: AffinePerm, cfg: LiftConfig) -> int:
    out = 0
    while mask:
        low = mask & -mask
        var = low.bit_length() - 1
        s = var - 1
        if not 0 <= s < cfg.size:
            raise LiftError(f"variable {var} is not a slot of this config")
        out |= 1 << cfg.v_var(sigma(s))
        mask ^= low
    return out


def lift_dnf(psi: Dnf, cfg: LiftConfig, expanded: Dnf | None = None) -> Dnf:
    """Step 2: the disjunction of perm_term(C, sigma) over all sigma and expanded terms C.

    ``origin[k]`` is ``(sigma index, expanded term index)``.
    """
    vee = copy_expand(psi, cfg) if expanded is None else expanded
    # precompute per-term slot lists once; relabelling is then a table lookup
    lists = [(_slots(term.pos), _slots(term.neg)) for term in vee.terms]
    terms: t.List[Term] = []
    origin: t.List[t.Tuple[int, int]] = []
    base = 2 * cfg.t + 1
    for si, sigma in enumerate(enumerate_perms(cfg.t)):
        image = [1 << (base + sigma(s)) for s in range(cfg.size)]
        zp, zn = _selector_masks(sigma, cfg)
        for k, (ps, ns) in enumerate(lists):
            p, q = zp, zn
            for s in ps:
                p |= image[s]
            for s in ns:
                q |= image[s]
            terms.append(Term(p, q))
            origin.append((si, k))
    return Dnf(cfg.lifted_universe(), tuple(terms), tuple(origin))


def _slots(mask: int) -> t.List[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 2)
        mask ^= low
    return out


def expected_lifted_terms(psi: Dnf, cfg: LiftConfig) -> int:
    return family_size(cfg.t) * expected_expanded_terms(psi, cfg)


def project_copies(alpha: Assignment, cfg: LiftConfig, universe: t.Sequence[VarId]) -> Assignment:
    """Source assignment with x_i = 1 iff some copy of x_i is 1 under ``alpha``."""
    values = alpha.as_dict()
    bits = tuple(int(any(values[cfg.copy_var(i, j)] for j in range(cfg.m))) for i in range(cfg.n))
    return Assignment(tuple(universe), bits)


def lands(sigma: AffinePerm, gamma: PartitionedSpace, cfg: LiftConfig) -> bool:
    """Every source variable has a copy whose image lies on each side of ``gamma``."""
    side_x = set(gamma.sideX)
    for i in range(cfg.n):
        sides = set()
        for j in range(cfg.m):
            sides.add(0 if cfg.v_var(sigma(cfg.slot(i, j))) in side_x else 1)
        if len(sides) < 2:
            return False
    return True


def find_embedding_perm(gamma: PartitionedSpace, cfg: LiftConfig) -> AffinePerm | None:
    """First sigma (in enumeration order) whose copy images straddle ``gamma`` for every variable."""
    if tuple(gamma.universe) != cfg.lifted_universe():
        raise LiftError("gamma must partition the lifted universe")
    for sigma in enumerate_perms(cfg.t):
        if lands(sigma, gamma, cfg):
            return sigma
    return None


def designated_copy(sigma: AffinePerm, gamma: PartitionedSpace, cfg: LiftConfig, i: int, k: int) -> int:
    """Least j whose copy (i, j) is mapped into side ``k`` of ``gamma``."""
    side = set(gamma.side(k))
    for j in range(cfg.m):
        if cfg.v_var(sigma(cfg.slot(i, j))) in side:
            return j
    raise LiftError(f"no copy of variable {i} lands on side {k}")


def simulate_protocol_input(a: Assignment, sigma: AffinePerm, gamma: PartitionedSpace,
                            pi: PartitionedSpace, cfg: LiftConfig) -> Assignment:
    """Lifted input on which the lifted DNF agrees with the source DNF at ``a``.

    Selectors spell ``sigma``; the value of ``x_i`` goes to the image of its
    designated copy on the side of ``gamma`` matching the side of ``pi``
    holding ``x_i``; every other slot is 0.
    """
    if not lands(sigma, gamma, cfg):
        raise LiftError("sigma does not satisfy the landing condition for gamma")
    if tuple(pi.universe) != tuple(a.universe):
        raise LiftError("pi must partition the source universe")
    values = {v: 0 for v in cfg.lifted_universe()}
    for k, bit in enumerate(sigma.rep()):
        values[cfg.z_var(k)] = bit
    for i, x in enumerate(a.universe):
        k = pi.side_of(x)
        j = designated_copy(sigma, gamma, cfg, i, k)
        values[cfg.v_var(sigma(cfg.slot(i, j)))] = a.values[i]
    return Assignment.from_dict(cfg.lifted_universe(), values)


@dataclass(frozen=True)
class LiftResult:
    source: Dnf
    cfg: LiftConfig
    expanded: Dnf
    lifted: Dnf

    def stats(self):
        return {
            "source": {"n": self.cfg.n, "k": self.source.width, "terms": len(self.source)},
            "config": self.cfg.as_json(),
            "expanded": {"variables": len(self.expanded.universe), "terms": len(self.expanded)},
            "lifted": {"variables": len(self.lifted.universe), "terms": len(self.lifted)},
        }


def lift(psi: Dnf, c: int = DEFAULT_C) -> LiftResult:
    cfg = LiftConfig(len(psi.universe), c)
    vee = copy_expand(psi, cfg)
    return LiftResult(psi, cfg, vee, lift_dnf(psi, cfg, vee))
