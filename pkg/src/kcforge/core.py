"""Variables, assignments, explicit truth tables and unambiguous DNFs.

Variables are positive integers.  A universe is an ordered tuple of distinct
variables; assignments over a universe are ranked lexicographically with the
first universe variable as the most significant bit.  A :class:`FunTable`
stores the satisfying set as a Python integer used as a bitset over those
ranks, so equality of tables is plain integer equality.
"""

from __future__ import annotations

import os
import typing as t
from dataclasses import dataclass, field

VarId = int
Universe = t.Tuple[VarId, ...]

DEFAULT_GUARD = 20


class KcError(Exception):
    """Base class for errors raised by the toolkit."""


class GuardError(KcError):
    """A brute-force routine was asked to enumerate too many variables."""

    def __init__(self, name: str, needed: int, limit: int):
        self.name = name
        self.needed = needed
        self.limit = limit
        super().__init__(
            f"guard '{name}' exceeded: {needed} variables > limit {limit}"
        )


class UniverseMismatch(KcError):
    pass


class AmbiguousDnf(KcError):
    def __init__(self, witness: "AmbiguityWitness"):
        self.witness = witness
        super().__init__(f"DNF is ambiguous: {witness}")


def brute_force_guard() -> int:
    """Current variable limit for exhaustive enumerations (env KCFORGE_GUARD)."""
    value = os.environ.get("KCFORGE_GUARD")
    return int(value) if value else DEFAULT_GUARD


def check_guard(nvars: int, name: str = "brute-force", limit: int | None = None) -> None:
    limit = brute_force_guard() if limit is None else limit
    if nvars > limit:
        raise GuardError(name, nvars, limit)


def _check_universe(universe: t.Iterable[VarId]) -> Universe:
    universe = tuple(universe)
    if len(set(universe)) != len(universe):
        raise ValueError(f"repeated variable in universe {universe}")
    for v in universe:
        if not isinstance(v, int) or v <= 0:
            raise ValueError(f"variables must be positive integers, got {v!r}")
    return universe


@dataclass(frozen=True)
class Assignment:
    universe: Universe
    values: t.Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "universe", _check_universe(self.universe))
        object.__setattr__(self, "values", tuple(int(b) for b in self.values))
        if len(self.values) != len(self.universe):
            raise ValueError("assignment length differs from universe size")
        if any(b not in (0, 1) for b in self.values):
            raise ValueError("assignment values must be bits")

    @classmethod
    def from_rank(cls, universe: t.Sequence[VarId], rank: int) -> "Assignment":
        n = len(universe)
        return cls(tuple(universe), tuple((rank >> (n - 1 - i)) & 1 for i in range(n)))

    @classmethod
    def from_dict(cls, universe: t.Sequence[VarId], values: t.Mapping[VarId, int]) -> "Assignment":
        return cls(tuple(universe), tuple(values[v] for v in universe))

    @property
    def rank(self) -> int:
        r = 0
        for b in self.values:
            r = (r << 1) | b
        return r

    def __getitem__(self, var: VarId) -> int:
        return self.values[self.universe.index(var)]

    def as_dict(self) -> t.Dict[VarId, int]:
        return dict(zip(self.universe, self.values))


def var_mask(n: int, position: int) -> int:
    """Bitset of ranks (over ``n`` variables) where the variable at ``position`` is 1."""
    k = n - 1 - position
    width = 1 << (k + 1)
    pattern = ((1 << (1 << k)) - 1) << (1 << k)
    total = 1 << n
    while width < total:
        pattern |= pattern << width
        width <<= 1
    return pattern


class _Masks:
    """Per-universe cache of variable masks."""

    _cache: t.Dict[int, t.List[int]] = {}

    @classmethod
    def get(cls, n: int) -> t.List[int]:
        masks = cls._cache.get(n)
        if masks is None:
            masks = [var_mask(n, i) for i in range(n)]
            if n <= 16:
                cls._cache[n] = masks
        return masks


@dataclass(frozen=True)
class FunTable:
    """A Boolean function given by its satisfying set over an ordered universe."""

    universe: Universe
    bits: int = 0

    def __post_init__(self):
        object.__setattr__(self, "universe", _check_universe(self.universe))
        if self.bits < 0 or self.bits >> (1 << len(self.universe)):
            raise ValueError("satisfying set has ranks outside the universe")

    # constructors
    @classmethod
    def const(cls, universe: t.Sequence[VarId], value: bool) -> "FunTable":
        universe = tuple(universe)
        return cls(universe, cls.full_mask(len(universe)) if value else 0)

    @classmethod
    def literal(cls, universe: t.Sequence[VarId], var: VarId, positive: bool = True) -> "FunTable":
        universe = tuple(universe)
        if var not in universe:
            raise UniverseMismatch(f"variable {var} not in universe {universe}")
        mask = _Masks.get(len(universe))[universe.index(var)]
        return cls(universe, mask if positive else cls.full_mask(len(universe)) & ~mask)

    @classmethod
    def from_assignments(cls, universe: t.Sequence[VarId], sat: t.Iterable[Assignment]) -> "FunTable":
        universe = tuple(universe)
        bits = 0
        for a in sat:
            if a.universe != universe:
                raise UniverseMismatch("assignment over a different universe")
            bits |= 1 << a.rank
        return cls(universe, bits)

    @classmethod
    def from_predicate(cls, universe: t.Sequence[VarId], pred: t.Callable[[Assignment], t.Any]) -> "FunTable":
        universe = tuple(universe)
        check_guard(len(universe), "table")
        bits = 0
        for r in range(1 << len(universe)):
            if pred(Assignment.from_rank(universe, r)):
                bits |= 1 << r
        return cls(universe, bits)

    @staticmethod
    def full_mask(n: int) -> int:
        return (1 << (1 << n)) - 1

    # queries
    @property
    def nvars(self) -> int:
        return len(self.universe)

    def count(self) -> int:
        return bin(self.bits).count("1")

    def __len__(self) -> int:
        return self.count()

    def __call__(self, a: Assignment) -> int:
        if a.universe != self.universe:
            raise UniverseMismatch("assignment over a different universe")
        return (self.bits >> a.rank) & 1

    def ranks(self) -> t.Iterator[int]:
        bits = self.bits
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def sat(self) -> t.Iterator[Assignment]:
        for r in self.ranks():
            yield Assignment.from_rank(self.universe, r)

    def is_const(self) -> bool:
        return self.bits in (0, self.full_mask(self.nvars))

    # conditioning / domain handling
    def restrict(self, var: VarId, value: int) -> "FunTable":
        """Condition on ``var = value``; the result drops ``var`` from the universe."""
        pos = self._position(var)
        n = self.nvars
        rest = self.universe[:pos] + self.universe[pos + 1:]
        bits = 0
        for r in self.ranks():
            if (r >> (n - 1 - pos)) & 1 == value:
                bits |= 1 << _drop_bit(r, n - 1 - pos)
        return FunTable(rest, bits)

    def align(self, universe: t.Sequence[VarId]) -> "FunTable":
        """Re-express over ``universe``, which must contain every variable of ours.

        Variables absent from our universe are free in the result.
        """
        universe = tuple(universe)
        if universe == self.universe:
            return self
        missing = set(self.universe) - set(universe)
        if missing:
            raise UniverseMismatch(f"cannot drop variables {sorted(missing)}")
        check_guard(len(universe), "table")
        n, m = len(universe), self.nvars
        shifts = [n - 1 - universe.index(v) for v in self.universe]
        bits = 0
        for r in range(1 << n):
            sub = 0
            for s in shifts:
                sub = (sub << 1) | ((r >> s) & 1)
            if (self.bits >> sub) & 1:
                bits |= 1 << r
        return FunTable(universe, bits)

    def _position(self, var: VarId) -> int:
        try:
            return self.universe.index(var)
        except ValueError:
            raise UniverseMismatch(f"variable {var} not in universe {self.universe}") from None

    def __repr__(self):
        return f"FunTable(universe={self.universe}, models={self.count()})"


def _drop_bit(r: int, k: int) -> int:
    high = r >> (k + 1)
    low = r & ((1 << k) - 1)
    return (high << k) | low


def negate_fn(f: FunTable) -> FunTable:
    return FunTable(f.universe, FunTable.full_mask(f.nvars) & ~f.bits)


def exists_fn(f: FunTable, x: VarId) -> FunTable:
    """Project ``x`` away: the result is satisfied iff some value of ``x`` satisfies ``f``."""
    pos = f._position(x)
    n = f.nvars
    k = n - 1 - pos
    bits = 0
    for r in f.ranks():
        bits |= 1 << _drop_bit(r, k)
    return FunTable(f.universe[:pos] + f.universe[pos + 1:], bits)


def _same_universe(f: FunTable, g: FunTable) -> None:
    if f.universe != g.universe:
        raise UniverseMismatch(f"universes differ: {f.universe} vs {g.universe}")


def or_fn(f: FunTable, g: FunTable) -> FunTable:
    _same_universe(f, g)
    return FunTable(f.universe, f.bits | g.bits)


def and_fn(f: FunTable, g: FunTable) -> FunTable:
    _same_universe(f, g)
    return FunTable(f.universe, f.bits & g.bits)


# ---------------------------------------------------------------------------
# terms and DNFs


@dataclass(frozen=True, order=True)
class Term:
    """A conjunction of literals, stored as two bitsets indexed by variable id."""

    pos: int = 0
    neg: int = 0

    def __post_init__(self):
        if self.pos & self.neg:
            raise ValueError("inconsistent term: a variable occurs with both polarities")
        if (self.pos | self.neg) & 1:
            raise ValueError("variable ids start at 1")

    @classmethod
    def of(cls, literals: t.Iterable[int]) -> "Term":
        """Build from signed integers, DIMACS style (``-3`` is the literal not-x3)."""
        pos = neg = 0
        for lit in literals:
            if lit == 0:
                raise ValueError("0 is not a literal")
            if lit > 0:
                pos |= 1 << lit
            else:
                neg |= 1 << -lit
        return cls(pos, neg)

    @property
    def mask(self) -> int:
        return self.pos | self.neg

    def variables(self) -> t.FrozenSet[VarId]:
        return frozenset(_bits(self.mask))

    @property
    def literals(self) -> t.FrozenSet[t.Tuple[VarId, bool]]:
        return frozenset([(v, True) for v in _bits(self.pos)] + [(v, False) for v in _bits(self.neg)])

    def signed(self) -> t.List[int]:
        """Literals as signed integers sorted by variable."""
        return sorted([v for v in _bits(self.pos)] + [-v for v in _bits(self.neg)], key=abs)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def clashes(self, other: "Term") -> bool:
        """True if no assignment satisfies both terms."""
        return bool((self.pos & other.neg) | (self.neg & other.pos))

    def satisfied_by(self, a: Assignment) -> bool:
        values = a.as_dict()
        return all(values[v] == 1 for v in _bits(self.pos)) and all(values[v] == 0 for v in _bits(self.neg))

    def __str__(self):
        if not self.mask:
            return "T"
        return " & ".join(f"x{v}" if v > 0 else f"~x{-v}" for v in self.signed())


def _bits(mask: int) -> t.Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class AmbiguityWitness:
    first: int
    second: int
    assignment: Assignment | None = None

    def __str__(self):
        s = f"terms {self.first} and {self.second} overlap"
        if self.assignment is not None:
            s += f" at {self.assignment.as_dict()}"
        return s


@dataclass(frozen=True)
class Dnf:
    universe: Universe
    terms: t.Tuple[Term, ...]
    # Index of the term each term was derived from, when produced by a construction.
    origin: t.Optional[t.Tuple[t.Any, ...]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "universe", _check_universe(self.universe))
        object.__setattr__(self, "terms", tuple(self.terms))
        allowed = 0
        for v in self.universe:
            allowed |= 1 << v
        for term in self.terms:
            if term.mask & ~allowed:
                raise ValueError(f"term {term} uses variables outside the universe")

    @classmethod
    def of(cls, universe: t.Iterable[VarId], terms: t.Iterable[t.Iterable[int]]) -> "Dnf":
        return cls(tuple(universe), tuple(Term.of(lits) for lits in terms))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def width(self) -> int:
        """Largest term length (the k of a k-DNF)."""
        return max((len(term) for term in self.terms), default=0)

    def variables(self) -> t.FrozenSet[VarId]:
        mask = 0
        for term in self.terms:
            mask |= term.mask
        return frozenset(_bits(mask))

    def __str__(self):
        if not self.terms:
            return "F"
        return " | ".join(f"({term})" for term in self.terms)


def term_table(term: Term, universe: Universe) -> int:
    """Bitset of ranks over ``universe`` satisfying ``term``."""
    n = len(universe)
    masks = _Masks.get(n)
    full = FunTable.full_mask(n)
    bits = full
    index = {v: i for i, v in enumerate(universe)}
    for v in _bits(term.pos):
        bits &= masks[index[v]]
    for v in _bits(term.neg):
        bits &= full ^ masks[index[v]]
    return bits


def dnf_to_fn(d: Dnf, guard: int | None = None) -> FunTable:
    check_guard(len(d.universe), "dnf-table", guard)
    bits = 0
    for term in d.terms:
        bits |= term_table(term, d.universe)
    return FunTable(d.universe, bits)


def find_overlap(d: Dnf, method: str = "pairwise") -> AmbiguityWitness | None:
    """Return a pair of jointly satisfiable terms, or ``None`` if ``d`` is unambiguous.

    ``pairwise`` decides the clash relation between terms; two terms overlap
    iff no variable occurs in both with opposite signs.  Instead of testing all
    pairs it splits the term list on one variable at a time: terms with
    opposite signs on the split variable always clash, so only the two halves
    (each joined with the terms not mentioning the variable) need checking.
    ``naive`` tests every pair.  ``bruteforce`` enumerates all assignments and
    is exponential in the universe size.
    """
    if method == "pairwise":
        return _overlap_split(d)
    if method == "naive":
        terms = d.terms
        for i in range(len(terms)):
            for j in range(i + 1, len(terms)):
                if not terms[i].clashes(terms[j]):
                    return AmbiguityWitness(i, j)
        return None
    if method == "bruteforce":
        return _overlap_bruteforce(d)
    raise ValueError(f"unknown method {method!r}")


def _overlap_split(d: Dnf) -> AmbiguityWitness | None:
    terms = d.terms
    stack = [(list(range(len(terms))), 0)]
    while stack:
        group, done = stack.pop()
        if len(group) < 2:
            continue
        mention = 0
        common = -1
        for i in group:
            rest = terms[i].mask & ~done
            if not rest:
                # consistent with everything else left in the group
                j = group[0] if group[0] != i else group[1]
                return AmbiguityWitness(min(i, j), max(i, j))
            mention |= rest
            common &= rest
        if common:
            # every term fixes these variables: only equal sign patterns can overlap
            buckets: t.Dict[int, t.List[int]] = {}
            for i in group:
                buckets.setdefault(terms[i].pos & common, []).append(i)
            done |= common
            for bucket in buckets.values():
                stack.append((bucket, done))
            continue
        v = mention & -mention
        plus, minus, both = [], [], []
        for i in group:
            if terms[i].pos & v:
                plus.append(i)
            elif terms[i].neg & v:
                minus.append(i)
            else:
                both.append(i)
        done |= v
        if not both:
            stack.append((plus, done))
            stack.append((minus, done))
        else:
            stack.append((sorted(plus + both), done))
            stack.append((sorted(minus + both), done))
    return None


def _overlap_bruteforce(d: Dnf) -> AmbiguityWitness | None:
    check_guard(len(d.universe), "unambiguity-bruteforce")
    once = twice = 0
    tables = []
    for term in d.terms:
        bits = term_table(term, d.universe)
        tables.append(bits)
        twice |= once & bits
        once |= bits
    if not twice:
        return None
    rank = (twice & -twice).bit_length() - 1
    hits = [i for i, bits in enumerate(tables) if (bits >> rank) & 1]
    return AmbiguityWitness(hits[0], hits[1], Assignment.from_rank(d.universe, rank))


def is_unambiguous(d: Dnf, method: str = "pairwise") -> bool:
    return find_overlap(d, method) is None


def overlap_assignment(d: Dnf, w: AmbiguityWitness) -> Assignment:
    """An assignment over ``d.universe`` satisfying both terms of a witness."""
    a, b = d.terms[w.first], d.terms[w.second]
    pos = a.pos | b.pos
    return Assignment(d.universe, tuple(1 if (pos >> v) & 1 else 0 for v in d.universe))


def require_unambiguous(d: Dnf) -> None:
    w = find_overlap(d)
    if w is not None:
        w = AmbiguityWitness(w.first, w.second, overlap_assignment(d, w))
        raise AmbiguousDnf(w)
