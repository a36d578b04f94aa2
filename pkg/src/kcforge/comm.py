"""Balanced partitions, rectangles, and exact cover / partition numbers.

Under a partition ``(X, Y)`` a function is viewed as a 0/1 matrix with rows
indexed by assignments to ``X`` and columns by assignments to ``Y`` (ranks
taken in universe order).  Inside the solvers a set of matrix cells is a
Python int with cell ``(row, col)`` at bit ``row * ncols + col``.
"""

from __future__ import annotations

import itertools
import json
import math
import typing as t
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import (
    Dnf,
    FunTable,
    KcError,
    Universe,
    VarId,
    _check_universe,
    check_guard,
    find_overlap,
)
from .nnf import Check, Circuit, mask_vars, node_tables
from .vtree import VTree, VTreeError, respects

COMM_GUARD = 12


class PartitionError(KcError):
    pass


class UndefinedMeasure(KcError):
    """log2 of a zero rectangle count."""


def comm_guard(nvars: int) -> None:
    import os

    limit = int(os.environ.get("KCFORGE_GUARD") or 0) or COMM_GUARD
    check_guard(nvars, "comm", limit)


@dataclass(frozen=True)
class PartitionedSpace:
    """A balanced bipartition (sideX, sideY) of an ordered universe."""

    universe: Universe
    sideX: t.Tuple[VarId, ...]
    sideY: t.Tuple[VarId, ...]

    def __post_init__(self):
        universe = _check_universe(self.universe)
        xs, ys = set(self.sideX), set(self.sideY)
        if xs & ys:
            raise PartitionError("sides overlap")
        if (xs | ys) != set(universe) or len(xs) + len(ys) != len(universe):
            raise PartitionError("sides do not cover the universe exactly")
        # keep both sides in universe order
        object.__setattr__(self, "universe", universe)
        object.__setattr__(self, "sideX", tuple(v for v in universe if v in xs))
        object.__setattr__(self, "sideY", tuple(v for v in universe if v in ys))
        if 3 * min(len(xs), len(ys)) < len(universe):
            raise PartitionError(
                f"unbalanced partition {len(xs)}/{len(ys)} of {len(universe)} variables")

    @classmethod
    def from_side(cls, universe: t.Sequence[VarId], side_x: t.Iterable[VarId]) -> "PartitionedSpace":
        side_x = set(side_x)
        return cls(tuple(universe), tuple(v for v in universe if v in side_x),
                   tuple(v for v in universe if v not in side_x))

    def side(self, k: int) -> t.Tuple[VarId, ...]:
        return self.sideX if k == 0 else self.sideY

    def side_of(self, v: VarId) -> int:
        if v in self.sideX:
            return 0
        if v in self.sideY:
            return 1
        raise PartitionError(f"variable {v} not in the universe")

    def swapped(self) -> "PartitionedSpace":
        return PartitionedSpace(self.universe, self.sideY, self.sideX)

    @cached_property
    def _shifts(self):
        n = len(self.universe)
        pos = {v: i for i, v in enumerate(self.universe)}
        return ([n - 1 - pos[v] for v in self.sideX], [n - 1 - pos[v] for v in self.sideY])

    @cached_property
    def x_contrib(self) -> t.Tuple[int, ...]:
        """Full-universe rank contribution of every X-side rank."""
        return _contrib(self._shifts[0])

    @cached_property
    def y_contrib(self) -> t.Tuple[int, ...]:
        return _contrib(self._shifts[1])

    def split_rank(self, rank: int) -> t.Tuple[int, int]:
        xs, ys = self._shifts
        xr = yr = 0
        for s in xs:
            xr = (xr << 1) | ((rank >> s) & 1)
        for s in ys:
            yr = (yr << 1) | ((rank >> s) & 1)
        return xr, yr

    def join_rank(self, xr: int, yr: int) -> int:
        return self.x_contrib[xr] | self.y_contrib[yr]

    def as_json(self):
        return {"X": list(self.sideX), "Y": list(self.sideY)}


def _contrib(shifts: t.Sequence[int]) -> t.Tuple[int, ...]:
    k = len(shifts)
    out = []
    for r in range(1 << k):
        full = 0
        for i, s in enumerate(shifts):
            if (r >> (k - 1 - i)) & 1:
                full |= 1 << s
        out.append(full)
    return tuple(out)


def balanced_partitions(universe: t.Sequence[VarId], ordered: bool = False) -> t.Iterator[PartitionedSpace]:
    """Balanced bipartitions in canonical order.

    Unordered mode lists each partition once, with X the smaller side, or the
    side holding the first universe variable on ties.  Ordered mode lists both
    orientations.
    """
    universe = tuple(universe)
    n = len(universe)
    lo = math.ceil(n / 3)
    hi = n - lo if ordered else n // 2
    for size in range(max(lo, 1), hi + 1):
        for xs in itertools.combinations(universe, size):
            if not ordered and 2 * size == n and universe[0] not in xs:
                continue
            yield PartitionedSpace.from_side(universe, xs)


@dataclass(frozen=True)
class Rectangle:
    partition: PartitionedSpace
    A: t.FrozenSet[int]
    B: t.FrozenSet[int]

    def __contains__(self, rank: int) -> bool:
        xr, yr = self.partition.split_rank(rank)
        return xr in self.A and yr in self.B

    def ranks(self) -> int:
        """The rectangle as a bitset over full-universe ranks."""
        p = self.partition
        bits = 0
        ys = [p.y_contrib[b] for b in self.B]
        for a in self.A:
            xa = p.x_contrib[a]
            for y in ys:
                bits |= 1 << (xa | y)
        return bits

    def __len__(self):
        return len(self.A) * len(self.B)


@dataclass(frozen=True)
class CoverCertificate:
    partition: PartitionedSpace
    rectangles: t.Tuple[Rectangle, ...]
    bit: int
    mode: str  # "cover" or "partition"

    def __len__(self):
        return len(self.rectangles)

    def union(self) -> int:
        bits = 0
        for r in self.rectangles:
            bits |= r.ranks()
        return bits

    def validate(self, f: FunTable | None = None, target: int | None = None) -> Check:
        """Union equals the target level set and, in partition mode, rectangles are disjoint."""
        if target is None:
            if f is None:
                raise ValueError("need a function or a target set")
            if set(f.universe) != set(self.partition.universe):
                return Check(False, None, "function and partition have different variables")
            f = f.align(self.partition.universe)
            target = f.bits if self.bit else FunTable.full_mask(f.nvars) & ~f.bits
        nx, ny = 1 << len(self.partition.sideX), 1 << len(self.partition.sideY)
        seen = 0
        for i, r in enumerate(self.rectangles):
            if r.partition != self.partition:
                return Check(False, i, f"rectangle {i} is over a different partition")
            if not r.A or not r.B:
                return Check(False, i, f"rectangle {i} is empty")
            if any(not 0 <= a < nx for a in r.A) or any(not 0 <= b < ny for b in r.B):
                return Check(False, i, f"rectangle {i} has ranks out of range")
            bits = r.ranks()
            if bits & ~target:
                return Check(False, i, f"rectangle {i} leaves the target set")
            if self.mode == "partition" and bits & seen:
                return Check(False, i, f"rectangle {i} overlaps an earlier rectangle")
            seen |= bits
        if seen != target:
            return Check(False, None, "rectangles do not cover the target set")
        return Check(True)

    def as_json(self, valid: bool | None = None):
        out = {
            "partition": self.partition.as_json(),
            "bit": self.bit,
            "mode": self.mode,
            "rectangles": [{"A": sorted(r.A), "B": sorted(r.B)} for r in self.rectangles],
        }
        if valid is not None:
            out["valid"] = valid
        return out

    def dumps(self, valid: bool | None = None) -> str:
        return json.dumps(self.as_json(valid), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, data, universe: t.Sequence[VarId]) -> "CoverCertificate":
        p = PartitionedSpace(tuple(universe), tuple(data["partition"]["X"]), tuple(data["partition"]["Y"]))
        rects = tuple(Rectangle(p, frozenset(r["A"]), frozenset(r["B"])) for r in data["rectangles"])
        return cls(p, rects, data["bit"], data["mode"])


# ---------------------------------------------------------------------------
# matrix view and exact solvers


def level_set(f: FunTable, b: int) -> int:
    return f.bits if b else FunTable.full_mask(f.nvars) & ~f.bits


def matrix_rows(f: FunTable, pi: PartitionedSpace, b: int) -> t.List[int]:
    """Row r is the bitmask of columns c with f(r, c) == b."""
    if pi.universe != f.universe:
        raise PartitionError("partition universe differs from the function universe")
    target = level_set(f, b)
    xc, yc = pi.x_contrib, pi.y_contrib
    rows = []
    for x in xc:
        m = 0
        for c, y in enumerate(yc):
            if (target >> (x | y)) & 1:
                m |= 1 << c
        rows.append(m)
    return rows


def _cells(rows: t.Sequence[int], ncols: int) -> int:
    out = 0
    for r, m in enumerate(rows):
        out |= m << (r * ncols)
    return out


def _rect_cells(rowmask: int, colmask: int, ncols: int) -> int:
    out = 0
    for r in _iter_bits(rowmask):
        out |= colmask << (r * ncols)
    return out


def _iter_bits(m: int) -> t.Iterator[int]:
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


def _popcount(m: int) -> int:
    return bin(m).count("1")


def maximal_rectangles(rows: t.Sequence[int]) -> t.List[t.Tuple[int, int]]:
    """All maximal all-ones rectangles as (row mask, column mask) pairs.

    Column sets of maximal rectangles are exactly the nonempty intersections
    of row sets; the row set is then every row containing it.
    """
    closed: t.Set[int] = set()
    for m in rows:
        if not m:
            continue
        new = {m}
        for c in closed:
            x = c & m
            if x:
                new.add(x)
        closed |= new
    out = []
    for cols in sorted(closed):
        rmask = 0
        for r, m in enumerate(rows):
            if m & cols == cols:
                rmask |= 1 << r
        out.append((rmask, cols))
    return out


def _fooling_bound(cells: int, region: int, ncols: int, order: t.Sequence[int] | None = None) -> int:
    """Size of a greedy set of cells, no two of which fit in one rectangle inside ``region``.

    ``order`` fixes the greedy scan order (cells outside ``cells`` are skipped).
    """
    chosen: t.List[t.Tuple[int, int]] = []
    scan = _iter_bits(cells) if order is None else (c for c in order if (cells >> c) & 1)
    for cell in scan:
        r, c = divmod(cell, ncols)
        for r2, c2 in chosen:
            if (region >> (r * ncols + c2)) & 1 and (region >> (r2 * ncols + c)) & 1:
                break
        else:
            chosen.append((r, c))
    return len(chosen)


_PRIME = 1_000_003


def _rank_lb(rows: t.Sequence[int], ncols: int) -> int:
    """Rank of the 0/1 matrix over GF(p).

    Never exceeds the rational rank, which in turn bounds the number of
    disjoint rectangles summing to the matrix.
    """
    rows = [m for m in rows if m]
    if len(rows) <= 1:
        return len(rows)
    a = np.array([[(m >> c) & 1 for c in range(ncols)] for m in rows], dtype=np.int64)
    rank, nr = 0, a.shape[0]
    for c in range(ncols):
        piv = np.flatnonzero(a[rank:, c])
        if not piv.size:
            continue
        i = rank + int(piv[0])
        if i != rank:
            a[[rank, i]] = a[[i, rank]]
        a[rank] = a[rank] * pow(int(a[rank, c]), _PRIME - 2, _PRIME) % _PRIME
        col = a[rank + 1:, c].copy()
        a[rank + 1:] = (a[rank + 1:] - col[:, None] * a[rank]) % _PRIME
        rank += 1
        if rank == nr:
            break
    return rank


@dataclass
class _Block:
    """A connected piece of the matrix with duplicate rows and columns merged.

    ``row_groups[i]`` / ``col_groups[j]`` are masks of the original indices
    folded into local row ``i`` / column ``j``.  Merging identical lines and
    splitting into components changes neither cover nor partition numbers.
    """

    rows: t.List[int]
    ncols: int
    row_groups: t.List[int]
    col_groups: t.List[int]

    def lift(self, a: int, c: int) -> t.Tuple[int, int]:
        ra = 0
        for i in _iter_bits(a):
            ra |= self.row_groups[i]
        rc = 0
        for j in _iter_bits(c):
            rc |= self.col_groups[j]
        return ra, rc


def _blocks(rows: t.Sequence[int], ncols: int) -> t.List[_Block]:
    groups: t.Dict[int, int] = {}
    for r, m in enumerate(rows):
        if m:
            groups[m] = groups.get(m, 0) | (1 << r)
    urows = list(groups)
    # components over the distinct rows, joined through shared columns
    owner = list(range(len(urows)))

    def find(i):
        while owner[i] != i:
            owner[i] = owner[owner[i]]
            i = owner[i]
        return i

    first_row: t.Dict[int, int] = {}
    for i, m in enumerate(urows):
        for c in _iter_bits(m):
            j = first_row.setdefault(c, i)
            owner[find(i)] = find(j)
    comps: t.Dict[int, t.List[int]] = {}
    for i in range(len(urows)):
        comps.setdefault(find(i), []).append(i)
    out = []
    for members in comps.values():
        cols: t.Dict[int, int] = {}
        for c in range(ncols):
            vec = 0
            for k, i in enumerate(members):
                if (urows[i] >> c) & 1:
                    vec |= 1 << k
            if vec:
                cols[vec] = cols.get(vec, 0) | (1 << c)
        colvecs = list(cols)
        local = []
        for k in range(len(members)):
            m = 0
            for j, vec in enumerate(colvecs):
                if (vec >> k) & 1:
                    m |= 1 << j
            local.append(m)
        out.append(_Block(local, len(colvecs), [groups[urows[i]] for i in members], list(cols.values())))
    return out


class _Incumbent:
    """Best solution so far; searches only look for strictly smaller ones."""

    def __init__(self, start: t.List | None, bound: int | None):
        if start is not None and (bound is None or len(start) < bound):
            self.best, self.limit = list(start), len(start)
        else:
            self.best, self.limit = None, bound

    def offer(self, sol: t.List) -> None:
        if self.limit is None or len(sol) < self.limit:
            self.best, self.limit = list(sol), len(sol)


def _cover_search(rows: t.Sequence[int], ncols: int, bound: int | None) -> t.List[t.Tuple[int, int]] | None:
    """Minimum cover by maximal rectangles, or None if none has fewer than ``bound`` rectangles.

    Restricting to maximal rectangles loses nothing: any cover can swap each
    rectangle for a maximal one containing it.
    """
    target = _cells(rows, ncols)
    if not target:
        return []
    rects = maximal_rectangles(rows)
    rcells = [_rect_cells(a, b, ncols) for a, b in rects]
    covering: t.Dict[int, t.List[int]] = {}
    for i, cells in enumerate(rcells):
        for cell in _iter_bits(cells):
            covering.setdefault(cell, []).append(i)
    inc = _Incumbent(_greedy_cover(target, rcells), bound)
    # cells lying in few maximal rectangles make the best fooling-set seeds
    hard_first = sorted(covering, key=lambda c: len(covering[c]))
    seen: t.Dict[int, int] = {}

    def rec(unc: int, chosen: t.List[int]):
        if not unc:
            inc.offer(chosen)
            return
        depth = len(chosen)
        if depth + 1 >= inc.limit:
            # only a single rectangle finishing the job can improve
            for i in covering[(unc & -unc).bit_length() - 1]:
                if rcells[i] & unc == unc:
                    inc.offer(chosen + [i])
                    return
            return
        prev = seen.get(unc)
        if prev is not None and prev <= depth:
            return
        seen[unc] = depth
        biggest = max(_popcount(rc & unc) for rc in rcells)
        lb = -(-_popcount(unc) // biggest)
        if depth + lb < inc.limit:
            lb = max(lb, _fooling_bound(unc, target, ncols, hard_first))
        if depth + lb < inc.limit:
            lb = max(lb, _fooling_bound(unc, target, ncols))
        if depth + lb >= inc.limit:
            return
        options = None
        for cell in _iter_bits(unc):
            opts = covering[cell]
            if options is None or len(opts) < len(options):
                options = opts
                if len(opts) == 1:
                    break
        for i in sorted(options, key=lambda i: -_popcount(rcells[i] & unc)):
            chosen.append(i)
            rec(unc & ~rcells[i], chosen)
            chosen.pop()
            if depth + 1 >= inc.limit:
                break

    if inc.limit is None or inc.limit > 0:
        rec(target, [])
    if inc.best is None:
        return None
    return [rects[i] for i in inc.best]


def _greedy_cover(target: int, rcells: t.Sequence[int]) -> t.List[int]:
    unc = target
    out = []
    while unc:
        i = max(range(len(rcells)), key=lambda i: _popcount(rcells[i] & unc))
        out.append(i)
        unc &= ~rcells[i]
    return out


def _greedy_partition(rows: t.Sequence[int]) -> t.List[t.Tuple[int, int]]:
    rem = list(rows)
    out = []
    while any(rem):
        a, b = max(maximal_rectangles(rem), key=lambda ab: _popcount(ab[0]) * _popcount(ab[1]))
        out.append((a, b))
        for r in _iter_bits(a):
            rem[r] &= ~b
    return out


def _partition_search(rows: t.Sequence[int], ncols: int, bound: int | None,
                      start: t.List[t.Tuple[int, int]] | None = None) -> t.List[t.Tuple[int, int]] | None:
    """Minimum partition into rectangles, or None if none has fewer than ``bound`` parts.

    Always extends the first uncovered cell in row-major order, so every
    partition is generated once; candidates are all rectangles inside the
    uncovered region containing that cell.
    """
    nrows = len(rows)
    target = _cells(rows, ncols)
    if not target:
        return []
    seeds = [
        _greedy_partition(rows),
        [(1 << r, m) for r, m in enumerate(rows) if m],
        _column_partition(rows, ncols),
    ] + ([list(start)] if start is not None else [])
    inc = _Incumbent(min(seeds, key=len), bound)
    seen: t.Dict[int, int] = {}
    colfull = (1 << ncols) - 1

    def region_rows(unc: int) -> t.List[int]:
        return [(unc >> (r * ncols)) & colfull for r in range(nrows)]

    def candidates(rem: t.List[int], r0: int, c0: int):
        out = []
        free = rem[r0] & ~(1 << c0)
        for extra in _submasks(free):
            cols = extra | (1 << c0)
            others = 0
            for r in range(r0 + 1, nrows):
                if rem[r] & cols == cols:
                    others |= 1 << r
            for more in _submasks(others):
                out.append(((1 << r0) | more, cols))
        out.sort(key=lambda ab: -_popcount(ab[0]) * _popcount(ab[1]))
        return out

    def rec(unc: int, chosen: t.List[t.Tuple[int, int]]):
        if not unc:
            inc.offer(chosen)
            return
        depth = len(chosen)
        rem = region_rows(unc)
        if depth + 1 >= inc.limit:
            # only a single rectangle finishing the job can improve
            live = [r for r in range(nrows) if rem[r]]
            if all(rem[r] == rem[live[0]] for r in live):
                inc.offer(chosen + [(sum(1 << r for r in live), rem[live[0]])])
            return
        prev = seen.get(unc)
        if prev is not None and prev <= depth:
            return
        seen[unc] = depth
        biggest = max(_popcount(a) * _popcount(b) for a, b in maximal_rectangles(rem))
        lb = -(-_popcount(unc) // biggest)
        if depth + lb < inc.limit:
            lb = max(lb, _fooling_bound(unc, unc, ncols))
        if depth + lb < inc.limit:
            lb = max(lb, _rank_lb(rem, ncols))
        if depth + lb >= inc.limit:
            return
        first = (unc & -unc).bit_length() - 1
        r0, c0 = divmod(first, ncols)
        for a, b in candidates(rem, r0, c0):
            chosen.append((a, b))
            rec(unc & ~_rect_cells(a, b, ncols), chosen)
            chosen.pop()
            if depth + 1 >= inc.limit:
                break

    if inc.limit is None or inc.limit > 0:
        rec(target, [])
    return inc.best


def _column_partition(rows: t.Sequence[int], ncols: int) -> t.List[t.Tuple[int, int]]:
    out = []
    for c in range(ncols):
        a = sum(1 << r for r, m in enumerate(rows) if (m >> c) & 1)
        if a:
            out.append((a, 1 << c))
    return out


def _submasks(m: int) -> t.Iterator[int]:
    """All submasks of ``m``, largest first."""
    s = m
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & m


def _certificate(pi: PartitionedSpace, rects, b: int, mode: str) -> CoverCertificate:
    return CoverCertificate(
        pi,
        tuple(Rectangle(pi, frozenset(_iter_bits(a)), frozenset(_iter_bits(c))) for a, c in rects),
        b,
        mode,
    )


def _search_blocks(rows: t.Sequence[int], ncols: int, mode: str, bound: int | None):
    """Solve block by block; None if the total cannot beat ``bound``."""
    blocks = _blocks(rows, ncols)
    out: t.List[t.Tuple[int, int]] = []
    for k, blk in enumerate(blocks):
        # every later block needs at least one rectangle
        sub = None if bound is None else bound - len(out) - (len(blocks) - 1 - k)
        if sub is not None and sub <= 0:
            return None
        if mode == "cover":
            rects = _cover_search(blk.rows, blk.ncols, sub)
        else:
            rects = _partition_search(blk.rows, blk.ncols, sub)
        if rects is None:
            return None
        out.extend(blk.lift(a, c) for a, c in rects)
    return out


def _solve(f: FunTable, pi: PartitionedSpace, b: int, mode: str, bound: int | None = None,
           start: CoverCertificate | None = None):
    comm_guard(f.nvars)
    if b not in (0, 1):
        raise ValueError("b must be a bit")
    rows = matrix_rows(f, pi, b)
    ncols = 1 << len(pi.sideY)
    seed = None
    if mode == "partition" and start is not None and start.mode == "partition" and start.validate(f):
        seed = [(sum(1 << x for x in r.A), sum(1 << y for y in r.B)) for r in start.rectangles if r.A and r.B]
        if bound is None or len(seed) < bound:
            bound = len(seed)
        else:
            seed = None
    rects = _search_blocks(rows, ncols, mode, bound)
    if rects is None:
        if seed is None:
            return None
        rects = seed
    cert = _certificate(pi, rects, b, mode)
    verdict = cert.validate(f)
    assert verdict, verdict.reason
    return len(rects), cert


def cov_number(f: FunTable, pi: PartitionedSpace, b: int) -> t.Tuple[int, CoverCertificate]:
    """Exact minimum number of pi-rectangles covering f^-1(b)."""
    return _solve(f, pi, b, "cover")


def par_number(f: FunTable, pi: PartitionedSpace, b: int,
               start: CoverCertificate | None = None) -> t.Tuple[int, CoverCertificate]:
    """Exact minimum number of disjoint pi-rectangles partitioning f^-1(b).

    ``start`` may carry a known partition (e.g. from an unambiguous DNF) to
    seed the upper bound.
    """
    return _solve(f, pi, b, "partition", start=start)


def _best(f: FunTable, b: int, mode: str, jobs: int = 1):
    comm_guard(f.nvars)
    parts = list(balanced_partitions(f.universe))
    if not parts:
        raise PartitionError(f"no balanced partition of {f.nvars} variables")
    if jobs > 1 and len(parts) > 1:
        return _best_parallel(f, b, mode, parts, jobs)
    floor = 1 if level_set(f, b) else 0
    best = None
    for pi in parts:
        bound = None if best is None else best[0]
        res = _solve(f, pi, b, mode, bound)
        if res is not None and (best is None or res[0] < best[0]):
            best = (res[0], pi, res[1])
            if best[0] <= floor:
                break
    return best


def _solve_one(args):
    f, b, mode, pi = args
    n, cert = _solve(f, pi, b, mode)
    return n, cert


def _best_parallel(f, b, mode, parts, jobs):
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(_solve_one, [(f, b, mode, pi) for pi in parts]))
    # reduce by (value, canonical partition rank)
    k = min(range(len(parts)), key=lambda i: (results[i][0], i))
    return results[k][0], parts[k], results[k][1]


def best_cov(f: FunTable, b: int, jobs: int = 1) -> t.Tuple[int, PartitionedSpace, CoverCertificate]:
    """Minimum cover number over all balanced partitions (first partition wins ties)."""
    return _best(f, b, "cover", jobs)


def best_par(f: FunTable, b: int, jobs: int = 1) -> t.Tuple[int, PartitionedSpace, CoverCertificate]:
    return _best(f, b, "partition", jobs)


def ncc_measure(f: FunTable, pi: PartitionedSpace, b: int) -> float:
    n, _ = cov_number(f, pi, b)
    return log_measure(n)


def ucc_measure(f: FunTable, pi: PartitionedSpace, b: int) -> float:
    n, _ = par_number(f, pi, b)
    return log_measure(n)


def log_measure(count: int) -> float:
    if count < 1:
        raise UndefinedMeasure("log2 of an empty rectangle family is undefined")
    return math.log2(count)


# ---------------------------------------------------------------------------
# constructive certificates


def dnf_rectangles(d: Dnf, pi: PartitionedSpace) -> CoverCertificate:
    """One rectangle per satisfiable term; a partition when the DNF is unambiguous."""
    if tuple(pi.universe) != tuple(d.universe):
        raise PartitionError("partition universe differs from the DNF universe")
    rects = []
    for term in d.terms:
        A = frozenset(r for r in range(1 << len(pi.sideX)) if _side_ok(term, pi.sideX, r))
        B = frozenset(r for r in range(1 << len(pi.sideY)) if _side_ok(term, pi.sideY, r))
        rects.append(Rectangle(pi, A, B))
    mode = "partition" if find_overlap(d) is None else "cover"
    return CoverCertificate(pi, tuple(rects), 1, mode)


def _side_ok(term, side: t.Sequence[VarId], rank: int) -> bool:
    k = len(side)
    for i, v in enumerate(side):
        bit = (rank >> (k - 1 - i)) & 1
        if (term.pos >> v) & 1 and not bit:
            return False
        if (term.neg >> v) & 1 and bit:
            return False
    return True


def balanced_vtree_node(t_: VTree) -> int:
    """Descend towards the larger child until the span is at most 2/3 of the leaves."""
    n = len(t_.leaves)
    i = t_.root
    size = lambda j: _popcount(t_.masks[j])
    while 3 * size(i) > 2 * n:
        if t_.is_leaf(i):
            raise VTreeError("v-tree has no balanced node")
        l, r = t_.left(i), t_.right(i)
        i = l if size(l) >= size(r) else r
    if 3 * size(i) < n:
        raise VTreeError("v-tree has no balanced node")
    return i


def extract_rectangles(c: Circuit, t_: VTree) -> CoverCertificate:
    """Rectangles covering sat(C) for a circuit respecting the v-tree.

    X is the span of a balanced v-tree node.  Every accepting proof tree
    reaches X-variables through a single path of nodes whose variables
    straddle X; the first node on it whose variables lie inside X keys the
    rectangle (models of that node) x (Y-contexts reaching it).  Proof trees
    that never touch X form one extra rectangle.  With determinism every
    model has one proof tree, so the rectangles are disjoint.
    """
    verdict = respects(c, t_)
    if not verdict:
        raise VTreeError(f"circuit does not respect the v-tree: {verdict.reason}")
    universe = tuple(c.dom)
    if set(universe) != set(t_.leaves):
        raise VTreeError("dom(C) must equal the v-tree leaves")
    comm_guard(len(universe))
    star = balanced_vtree_node(t_)
    xmask = t_.masks[star]
    pi = PartitionedSpace.from_side(universe, mask_vars(xmask))
    tab = node_tables(c)
    vm = c.var_masks
    full = FunTable.full_mask(len(universe))

    def kind(i):
        m = vm[i]
        if not m & xmask:
            return "none"
        return "inside" if not m & ~xmask else "mixed"

    ctx: t.Dict[int, int] = {c.root: full}
    keys: t.Dict[int, int] = {}
    absent = 0
    root_kind = kind(c.root)
    if root_kind == "none":
        absent = tab[c.root]
    elif root_kind == "inside":
        keys[c.root] = full
    else:
        for i in reversed(c.order):  # parents before children
            if i not in ctx or kind(i) != "mixed":
                continue
            node = c.nodes[i]
            here = ctx[i]
            if node[0] == "A":
                l, r = node[1], node[2]
                child, sib = (l, r) if vm[l] & xmask else (r, l)
                pushed = [(child, here & tab[sib])]
            else:
                pushed = [(node[1], here), (node[2], here)]
            for ch, cx in pushed:
                k = kind(ch)
                if k == "none":
                    absent |= cx & tab[ch]
                elif k == "inside":
                    keys[ch] = keys.get(ch, 0) | cx
                else:
                    ctx[ch] = ctx.get(ch, 0) | cx

    nx, ny = 1 << len(pi.sideX), 1 << len(pi.sideY)
    rects = []
    for g in sorted(keys):
        A = frozenset(a for a in range(nx) if (tab[g] >> pi.x_contrib[a]) & 1)
        # contexts depend on Y only, so reading them at x = 0 suffices
        B = frozenset(b for b in range(ny) if (keys[g] >> pi.y_contrib[b]) & 1)
        if A and B:
            rects.append(Rectangle(pi, A, B))
    if absent:
        B = frozenset(b for b in range(ny) if (absent >> pi.y_contrib[b]) & 1)
        rects.append(Rectangle(pi, frozenset(range(nx)), B))
    from .nnf import is_deterministic

    mode = "partition" if is_deterministic(c) else "cover"
    return CoverCertificate(pi, tuple(rects), 1, mode)
