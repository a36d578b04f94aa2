"""Arithmetic in GF(2^t) and the affine permutation family x -> a*x + b.

Field elements are integers below ``2**t`` read as polynomials over GF(2)
(bit ``i`` is the coefficient of ``z**i``).  Each degree uses the
numerically smallest irreducible polynomial, except degree 1 where ``z + 1``
is used; both give GF(2).
"""

from __future__ import annotations

import typing as t
from dataclasses import dataclass

from .core import KcError

# degree -> modulus with the leading z**t bit included
IRREDUCIBLE: t.Dict[int, int] = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000000001001,
    13: 0b10000000011011,
    14: 0b100000000100001,
    15: 0b1000000000000011,
    16: 0b10000000000101011,
}

MAX_DEGREE = max(IRREDUCIBLE)


class FieldError(KcError):
    pass


def clmul(x: int, y: int) -> int:
    """Carry-less product of two GF(2) polynomials."""
    out = 0
    while y:
        if y & 1:
            out ^= x
        x <<= 1
        y >>= 1
    return out


def poly_mod(x: int, m: int) -> int:
    dm = m.bit_length()
    while x.bit_length() >= dm:
        x ^= m << (x.bit_length() - dm)
    return x


@dataclass(frozen=True, order=True)
class GF:
    t: int
    bits: int

    def __post_init__(self):
        if self.t not in IRREDUCIBLE:
            raise FieldError(f"no field table entry for degree {self.t}")
        if not 0 <= self.bits < (1 << self.t):
            raise FieldError(f"{self.bits} is not an element of GF(2^{self.t})")

    def __add__(self, other: "GF") -> "GF":
        return gf_add(self, other)

    def __mul__(self, other: "GF") -> "GF":
        return gf_mul(self, other)

    def __int__(self):
        return self.bits

    def __repr__(self):
        return f"GF{1 << self.t}({self.bits})"


def _same_degree(x: GF, y: GF) -> None:
    if x.t != y.t:
        raise FieldError(f"degree mismatch: {x.t} vs {y.t}")


def gf_add(x: GF, y: GF) -> GF:
    _same_degree(x, y)
    return GF(x.t, x.bits ^ y.bits)


def gf_mul(x: GF, y: GF) -> GF:
    _same_degree(x, y)
    return GF(x.t, mul_raw(x.bits, y.bits, x.t))


def mul_raw(x: int, y: int, t_: int) -> int:
    m = IRREDUCIBLE[t_]
    # shift-and-reduce, equivalent to poly_mod(clmul(x, y), m)
    out = 0
    top = 1 << t_
    while y:
        if y & 1:
            out ^= x
        y >>= 1
        x <<= 1
        if x & top:
            x ^= m
    return out


def gf_inv(x: GF) -> GF:
    if x.bits == 0:
        raise FieldError("zero has no inverse")
    # x^(2^t - 2)
    result, base, e = 1, x.bits, (1 << x.t) - 2
    while e:
        if e & 1:
            result = mul_raw(result, base, x.t)
        base = mul_raw(base, base, x.t)
        e >>= 1
    return GF(x.t, result)


@dataclass(frozen=True)
class AffinePerm:
    """The map x -> a*x + b on GF(2^t), with a nonzero."""

    t: int
    a: int
    b: int

    def __post_init__(self):
        size = 1 << self.t
        if self.t not in IRREDUCIBLE:
            raise FieldError(f"no field table entry for degree {self.t}")
        if not (0 < self.a < size and 0 <= self.b < size):
            raise FieldError(f"invalid affine map a={self.a}, b={self.b} for t={self.t}")

    def __call__(self, x: int) -> int:
        return mul_raw(self.a, x, self.t) ^ self.b

    def table(self) -> t.Tuple[int, ...]:
        return tuple(self(x) for x in range(1 << self.t))

    def rep(self) -> t.Tuple[int, ...]:
        """2t-bit encoding: bits of a then bits of b, most significant first."""
        bits = []
        for v in (self.a, self.b):
            bits.extend((v >> (self.t - 1 - i)) & 1 for i in range(self.t))
        return tuple(bits)

    @classmethod
    def from_rep(cls, t_: int, rep: t.Sequence[int]) -> "AffinePerm":
        if len(rep) != 2 * t_:
            raise FieldError("representation length must be 2t")
        a = b = 0
        for bit in rep[:t_]:
            a = (a << 1) | bit
        for bit in rep[t_:]:
            b = (b << 1) | bit
        return cls(t_, a, b)

    def inverse(self) -> "AffinePerm":
        ainv = gf_inv(GF(self.t, self.a)).bits
        return AffinePerm(self.t, ainv, mul_raw(ainv, self.b, self.t))


def enumerate_perms(t_: int) -> t.Iterator[AffinePerm]:
    """All n'(n'-1) affine maps for n' = 2^t, identity first."""
    if t_ not in IRREDUCIBLE:
        raise FieldError(f"degree {t_} outside the polynomial table (1..{MAX_DEGREE})")
    size = 1 << t_
    for a in range(1, size):
        for b in range(size):
            yield AffinePerm(t_, a, b)


def family_size(t_: int) -> int:
    n = 1 << t_
    return n * (n - 1)
