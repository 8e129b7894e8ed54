"""Exact circle and torus arithmetic.

The circle group T is modeled additively by rationals mod 1: the value
a/b stands for exp(2*pi*i*a/b).  Points of the two tori R/TZ and R/T'Z
carry their value as a rational in units of the respective period, so
all Gauss brackets and carries reduce to exact Fraction arithmetic.

The duality pairing between R/TZ and Z is fixed once and for all with a
negative exponent,

    <s, k>  =  exp(-i T' k [[s]])  =  -k*s  (mod 1, s in units of T),

and every other signed formula in the package refers back to it.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

PERIOD_T = "T"
PERIOD_TPRIME = "T'"


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        raise TypeError("floats are rejected; pass a Fraction or 'a/b' string")
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


class CircleValue:
    """A rational point of the circle group, written additively.

    >>> CircleValue(Fraction(1, 2)) + CircleValue(Fraction(3, 4))
    CircleValue(1/4)
    >>> -CircleValue(Fraction(1, 3))
    CircleValue(2/3)
    """

    __slots__ = ("frac",)

    def __init__(self, value=0):
        self.frac = _as_fraction(value) % 1

    @property
    def numerator(self) -> int:
        return self.frac.numerator

    @property
    def denominator(self) -> int:
        return self.frac.denominator

    def __add__(self, other):
        return CircleValue(self.frac + other.frac)

    def __sub__(self, other):
        return CircleValue(self.frac - other.frac)

    def __neg__(self):
        return CircleValue(-self.frac)

    def __mul__(self, k):
        if not isinstance(k, (int, np.integer)):
            return NotImplemented
        return CircleValue(self.frac * int(k))

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, CircleValue):
            return self.frac == other.frac
        return NotImplemented

    def __hash__(self):
        return hash(("CircleValue", self.frac))

    def __bool__(self):
        return self.frac != 0

    def __repr__(self):
        return f"CircleValue({self.frac})"

    def __str__(self):
        return f"{self.frac.numerator}/{self.frac.denominator}"

    def is_zero(self) -> bool:
        return self.frac == 0


class TorusPoint:
    """A rational point of R/TZ or R/T'Z, stored in units of the period.

    The representative [[.]] is the value in [0, 1) scaled by the period;
    arithmetic never leaves the rationals.
    """

    __slots__ = ("period", "value")

    def __init__(self, period: str, value=0):
        if period not in (PERIOD_T, PERIOD_TPRIME):
            raise ValueError(f"unknown period tag {period!r}")
        self.period = period
        self.value = _as_fraction(value) % 1

    def __add__(self, other):
        self._same(other)
        return TorusPoint(self.period, self.value + other.value)

    def __sub__(self, other):
        self._same(other)
        return TorusPoint(self.period, self.value - other.value)

    def __neg__(self):
        return TorusPoint(self.period, -self.value)

    def __mul__(self, k):
        if not isinstance(k, (int, np.integer)):
            return NotImplemented
        return TorusPoint(self.period, self.value * int(k))

    __rmul__ = __mul__

    def _same(self, other):
        if not isinstance(other, TorusPoint) or other.period != self.period:
            raise ValueError("torus points with different periods cannot be combined")

    def __eq__(self, other):
        if isinstance(other, TorusPoint):
            return self.period == other.period and self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash(("TorusPoint", self.period, self.value))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"TorusPoint({self.period!r}, {self.value})"

    def representative(self) -> Fraction:
        """The value [[.]]/period, i.e. the representative in [0, 1)."""
        return self.value

    def is_zero(self) -> bool:
        return self.value == 0


def pairing(s: TorusPoint, k) -> CircleValue:
    """Duality pairing <s, k> = exp(-i T' k [[s]]) of R/TZ with Z.

    Additively this is -k*s mod 1 (s read in units of T).  Bilinearity
    in k is exact.

    >>> pairing(TorusPoint("T", Fraction(1, 3)), 2)
    CircleValue(1/3)
    """
    if s.period != PERIOD_T:
        raise ValueError("the pairing takes a point of R/TZ in its first slot")
    return CircleValue(-int(k) * s.value)


class CarryTable:
    """The integer 2-cocycle of carries n_Z(p, q) = eta_{T'}(m(p), m(q)).

    Adding the canonical representatives in [0, T') of a torus-valued
    homomorphism m on Q either stays below the period (carry 0) or wraps
    once (carry 1); the table records that Gauss-bracket overflow.
    """

    __slots__ = ("group", "modulus", "values")

    def __init__(self, group, modulus, values):
        self.group = group
        self.modulus = list(modulus)
        self.values = np.array(values, dtype=np.int64)

    def __call__(self, p, q) -> int:
        return int(self.values[p, q])

    def is_zero(self) -> bool:
        return not self.values.any()


def carry_cocycle(group, modulus) -> CarryTable:
    """Build the carry table of a homomorphism m: Q -> R/T'Z.

    ``modulus`` lists a TorusPoint with period T' per element of Q.
    Raises with a witness pair if m fails to be a homomorphism.

    >>> from .groups import build_group
    >>> Q = build_group("z2")
    >>> t = carry_cocycle(Q, [TorusPoint("T'", 0), TorusPoint("T'", Fraction(1, 2))])
    >>> t(1, 1)
    1
    """
    n = group.order
    modulus = list(modulus)
    if len(modulus) != n:
        raise ValueError("modulus must assign a torus point to every element")
    for m in modulus:
        if m.period != PERIOD_TPRIME:
            raise ValueError("the modulus map takes values in R/T'Z")
    if modulus[group.identity].value != 0:
        raise ValueError("m(identity) must vanish")
    for p in range(n):
        for q in range(n):
            if modulus[p] + modulus[q] != modulus[group.mul(p, q)]:
                raise ValueError(
                    f"modulus map is not a homomorphism: m({p}) + m({q}) != m({p}*{q})"
                )
    values = np.zeros((n, n), dtype=np.int64)
    for p in range(n):
        for q in range(n):
            carry = modulus[p].value + modulus[q].value - modulus[group.mul(p, q)].value
            if carry not in (0, 1):
                raise AssertionError("carry escaped {0, 1}")
            values[p, q] = int(carry)
    table = CarryTable(group, modulus, values)
    _check_integer_cocycle(group, table)
    return table


def _check_integer_cocycle(group, table: CarryTable):
    n = group.order
    for p in range(n):
        for q in range(n):
            for r in range(n):
                lhs = table(p, q) + table(group.mul(p, q), r)
                rhs = table(q, r) + table(p, group.mul(q, r))
                if lhs != rhs:
                    raise AssertionError(f"carry table violates the 2-cocycle identity at {(p, q, r)}")
