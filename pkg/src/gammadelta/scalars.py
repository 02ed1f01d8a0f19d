"""Exact scalars: rationals, p-adic valuations, prime fields and the
integer coefficients of divided-power calculus.

Scalars are plain :class:`fractions.Fraction` values (ints are accepted
everywhere a scalar is expected).  Coefficient domains wrap the rules for
normalising raw Python numbers produced by ring arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import NonPLocal

ExactScalar = Fraction

class _Infinity:
    """v_p(0): larger than every integer, absorbing under addition."""

    __slots__ = ()

    def __repr__(self):
        return "INF"

    __str__ = lambda self: "+inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("gammadelta-infinity")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__


INF = _Infinity()


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class PrimeContext:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")


def _vp_int(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp(q, ctx: PrimeContext | int):
    """p-adic valuation of ``q``; :data:`INF` for zero."""
    p = ctx if isinstance(ctx, int) else ctx.p
    q = Fraction(q)
    if q == 0:
        return INF
    return _vp_int(q.numerator, p) - _vp_int(q.denominator, p)


def is_p_local(q, ctx: PrimeContext | int) -> bool:
    p = ctx if isinstance(ctx, int) else ctx.p
    return Fraction(q).denominator % p != 0


def mod_p(q, ctx: PrimeContext | int) -> int:
    """Image of a p-local rational in F_p, as an int in ``range(p)``."""
    p = ctx if isinstance(ctx, int) else ctx.p
    q = Fraction(q)
    if q.denominator % p == 0:
        raise NonPLocal(f"{q} is not {p}-local (v_{p} = {vp(q, p)})")
    return q.numerator * pow(q.denominator, -1, p) % p


def binomial(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


@lru_cache(maxsize=None)
def gamma_comp_coeff(m: int, n: int) -> int:
    """Coefficient of gamma_{mn} in gamma_m(gamma_n(x)): (mn)! / (m! (n!)^m)."""
    if m < 0 or n < 1:
        raise ValueError("need m >= 0 and n >= 1")
    num = math.factorial(m * n)
    den = math.factorial(m) * math.factorial(n) ** m
    q, r = divmod(num, den)
    assert r == 0
    return q


def scalar_str(c) -> str:
    """Serialise a scalar as ``"num/den"`` (or ``"num"`` when integral)."""
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def parse_scalar(s: str) -> Fraction:
    return Fraction(s)


# -- coefficient domains ----------------------------------------------------


class Rationals:
    """The field Q."""

    kind = "rational"
    p = None
    is_prime_field = False

    def __call__(self, x):
        return x if type(x) is Fraction else Fraction(x)

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("division by zero")
        return 1 / Fraction(x)

    def __eq__(self, other):
        return type(other) is type(self) and other.p == self.p

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        return "QQ"

    def describe(self) -> str:
        return "Q"


class PLocal(Rationals):
    """The subring Z_(p) of Q; arithmetic stays exact, membership is checked."""

    kind = "p-local"

    def __init__(self, p: int):
        self.p = PrimeContext(p).p

    def __call__(self, x):
        x = x if type(x) is Fraction else Fraction(x)
        if x.denominator % self.p == 0:
            raise NonPLocal(f"{x} is not {self.p}-local")
        return x

    def inv(self, x):
        x = Fraction(x)
        if x.numerator % self.p == 0:
            raise NonPLocal(f"{x} is not a unit in Z_({self.p})")
        return 1 / x

    def __repr__(self):
        return f"ZZ_({self.p})"

    def describe(self) -> str:
        return f"Z_({self.p})"


class PrimeField(Rationals):
    """F_p with elements stored as ints in ``range(p)``."""

    kind = "prime-field"
    is_prime_field = True

    def __init__(self, p: int):
        self.p = PrimeContext(p).p

    def __call__(self, x):
        if type(x) is int:
            return x % self.p
        return mod_p(x, self.p)

    def inv(self, x):
        x = self(x)
        if x == 0:
            raise ZeroDivisionError("division by zero in F_%d" % self.p)
        return pow(x, -1, self.p)

    def __repr__(self):
        return f"GF({self.p})"

    def describe(self) -> str:
        return f"F{self.p}"


QQ = Rationals()


def domain_from_spec(kind: str, p: int | None = None) -> Rationals:
    if kind == "rational":
        return QQ
    if kind == "p-local":
        return PLocal(p)
    if kind == "prime-field":
        return PrimeField(p)
    raise ValueError(f"unknown coefficient domain {kind!r}")
