"""Sparse polynomial elements over a ring context.

A context fixes variable names, a coefficient domain and a monomial
product rule (``mul_mono``).  Monomials are exponent tuples indexed by the
context's variable order.  :class:`PolyRing` is the plain commutative
polynomial ring; divided-power and delta contexts override the product
rule and the term order.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ContextMismatch
from .scalars import QQ, scalar_str


def _fmt_coeff(c, mono_str):
    c = Fraction(c)
    if not mono_str:
        return scalar_str(abs(c))
    if abs(c) == 1:
        return mono_str
    return f"{scalar_str(abs(c))}*{mono_str}"


class Element:
    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring, terms=None):
        self.ring = ring
        self.terms = terms if terms is not None else {}
        self._hash = None

    @classmethod
    def _build(cls, ring, raw):
        """Normalise a raw ``{mono: number}`` accumulator into an element."""
        dom = ring.domain
        terms = {}
        for m, c in raw.items():
            c = dom(c)
            if c:
                terms[m] = c
        return ring.element_class(ring, terms)

    # -- construction helpers -------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Element):
            if other.ring != self.ring:
                raise ContextMismatch("elements live in different contexts")
            return other
        return self.ring.scalar(other)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        raw = dict(self.terms)
        for m, c in other.terms.items():
            raw[m] = raw.get(m, 0) + c
        return Element._build(self.ring, raw)

    __radd__ = __add__

    def __neg__(self):
        return self.ring.element_class(self.ring, {m: self.ring.domain(-c) for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        c = self.ring.domain(c)
        if not c:
            return self.ring.zero()
        return Element._build(self.ring, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Element):
            return self.scale(other)
        other = self._coerce(other)
        ring = self.ring
        mul_mono = ring.mul_mono
        raw = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                k, m = mul_mono(m1, m2)
                if k:
                    raw[m] = raw.get(m, 0) + k * c1 * c2
        return Element._build(ring, raw)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, c):
        if isinstance(c, Element):
            c = c.as_scalar()
        return self.scale(self.ring.domain.inv(c))

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not supported")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- comparison -----------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Element):
            return self.ring == other.ring and self.terms == other.terms
        try:
            return self == self.ring.scalar(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    # -- queries --------------------------------------------------------

    def is_scalar(self) -> bool:
        zero = self.ring.zero_mono
        return all(m == zero for m in self.terms)

    def as_scalar(self):
        if not self.is_scalar():
            raise ValueError("element is not a scalar")
        return self.terms.get(self.ring.zero_mono, self.ring.domain(0))

    def coeff(self, mono):
        return self.terms.get(mono, 0)

    def sorted_terms(self):
        key = self.ring.term_key
        return sorted(self.terms.items(), key=lambda t: key(t[0]))

    def map_coefficients(self, fn, ring=None):
        ring = ring or self.ring
        return Element._build(ring, {m: fn(c) for m, c in self.terms.items()})

    def degree_in(self, index: int) -> int:
        return max((m[index] for m in self.terms), default=-1)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            s = _fmt_coeff(c, self.ring.mono_str(m))
            neg = Fraction(c) < 0
            if not parts:
                parts.append("-" + s if neg else s)
            else:
                parts.append(("- " if neg else "+ ") + s)
        return " ".join(parts)

    def __repr__(self):
        return f"<{type(self).__name__} {self}>"


class PolyRing:
    """Commutative polynomial ring; exponents may be negative (Laurent)."""

    element_class = Element

    def __init__(self, names, domain=QQ):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be distinct")
        self.domain = domain
        self.nvars = len(self.names)
        self.zero_mono = (0,) * self.nvars
        self._index = {n: i for i, n in enumerate(self.names)}

    def _key(self):
        return (type(self).__name__, self.names, self.domain)

    def __eq__(self, other):
        return type(other) is type(self) and other._key() == self._key()

    def __hash__(self):
        return hash(self._key())

    def index(self, name) -> int:
        return self._index[name]

    def mul_mono(self, a, b):
        return 1, tuple(x + y for x, y in zip(a, b))

    def term_key(self, m):
        return (sum(m), tuple(-e for e in m))

    def mono_str(self, m) -> str:
        parts = []
        for name, e in zip(self.names, m):
            if e == 1:
                parts.append(name)
            elif e:
                parts.append(f"{name}^{e}")
        return "*".join(parts)

    # -- element constructors -------------------------------------------

    def zero(self):
        return self.element_class(self, {})

    def one(self):
        return self.scalar(1)

    def scalar(self, c):
        c = self.domain(c)
        return self.element_class(self, {self.zero_mono: c} if c else {})

    def monomial(self, exps, coeff=1):
        m = tuple(exps)
        if len(m) != self.nvars:
            raise ValueError("exponent vector has wrong length")
        c = self.domain(coeff)
        return self.element_class(self, {m: c} if c else {})

    def var(self, name, power: int = 1):
        m = [0] * self.nvars
        m[self.index(name)] = power
        return self.monomial(m)

    def from_terms(self, raw):
        return Element._build(self, raw)
