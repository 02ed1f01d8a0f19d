"""Free delta-rings Z_(p){G} truncated at a finite delta-depth.

Elements are polynomials in the tower variables ``d^k(g)`` (``k`` up to
``depth_bound``).  ``delta`` is computed from the axioms alone:

* ``delta(c) = (c - c^p) / p`` on scalars,
* ``delta(d^k(g)) = d^{k+1}(g)``,
* ``delta(a + b) = delta(a) + delta(b) - P(a, b)``,
  ``P(a, b) = sum_{0<i<p} C(p, i)/p a^i b^(p-i)``,
* ``delta(ab) = a^p delta(b) + b^p delta(a) + p delta(a) delta(b)``.

Frobenius is the ring endomorphism ``d^k(g) -> d^k(g)^p + p d^{k+1}(g)``;
it is implemented separately so that ``phi(f) = f^p + p delta(f)`` is a
genuine cross-check.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import comb

from .errors import DepthExceeded, NonPLocal
from .scalars import PLocal, PrimeContext, QQ, is_p_local, parse_scalar, scalar_str
from .sparse import Element, PolyRing


class DeltaElement(Element):
    __slots__ = ()

    def max_depth(self) -> int:
        """Deepest tower variable occurring (-1 for scalars)."""
        ring = self.ring
        best = -1
        for m in self.terms:
            for i, e in enumerate(m):
                if e and i % ring.stride > best:
                    best = i % ring.stride
        return best


class DeltaContext(PolyRing):
    """Polynomial ring in d^k(g), g in ``generators``, 0 <= k <= ``depth_bound``."""

    element_class = DeltaElement

    def __init__(self, generators, depth_bound: int, p: int, scalar_domain="p-local"):
        generators = tuple(generators)
        if depth_bound < 0:
            raise ValueError("depth_bound must be >= 0")
        self.prime = PrimeContext(p)
        self.p = p
        if isinstance(scalar_domain, str):
            if scalar_domain == "rational":
                domain = QQ
            elif scalar_domain == "p-local":
                domain = PLocal(p)
            elif scalar_domain == "prime-field":
                from .scalars import PrimeField

                domain = PrimeField(p)
            else:
                raise ValueError(f"unknown scalar domain {scalar_domain!r}")
        else:
            domain = scalar_domain
        self.generators = generators
        self.depth_bound = depth_bound
        self.stride = depth_bound + 1
        names = [tower_name(g, k) for g in generators for k in range(self.stride)]
        super().__init__(names, domain)

    def _key(self):
        return ("delta", self.generators, self.depth_bound, self.p, self.domain)

    def __repr__(self):
        return f"DeltaContext({list(self.generators)}, D={self.depth_bound}, p={self.p}, {self.domain!r})"

    def with_depth(self, depth_bound: int) -> "DeltaContext":
        return DeltaContext(self.generators, depth_bound, self.p, self.domain)

    def with_domain(self, domain) -> "DeltaContext":
        return DeltaContext(self.generators, self.depth_bound, self.p, domain)

    def slot(self, gen: str, k: int) -> int:
        if k > self.depth_bound:
            raise DepthExceeded(k, self.depth_bound)
        return self.generators.index(gen) * self.stride + k

    def tower(self, gen: str, k: int = 0, power: int = 1) -> DeltaElement:
        m = [0] * self.nvars
        m[self.slot(gen, k)] = power
        return self.monomial(m)

    def gen(self, name: str) -> DeltaElement:
        return self.tower(name, 0)

    def term_key(self, m):
        return (sum(m), tuple(-e for e in m))

    def mono_str(self, m) -> str:
        parts = []
        for i, e in enumerate(m):
            if not e:
                continue
            name = self.names[i]
            if e == 1:
                parts.append(name)
            else:
                parts.append(f"{name}^{e}")
        return "*".join(parts)


def tower_name(gen: str, k: int) -> str:
    if k == 0:
        return gen
    if k == 1:
        return f"d({gen})"
    return f"d^{k}({gen})"


_TOWER_RE = re.compile(r"^d\^(\d+)\((\w+)\)$|^d\((\w+)\)$|^(\w+)$")


def parse_tower_name(s: str):
    """Inverse of :func:`tower_name`; also accepts ``d^0(g)`` and ``d^1(g)``."""
    m = _TOWER_RE.match(s)
    if not m:
        raise ValueError(f"bad tower variable {s!r}")
    if m.group(1) is not None:
        return m.group(2), int(m.group(1))
    if m.group(3) is not None:
        return m.group(3), 1
    return m.group(4), 0


# -- delta ------------------------------------------------------------------


def _require_delta(ctx: DeltaContext):
    if ctx.domain.is_prime_field:
        raise NonPLocal("delta divides by p and is undefined over a prime field")


def delta_scalar(c, p: int) -> Fraction:
    c = Fraction(c)
    return (c - c ** p) / p


def _P(a: DeltaElement, b: DeltaElement, p: int) -> DeltaElement:
    """((a + b)^p - a^p - b^p) / p, expanded with integer coefficients."""
    ring = a.ring
    out = ring.zero()
    apow = [ring.one()]
    bpow = [ring.one()]
    for _ in range(p - 1):
        apow.append(apow[-1] * a)
        bpow.append(bpow[-1] * b)
    for i in range(1, p):
        out = out + (apow[i] * bpow[p - i]).scale(comb(p, i) // p)
    return out


@lru_cache(maxsize=65536)
def _delta_var_power(ctx: DeltaContext, slot: int, e: int) -> DeltaElement:
    """delta(v^e) for a tower variable v, by the product rule on v^a * v^b."""
    k = slot % ctx.stride
    if k == ctx.depth_bound:
        raise DepthExceeded(k + 1, ctx.depth_bound)
    m = [0] * ctx.nvars
    if e == 1:
        m[slot + 1] = 1
        return ctx.monomial(m)
    a = e // 2
    b = e - a
    va = _var_power(ctx, slot, a)
    vb = _var_power(ctx, slot, b)
    da = _delta_var_power(ctx, slot, a)
    db = _delta_var_power(ctx, slot, b)
    return _product_rule(va, da, vb, db, ctx.p)


def _var_power(ctx, slot, e):
    m = [0] * ctx.nvars
    m[slot] = e
    return ctx.monomial(m)


def _product_rule(a, da, b, db, p):
    return a ** p * db + b ** p * da + (da * db).scale(p)


@lru_cache(maxsize=65536)
def _delta_monomial(ctx: DeltaContext, mono) -> DeltaElement:
    slots = [i for i, e in enumerate(mono) if e]
    if not slots:
        return ctx.zero()
    i = slots[0]
    first = _var_power(ctx, i, mono[i])
    dfirst = _delta_var_power(ctx, i, mono[i])
    if len(slots) == 1:
        return dfirst
    rest_m = list(mono)
    rest_m[i] = 0
    rest_m = tuple(rest_m)
    rest = ctx.monomial(rest_m)
    return _product_rule(first, dfirst, rest, _delta_monomial(ctx, rest_m), ctx.p)


def _delta_term(ctx, mono, c):
    p = ctx.p
    mono_el = ctx.monomial(mono)
    dm = _delta_monomial(ctx, mono)
    dc = delta_scalar(c, p)
    # delta(c m) = c^p delta(m) + m^p delta(c) + p delta(c) delta(m)
    out = dm.scale(c ** p)
    if dc:
        out = out + (mono_el ** p).scale(dc) + dm.scale(p * dc)
    return out


def _delta_sum(ctx, items):
    if len(items) == 1:
        m, c = items[0]
        return _delta_term(ctx, m, c)
    half = len(items) // 2
    left, right = items[:half], items[half:]
    a = ctx.from_terms(dict(left))
    b = ctx.from_terms(dict(right))
    return _delta_sum(ctx, left) + _delta_sum(ctx, right) - _P(a, b, ctx.p)


def delta(f: DeltaElement) -> DeltaElement:
    ctx = f.ring
    _require_delta(ctx)
    if not f.terms:
        return ctx.zero()
    return _delta_sum(ctx, f.sorted_terms())


def delta_n(f: DeltaElement, n: int) -> DeltaElement:
    for _ in range(n):
        f = delta(f)
    return f


# -- Frobenius and substitution ---------------------------------------------


def _evaluate(f: Element, images, target) -> Element:
    """Ring homomorphism: variable slot i -> images[i] (lazily computed)."""
    cache = {}

    def power(i, e):
        key = (i, e)
        if key not in cache:
            if e == 1:
                cache[key] = images(i)
            else:
                cache[key] = power(i, e // 2) * power(i, e - e // 2)
        return cache[key]

    out = target.zero()
    raw = {}
    for m, c in f.terms.items():
        term = target.scalar(c)
        for i, e in enumerate(m):
            if e:
                term = term * power(i, e)
        for tm, tc in term.terms.items():
            raw[tm] = raw.get(tm, 0) + tc
    out = target.from_terms(raw)
    return out


def frobenius(f: DeltaElement) -> DeltaElement:
    """phi: d^k(g) -> d^k(g)^p + p d^{k+1}(g), identity on scalars."""
    ctx = f.ring
    p = ctx.p

    def image(i):
        if i % ctx.stride == ctx.depth_bound:
            raise DepthExceeded(ctx.depth_bound + 1, ctx.depth_bound)
        v = ctx.monomial(tuple(1 if j == i else 0 for j in range(ctx.nvars)))
        w = ctx.monomial(tuple(1 if j == i + 1 else 0 for j in range(ctx.nvars)))
        return v ** p + w.scale(p)

    return _evaluate(f, image, ctx)


def frobenius_n(f: DeltaElement, n: int) -> DeltaElement:
    for _ in range(n):
        f = frobenius(f)
    return f


def substitute(f: DeltaElement, assignment: dict, target: DeltaContext | None = None) -> DeltaElement:
    """Image of f under the delta-ring map g -> assignment[g].

    Generators missing from ``assignment`` go to the same-named generator of
    the target context.  ``d^k(g)`` maps to ``delta^k(assignment[g])``.
    """
    src = f.ring
    if target is None:
        target = next(iter(assignment.values())).ring if assignment else src
    towers = {}
    for g in src.generators:
        img = assignment.get(g)
        if img is None:
            img = target.gen(g)
        if img.ring != target:
            raise ValueError(f"image of {g!r} is not in the target context")
        towers[g] = [img]

    def image(i):
        g = src.generators[i // src.stride]
        k = i % src.stride
        seq = towers[g]
        while len(seq) <= k:
            seq.append(delta(seq[-1]))
        return seq[k]

    return _evaluate(f, image, target)


# -- identities -------------------------------------------------------------


def delta_power_rhs(u: DeltaElement) -> DeltaElement:
    """sum_{k=1}^p C(p,k) u^{p(p-k)} p^{k-1} delta(u)^k."""
    p = u.ring.p
    du = delta(u)
    out = u.ring.zero()
    for k in range(1, p + 1):
        out = out + (u ** (p * (p - k)) * du ** k).scale(comb(p, k) * p ** (k - 1))
    return out


def verify_delta_power(u: DeltaElement) -> bool:
    """delta(u^p) == sum_{k=1}^p C(p,k) u^{p(p-k)} p^{k-1} delta(u)^k."""
    p = u.ring.p
    return delta(u ** p) == delta_power_rhs(u)


def delta_divided_identity(p: int, depth_bound: int = 2, details: bool = False):
    """Check the closed form of delta(y^p / p) in Q{y}.

    The right-hand side is
    ``(p^(p-1) - 1)/p^(p+1) y^(p^2) + y^(p(p-1)) delta(y)
    + sum_{k=0}^{p-2} p^(p-2-k) C(p,k) y^(kp) delta(y)^(p-k)``.
    All coefficients other than that of ``y^(p^2)`` must be p-local, and
    that one must be ``unit / p^(p+1)``.
    """
    ctx = DeltaContext(("y",), depth_bound, p, "rational")
    y = ctx.gen("y")
    dy = ctx.tower("y", 1)
    lhs = delta((y ** p).scale(Fraction(1, p)))
    rhs = (y ** (p * p)).scale(Fraction(p ** (p - 1) - 1, p ** (p + 1)))
    rhs = rhs + y ** (p * (p - 1)) * dy
    for k in range(p - 1):
        rhs = rhs + (y ** (k * p) * dy ** (p - k)).scale(p ** (p - 2 - k) * comb(p, k))
    equal = lhs == rhs
    lead_mono = (y ** (p * p)).sorted_terms()[0][0]
    lead = lhs.coeff(lead_mono)
    lead_ok = is_p_local(lead * p ** (p + 1), p) and (lead * p ** (p + 1)).numerator % p != 0
    others_ok = all(is_p_local(c, p) for m, c in lhs.terms.items() if m != lead_mono)
    result = equal and lead_ok and others_ok
    if details:
        return result, {"equal": equal, "leading_unit_over_p^(p+1)": lead_ok, "other_coefficients_p_local": others_ok, "value": lhs}
    return result


def rational_normal_form(n: int, p: int):
    """delta^n(x) as a polynomial D_n in x, phi(x), ..., phi^n(x) over Q.

    Uses delta(f) = (phi(f) - f^p)/p with phi the index shift.  Returns
    ``(D_n, deg_x, leading)`` where ``leading`` is the coefficient of
    ``x^(p^n)``.
    """
    names = ["x"] + [("phi(x)" if k == 1 else f"phi^{k}(x)") for k in range(1, n + 1)]
    ring = PolyRing(names, QQ)
    D = ring.var("x")
    for _ in range(n):
        shifted = ring.from_terms({(0,) + m[:-1]: c for m, c in D.terms.items()})
        D = (shifted - D ** p).scale(Fraction(1, p))
    deg = D.degree_in(0)
    lead_terms = [c for m, c in D.terms.items() if m[0] == deg]
    assert len(lead_terms) == 1, "leading x-power has a non-constant coefficient"
    leading = lead_terms[0]
    assert deg == p ** n
    assert leading == Fraction(-1, p) ** ((p ** n - 1) // (p - 1))
    return D, deg, leading


# -- JSON -------------------------------------------------------------------


def element_to_json(f: DeltaElement) -> dict:
    ctx = f.ring
    terms = []
    for m, c in f.sorted_terms():
        terms.append({"c": scalar_str(c), "m": {ctx.names[i]: e for i, e in enumerate(m) if e}})
    return {"terms": terms}


def element_from_json(ctx: DeltaContext, data: dict) -> DeltaElement:
    raw = {}
    for t in data["terms"]:
        m = [0] * ctx.nvars
        for key, e in t["m"].items():
            g, k = parse_tower_name(key)
            m[ctx.slot(g, k)] = e
        m = tuple(m)
        raw[m] = raw.get(m, 0) + parse_scalar(t["c"])
    return ctx.from_terms(raw)
