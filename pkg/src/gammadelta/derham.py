"""The PD de Rham complex of a standard PD-pair over its base.

Forms are sparse maps ``(monomial, wedge) -> scalar`` where ``wedge`` is a
strictly increasing tuple of one-form generator indices.  The generators
are ``dx`` for every ordinary variable outside the base and ``dy`` for every
divided variable.

Weights: g_n(y) has weight n, an ordinary non-base variable weight 1 and
every one-form generator weight 1, so ``d`` preserves weight and each
(weight, degree) block is a small finite matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .dpalg import PDContext, compositions
from .errors import ContextMismatch, TruncationOverflow
from .exactla import ExactMatrix, rank as matrix_rank
from .scalars import QQ, PrimeField, is_p_local, mod_p, parse_scalar, scalar_str
from .sparse import _fmt_coeff


def _linear_field(domain):
    return domain if domain.is_prime_field else QQ


class DeRhamContext:
    """Omega^* of ``target`` relative to the base generated by ``base_vars``.

    ``base_vars`` are ordinary variables of the target that belong to the
    base ring; they carry weight 0 and have no differential.
    """

    def __init__(self, target: PDContext, base_vars=()):
        base_vars = tuple(base_vars)
        for b in base_vars:
            if b not in target.ordinary_vars:
                raise ValueError(f"base variable {b!r} is not an ordinary variable of the target")
        self.target = target
        self.base_vars = base_vars
        self.p = target.domain.p if target.domain.is_prime_field else None
        gens = [i for i, x in enumerate(target.ordinary_vars) if x not in base_vars]
        gens += list(range(target.n_ord, target.nvars))
        self.gen_slots = tuple(gens)
        self.gen_names = tuple("d" + target.names[i] for i in gens)

    @classmethod
    def over_field(cls, ordinary_vars=(), divided_vars=(), domain=QQ, weight_bound: int = 12):
        return cls(PDContext(ordinary_vars, divided_vars, domain, weight_bound))

    def __eq__(self, other):
        return isinstance(other, DeRhamContext) and (self.target, self.base_vars) == (other.target, other.base_vars)

    def __hash__(self):
        return hash((self.target, self.base_vars))

    def __repr__(self):
        return f"DeRhamContext({self.target!r}, base={list(self.base_vars)})"

    @property
    def domain(self):
        return self.target.domain

    @property
    def ngens(self) -> int:
        return len(self.gen_slots)

    def with_bound(self, weight_bound: int) -> "DeRhamContext":
        return DeRhamContext(self.target.with_bound(weight_bound), self.base_vars)

    # -- weights ---------------------------------------------------------

    def mono_weight(self, m) -> int:
        return sum(m[s] for s in self.gen_slots)

    def weight(self, m, wedge) -> int:
        return self.mono_weight(m) + len(wedge)

    # -- constructors ----------------------------------------------------

    def form(self, raw, degree: int) -> "Form":
        return Form._build(self, raw, degree)

    def zero(self, degree: int = 0) -> "Form":
        return Form(self, {}, degree)

    def function(self, f) -> "Form":
        if f.ring != self.target:
            raise ContextMismatch("element does not live in the target ring")
        return Form(self, {(m, ()): c for m, c in f.terms.items()}, 0)

    def dgen(self, name: str) -> "Form":
        """The one-form ``d name`` of a generator."""
        g = self.gen_names.index("d" + name)
        return Form(self, {(self.target.zero_mono, (g,)): self.domain(1)}, 1)

    def basis(self, weight: int, degree: int):
        """All basis forms (monomial, wedge) of the given weight and degree."""
        if degree > self.ngens or degree > weight:
            return []
        t = weight - degree
        if t > self.target.weight_bound and self.target.divided_vars:
            raise TruncationOverflow(t, self.target.weight_bound)
        out = []
        zero = [0] * self.target.nvars
        for exps in compositions(t, self.ngens):
            m = list(zero)
            for s, e in zip(self.gen_slots, exps):
                m[s] = e
            if self.target.weight(m) > self.target.weight_bound:
                continue
            for wedge in combinations(range(self.ngens), degree):
                out.append((tuple(m), wedge))
        return out


def _merge_sign(a, b):
    """Sign of sorting the concatenation a + b; 0 if they overlap."""
    if set(a) & set(b):
        return 0, None
    inv = sum(1 for x in a for y in b if x > y)
    return (-1) ** inv, tuple(sorted(a + b))


class Form:
    __slots__ = ("ctx", "terms", "degree")

    def __init__(self, ctx: DeRhamContext, terms, degree: int):
        self.ctx = ctx
        self.terms = terms
        self.degree = degree

    @classmethod
    def _build(cls, ctx, raw, degree):
        dom = ctx.domain
        terms = {}
        for k, c in raw.items():
            c = dom(c)
            if c:
                if len(k[1]) != degree:
                    raise ValueError("wedge length does not match the form degree")
                terms[k] = c
        return cls(ctx, terms, degree)

    def _check(self, other):
        if not isinstance(other, Form) or other.ctx != self.ctx:
            raise ContextMismatch("forms live in different complexes")
        if other.degree != self.degree and self.terms and other.terms:
            raise ValueError("cannot add forms of different degrees")

    def __add__(self, other):
        self._check(other)
        raw = dict(self.terms)
        for k, c in other.terms.items():
            raw[k] = raw.get(k, 0) + c
        deg = self.degree if self.terms else other.degree
        return Form._build(self.ctx, raw, deg)

    def __neg__(self):
        return Form(self.ctx, {k: self.ctx.domain(-c) for k, c in self.terms.items()}, self.degree)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return Form._build(self.ctx, {k: v * c for k, v in self.terms.items()}, self.degree)

    def __mul__(self, other):
        """Multiplication by a target ring element (or scalar)."""
        if isinstance(other, Form):
            return wedge(self, other)
        if not hasattr(other, "terms"):
            return self.scale(other)
        if other.ring != self.ctx.target:
            raise ContextMismatch("element does not live in the target ring")
        mul_mono = other.ring.mul_mono
        raw = {}
        for (m, w), c in self.terms.items():
            for m2, c2 in other.terms.items():
                k, m3 = mul_mono(m, m2)
                if k:
                    raw[(m3, w)] = raw.get((m3, w), 0) + k * c * c2
        return Form._build(self.ctx, raw, self.degree)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms and (self.degree == other.degree or not self.terms)

    def __hash__(self):
        return hash((self.ctx, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def weights(self):
        return sorted({self.ctx.weight(m, w) for m, w in self.terms})

    def homogeneous_part(self, weight: int) -> "Form":
        return Form(self.ctx, {k: c for k, c in self.terms.items() if self.ctx.weight(*k) == weight}, self.degree)

    def sorted_terms(self):
        key = self.ctx.target.term_key
        return sorted(self.terms.items(), key=lambda t: (t[0][1], key(t[0][0])))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (m, w), c in self.sorted_terms():
            mono = self.ctx.target.mono_str(m)
            wed = "^".join(self.ctx.gen_names[g] for g in w)
            body = "*".join(x for x in (mono, wed) if x)
            s = _fmt_coeff(c, body)
            neg = Fraction(c) < 0
            if not parts:
                parts.append("-" + s if neg else s)
            else:
                parts.append(("- " if neg else "+ ") + s)
        return " ".join(parts)

    def __repr__(self):
        return f"<Form deg={self.degree} {self}>"


def wedge(a: Form, b: Form) -> Form:
    if a.ctx != b.ctx:
        raise ContextMismatch("forms live in different complexes")
    mul_mono = a.ctx.target.mul_mono
    raw = {}
    for (m1, w1), c1 in a.terms.items():
        for (m2, w2), c2 in b.terms.items():
            sign, w = _merge_sign(w1, w2)
            if not sign:
                continue
            k, m = mul_mono(m1, m2)
            if k:
                raw[(m, w)] = raw.get((m, w), 0) + sign * k * c1 * c2
    return Form._build(a.ctx, raw, a.degree + b.degree)


def d(f: Form) -> Form:
    """Exterior differential; on monomials the universal PD-derivation."""
    ctx = f.ctx
    n_ord = ctx.target.n_ord
    raw = {}
    for (m, w), c in f.terms.items():
        for g, s in enumerate(ctx.gen_slots):
            e = m[s]
            if not e or g in w:
                continue
            sign, w2 = _merge_sign((g,), w)
            m2 = list(m)
            m2[s] = e - 1
            # x^a -> a x^(a-1); g_n(y) -> g_(n-1)(y)
            k = e if s < n_ord else 1
            key = (tuple(m2), w2)
            raw[key] = raw.get(key, 0) + sign * k * c
    return Form._build(ctx, raw, f.degree + 1)


def hodge_fil_membership(f: Form, m: int) -> bool:
    """f lies in Fil_H^m: every coefficient of f lies in I^[max(m - q, 0)]."""
    need = max(m - f.degree, 0)
    return all(f.ctx.target.weight(mono) >= need for mono, _ in f.terms)


# -- cohomology ----------------------------------------------------------


def _require_field_base(ctx: DeRhamContext):
    if ctx.base_vars:
        raise ValueError("graded cohomology needs the base to be the coefficient field")


def _d_matrix(ctx: DeRhamContext, weight: int, degree: int):
    """Matrix of d: Omega^degree_weight -> Omega^(degree+1)_weight."""
    src = ctx.basis(weight, degree)
    dst = ctx.basis(weight, degree + 1)
    index = {k: i for i, k in enumerate(dst)}
    cols = []
    for k in src:
        image = d(Form(ctx, {k: ctx.domain(1)}, degree))
        cols.append({index[t]: c for t, c in image.terms.items()})
    return cols, src, dst


def _d_rank(ctx, weight, degree) -> int:
    if degree < 0 or degree >= ctx.ngens:
        return 0
    cols, _, dst = _d_matrix(ctx, weight, degree)
    return _rank(cols, len(dst), ctx)


def _rank(cols, nrows, ctx) -> int:
    return matrix_rank(ExactMatrix.from_columns(cols, nrows, _linear_field(ctx.domain)))


def graded_cohomology(ctx: DeRhamContext, weight: int, degree: int) -> int:
    """Rank of H^degree in the given weight, by exact elimination."""
    _require_field_base(ctx)
    if weight > ctx.target.weight_bound:
        raise TruncationOverflow(weight, ctx.target.weight_bound)
    if degree < 0:
        raise ValueError("degree must be >= 0")
    dim = len(ctx.basis(weight, degree))
    return dim - _d_rank(ctx, weight, degree) - _d_rank(ctx, weight, degree - 1)


def cohomology_table(ctx: DeRhamContext, weight_bound: int, executor=None):
    """``[{"weight", "degree", "rank"}]`` for all weights 0..weight_bound."""
    jobs = [(w, q) for w in range(weight_bound + 1) for q in range(ctx.ngens + 1)]
    mapper = executor.map if executor is not None else map
    ranks = list(mapper(lambda wq: graded_cohomology(ctx, *wq), jobs))
    return [{"weight": w, "degree": q, "rank": r} for (w, q), r in zip(jobs, ranks)]


def poincare_check(ctx: DeRhamContext, weight_bound: int) -> bool:
    """H^q vanishes in every weight 1..weight_bound and H^0_0 is the base."""
    if graded_cohomology(ctx, 0, 0) != 1:
        return False
    for w in range(1, weight_bound + 1):
        for q in range(ctx.ngens + 1):
            if graded_cohomology(ctx, w, q):
                return False
    return True


def in_image_of_d(f: Form) -> bool:
    """Whether f = d g for some g, decided weight by weight."""
    ctx = f.ctx
    if f.degree == 0:
        return not f
    for w in f.weights():
        part = f.homogeneous_part(w)
        cols, _, dst = _d_matrix(ctx, w, f.degree - 1)
        index = {k: i for i, k in enumerate(dst)}
        col = {index[k]: c for k, c in part.terms.items()}
        if _rank(cols + [col], len(dst), ctx) != _rank(cols, len(dst), ctx):
            return False
    return True


def same_class(a: Form, b: Form) -> bool:
    """a and b are closed and differ by an exact form."""
    return not d(a) and not d(b) and in_image_of_d(a - b)


# -- inverse Cartier -----------------------------------------------------


def _require_prime_field(ctx: DeRhamContext) -> int:
    if ctx.p is None:
        raise ValueError("the inverse Cartier map needs coefficients in a prime field")
    return ctx.p


def inverse_cartier(ctx: DeRhamContext, f, q: int = 1) -> Form:
    """C^{-1} on a ring element: f^p for q = 0, f^(p-1) df for q = 1."""
    p = _require_prime_field(ctx)
    if q == 0:
        return ctx.function(f ** p)
    if q == 1:
        return ctx.function(f ** (p - 1)) * d(ctx.function(f))
    raise ValueError("use inverse_cartier_wedge for degree > 1")


def inverse_cartier_wedge(ctx: DeRhamContext, fs, f0=None) -> Form:
    """C^{-1}(f0 df_1 ^ ... ^ df_q) = f0^p C^{-1}(df_1) ^ ... ^ C^{-1}(df_q)."""
    out = inverse_cartier(ctx, f0 if f0 is not None else ctx.target.one(), 0)
    for f in fs:
        out = wedge(out, inverse_cartier(ctx, f, 1))
    return out


def inverse_cartier_basis(ctx: DeRhamContext, mono, wedge_gens) -> Form:
    """C^{-1}(m dx_S) = m^p prod_{i in S} x_i^(p-1) dx_i for ordinary generators."""
    p = _require_prime_field(ctx)
    target = ctx.target
    m = [e * p for e in mono]
    for g in wedge_gens:
        s = ctx.gen_slots[g]
        if s >= target.n_ord:
            raise ValueError("the Frobenius-twisted source only has ordinary generators")
        m[s] += p - 1
    if target.weight(m) > target.weight_bound:
        raise TruncationOverflow(target.weight(m), target.weight_bound)
    return Form(ctx, {(tuple(m), tuple(wedge_gens)): ctx.domain(1)}, len(wedge_gens))


def cartier_source_basis(ctx: DeRhamContext, weight: int, degree: int):
    """Basis of the Frobenius-twisted source in target weight ``weight``.

    For Gamma_{F_p[X]}(Y) the divided variables contribute nothing (divided
    Poincare lemma), so the source is Omega^degree of F_p[X] in weight
    ``weight / p``.
    """
    p = _require_prime_field(ctx)
    if weight % p:
        return []
    w = weight // p
    ord_gens = [g for g, s in enumerate(ctx.gen_slots) if s < ctx.target.n_ord]
    if degree > len(ord_gens) or degree > w:
        return []
    out = []
    zero = [0] * ctx.target.nvars
    for exps in compositions(w - degree, len(ord_gens)):
        m = list(zero)
        for g, e in zip(ord_gens, exps):
            m[ctx.gen_slots[g]] = e
        for S in combinations(ord_gens, degree):
            out.append((tuple(m), S))
    return out


@dataclass
class CartierReport:
    weight: int
    degree: int
    source_rank: int
    h_rank: int
    closed: bool
    independent: bool

    @property
    def passed(self) -> bool:
        return self.closed and self.independent and self.source_rank == self.h_rank

    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "degree": self.degree,
            "source_rank": self.source_rank,
            "rank": self.h_rank,
            "closed": self.closed,
            "independent": self.independent,
            "pass": self.passed,
        }


def cartier_check(ctx: DeRhamContext, weight: int, degree: int) -> CartierReport:
    """C^{-1}: source_weight/p -> H^degree_weight is an isomorphism.

    The images are closed, independent modulo exact forms, and as many as
    the rank of H^degree_weight; together these say the induced matrix is
    square and invertible.
    """
    _require_field_base(ctx)
    src = cartier_source_basis(ctx, weight, degree)
    images = [inverse_cartier_basis(ctx, m, S) for m, S in src]
    h = graded_cohomology(ctx, weight, degree)
    closed = all(not d(im) for im in images)
    dst = ctx.basis(weight, degree)
    index = {k: i for i, k in enumerate(dst)}
    exact_cols = _d_matrix(ctx, weight, degree - 1)[0] if degree > 0 else []
    image_cols = [{index[k]: c for k, c in im.terms.items()} for im in images]
    r_exact = _rank(exact_cols, len(dst), ctx)
    r_all = _rank(exact_cols + image_cols, len(dst), ctx)
    independent = r_all - r_exact == len(images)
    return CartierReport(weight, degree, len(src), h, closed, independent)


def cartier_table(ctx: DeRhamContext, weight_bound: int, executor=None):
    jobs = [(w, q) for w in range(weight_bound + 1) for q in range(ctx.ngens + 1)]
    mapper = executor.map if executor is not None else map
    return list(mapper(lambda wq: cartier_check(ctx, *wq), jobs))


def additivity_witness(p: int) -> dict:
    """(u+v)^(p-1) d(u+v) - u^(p-1) du - v^(p-1) dv = d(sum_j C(p,j)/p u^j v^(p-j)).

    Checked exactly over Q; then the antiderivative is shown to be p-local so
    the identity reduces mod p, where both sides define the same class.
    """
    ctx = DeRhamContext.over_field(("u", "v"), (), QQ, weight_bound=0)
    R = ctx.target
    u, v = R.var("u"), R.var("v")
    F = ctx.function
    lhs = F((u + v) ** (p - 1)) * d(F(u + v)) - F(u ** (p - 1)) * d(F(u)) - F(v ** (p - 1)) * d(F(v))
    anti = R.zero()
    for j in range(1, p):
        anti = anti + (u ** j * v ** (p - j)).scale(Fraction(math.comb(p, j), p))
    rhs = d(F(anti))
    exact = lhs == rhs
    p_local = all(is_p_local(c, p) for c in anti.terms.values())

    red = DeRhamContext.over_field(("u", "v"), (), PrimeField(p), weight_bound=0)
    Rp = red.target
    anti_bar = Rp.from_terms({m: mod_p(c, p) for m, c in anti.terms.items()})
    up, vp_ = Rp.var("u"), Rp.var("v")
    C = lambda f: inverse_cartier(red, f, 1)
    diff = C(up + vp_) - C(up) - C(vp_)
    reduced = diff == d(red.function(anti_bar))
    return {"exact": exact, "p_local": p_local, "reduced": reduced, "antiderivative": anti}


def leibniz_witness(f, g) -> bool:
    """(fg)^(p-1) d(fg) = f^p g^(p-1) dg + g^p f^(p-1) df, exactly."""
    ctx = DeRhamContext(f.ring)
    p = _require_prime_field(ctx)
    F = ctx.function
    lhs = inverse_cartier(ctx, f * g, 1)
    rhs = F(f ** p) * inverse_cartier(ctx, g, 1) + F(g ** p) * inverse_cartier(ctx, f, 1)
    return lhs == rhs


# -- JSON ----------------------------------------------------------------


def form_to_json(f: Form) -> list:
    ctx = f.ctx
    target = ctx.target
    out = []
    for (m, w), c in f.sorted_terms():
        mono = {}
        for name, e in zip(target.ordinary_vars, m[: target.n_ord]):
            if e:
                mono[name] = e
        for name, e in zip(target.divided_vars, m[target.n_ord:]):
            if e:
                mono[f"g:{name}"] = e
        out.append({"c": scalar_str(c), "m": mono, "w": [ctx.gen_names[g] for g in w]})
    return out


def form_from_json(ctx: DeRhamContext, data: list, degree: int | None = None) -> Form:
    target = ctx.target
    raw = {}
    deg = degree
    for t in data:
        m = [0] * target.nvars
        for key, e in t["m"].items():
            name = key[2:] if key.startswith("g:") else key
            m[target.index(name)] = e
        gens = [ctx.gen_names.index(n) for n in t["w"]]
        if len(set(gens)) != len(gens):
            continue
        inv = sum(1 for i in range(len(gens)) for j in range(i + 1, len(gens)) if gens[i] > gens[j])
        key = (tuple(m), tuple(sorted(gens)))
        if deg is None:
            deg = len(gens)
        raw[key] = raw.get(key, 0) + (-1) ** inv * parse_scalar(t["c"])
    return Form._build(ctx, raw, deg or 0)
