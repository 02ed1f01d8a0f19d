"""Free divided-power algebras Gamma_{R[X]}(Y) and their filtrations.

A monomial ``x^a g_n(y)`` is stored as an exponent tuple: ordinary
exponents first, then the divided indices ``n``.  Multiplication of
divided variables follows ``g_m(y) g_n(y) = C(m+n, m) g_{m+n}(y)``; the
divided-power weight (sum of divided indices) is capped by the context's
``weight_bound`` and exceeding it raises :class:`TruncationOverflow`.
"""

from __future__ import annotations

import itertools
from math import comb

from .errors import ContextMismatch, NotInIdeal, TruncationOverflow, ZeroElement
from .exactla import ExactMatrix, rank as matrix_rank
from .reports import FiltrationReport, GradedEntry
from .scalars import QQ, PrimeField, gamma_comp_coeff, parse_scalar, scalar_str
from .sparse import Element, PolyRing


class DPElement(Element):
    __slots__ = ()

    @property
    def weight(self) -> int:
        """Largest divided-power weight of a term (0 for scalars)."""
        return max((self.ring.weight(m) for m in self.terms), default=0)


class PDContext(PolyRing):
    """The standard PD-pair Gamma_{R[X]}(Y) ->> R[X], truncated in weight."""

    element_class = DPElement

    def __init__(self, ordinary_vars=(), divided_vars=(), domain=QQ, weight_bound: int = 12):
        ordinary_vars = tuple(ordinary_vars)
        divided_vars = tuple(divided_vars)
        super().__init__(ordinary_vars + divided_vars, domain)
        if weight_bound < 0:
            raise ValueError("weight_bound must be >= 0")
        self.ordinary_vars = ordinary_vars
        self.divided_vars = divided_vars
        self.weight_bound = weight_bound
        self.n_ord = len(ordinary_vars)

    def _key(self):
        return ("PD", self.ordinary_vars, self.divided_vars, self.domain, self.weight_bound)

    def __repr__(self):
        return (
            f"PDContext(ordinary={list(self.ordinary_vars)}, divided={list(self.divided_vars)}, "
            f"{self.domain!r}, N={self.weight_bound})"
        )

    def with_bound(self, weight_bound: int) -> "PDContext":
        return PDContext(self.ordinary_vars, self.divided_vars, self.domain, weight_bound)

    def with_domain(self, domain) -> "PDContext":
        return PDContext(self.ordinary_vars, self.divided_vars, domain, self.weight_bound)

    # -- monomial rules -------------------------------------------------

    def weight(self, m) -> int:
        return sum(m[self.n_ord:])

    def mul_mono(self, a, b):
        k = self.n_ord
        w = sum(a[k:]) + sum(b[k:])
        if w > self.weight_bound:
            raise TruncationOverflow(w, self.weight_bound)
        coeff = 1
        for i in range(k, self.nvars):
            if a[i] and b[i]:
                coeff *= comb(a[i] + b[i], a[i])
        return coeff, tuple(x + y for x, y in zip(a, b))

    def term_key(self, m):
        k = self.n_ord
        return (
            sum(m[k:]),
            tuple(-e for e in m[k:]),
            sum(m[:k]),
            tuple(-e for e in m[:k]),
        )

    def mono_str(self, m) -> str:
        parts = []
        for name, e in zip(self.ordinary_vars, m[: self.n_ord]):
            if e == 1:
                parts.append(name)
            elif e:
                parts.append(f"{name}^{e}")
        for name, e in zip(self.divided_vars, m[self.n_ord:]):
            if e == 1:
                parts.append(name)
            elif e:
                parts.append(f"g_{e}({name})")
        return "*".join(parts)

    # -- constructors ---------------------------------------------------

    def gamma(self, name, n: int = 1, coeff=1):
        """The basis element g_n(name) of a divided variable."""
        if name not in self.divided_vars:
            raise KeyError(f"{name!r} is not a divided variable")
        if n > self.weight_bound:
            raise TruncationOverflow(n, self.weight_bound)
        m = [0] * self.nvars
        m[self.index(name)] = n
        return self.monomial(m, coeff)

    def monomials_of_weight(self, n: int):
        """Divided monomials (no ordinary part) of weight exactly ``n``."""
        r = len(self.divided_vars)
        for beta in compositions(n, r):
            yield (0,) * self.n_ord + beta


def compositions(n: int, r: int):
    """All r-tuples of non-negative ints summing to n, in descending lex order."""
    if r == 0:
        if n == 0:
            yield ()
        return
    if r == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in compositions(n - first, r - 1):
            yield (first,) + rest


def _check_same(a, b):
    if a.ring != b.ring:
        raise ContextMismatch("elements live in different PD contexts")


def mul(a: DPElement, b: DPElement) -> DPElement:
    _check_same(a, b)
    return a * b


def _gamma_of_term(ctx: PDContext, n: int, mono, coeff, order):
    """g_n of a single term ``coeff * mono`` of positive weight."""
    if n == 0:
        return ctx.one()
    if n == 1:
        return ctx.monomial(mono, coeff)
    for name in order:
        i = ctx.index(name)
        if mono[i] > 0:
            break
    b = mono[i]
    if n * b > ctx.weight_bound:
        raise TruncationOverflow(n * b, ctx.weight_bound)
    rest = list(mono)
    rest[i] = 0
    unit = ctx.monomial(rest, coeff)
    top = [0] * ctx.nvars
    top[i] = n * b
    # g_n(u * g_b(y)) = u^n * g_n(g_b(y)),  g_n(g_b(y)) = coeff(n, b) g_{nb}(y)
    return (unit ** n) * ctx.monomial(top, gamma_comp_coeff(n, b))


def divided_power(n: int, f: DPElement, extraction_order=None) -> DPElement:
    """g_n(f) for f in the divided-power ideal.

    Sums expand as ``g_n(a + b) = sum_i g_i(a) g_{n-i}(b)``.  A single
    term ``c u g_b(y)`` is handled by pulling out the first divided variable
    of ``extraction_order`` (default: names sorted lexicographically) that
    occurs in it.
    """
    ctx = f.ring
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return ctx.one()
    if not f.terms:
        return ctx.zero()
    order = tuple(extraction_order) if extraction_order is not None else tuple(sorted(ctx.divided_vars))
    if set(order) != set(ctx.divided_vars):
        raise ValueError("extraction order must list every divided variable")
    for m in f.terms:
        if ctx.weight(m) == 0:
            raise NotInIdeal(f"term {ctx.mono_str(m) or '1'} has weight 0")
    wmin = min(ctx.weight(m) for m in f.terms)
    if n * wmin > ctx.weight_bound:
        raise TruncationOverflow(n * wmin, ctx.weight_bound)
    # running list acc[k] = g_k(sum of the terms processed so far)
    acc = None
    for mono, c in sorted(f.terms.items(), key=lambda t: ctx.term_key(t[0])):
        powers = [_gamma_of_term(ctx, k, mono, c, order) for k in range(n + 1)]
        if acc is None:
            acc = powers
            continue
        acc = [
            sum((acc[i] * powers[k - i] for i in range(k + 1)), ctx.zero())
            for k in range(n + 1)
        ]
    return acc[n]


def pd_filtration_weight(f: DPElement) -> int:
    """Largest n with f in I^[n]: the minimum weight over the terms of f."""
    if not f.terms:
        raise ZeroElement("the zero element lies in every I^[n]")
    return min(f.ring.weight(m) for m in f.terms)


# -- graded pieces ------------------------------------------------------


def _labelled_partitions(n: int, r: int, max_part=None):
    """Multisets of (part, label) with parts summing to n; label in range(r)."""
    if n == 0:
        yield ()
        return
    if max_part is None:
        max_part = (n, r - 1)
    for part in range(min(n, max_part[0]), 0, -1):
        top_label = max_part[1] if part == max_part[0] else r - 1
        for label in range(top_label, -1, -1):
            for rest in _labelled_partitions(n - part, r, (part, label)):
                yield ((part, label),) + rest


def _span_rank(elements, field):
    index = {}
    cols = []
    for e in elements:
        col = {}
        for m, c in e.terms.items():
            col[index.setdefault(m, len(index))] = c
        cols.append(col)
    return matrix_rank(ExactMatrix.from_columns(cols, len(index), field))


def _linear_field(domain):
    return domain if domain.is_prime_field else QQ


def binomial_rank(n: int, r: int) -> int:
    """C(n+r-1, r-1): rank of Sym^n or Gamma^n of a free module of rank r."""
    if r == 0:
        return 1 if n == 0 else 0
    return comb(n + r - 1, r - 1)


def gr_rank(ctx: PDContext, filtration: str, n: int):
    """Rank of gr^n of the PD or adic filtration at the standard pair.

    The rank is measured as the dimension of the span of all weight-n
    products of generators (divided powers g_i(y) resp. variables y),
    computed by exact elimination.
    Returns ``(rank, expected, pass)``.
    """
    if n > ctx.weight_bound:
        raise TruncationOverflow(n, ctx.weight_bound)
    r = len(ctx.divided_vars)
    expected = binomial_rank(n, r)
    field = _linear_field(ctx.domain)
    if filtration == "pd":
        products = []
        for parts in _labelled_partitions(n, r):
            e = ctx.one()
            for i, j in parts:
                e = e * ctx.gamma(ctx.divided_vars[j], i)
            products.append(e)
    elif filtration == "adic":
        ring = PolyRing(ctx.ordinary_vars + ctx.divided_vars, ctx.domain)
        ys = [ring.var(y) for y in ctx.divided_vars]
        products = []
        for combo in itertools.combinations_with_replacement(range(r), n):
            e = ring.one()
            for j in combo:
                e = e * ys[j]
            products.append(e)
    else:
        raise ValueError("filtration must be 'pd' or 'adic'")
    got = _span_rank(products, field) if products else 0
    return got, expected, got == expected


def _product_gammas(ctx, exps):
    e = ctx.one()
    for name, k in zip(ctx.divided_vars, exps):
        if k:
            e = e * ctx.gamma(name, k)
    return e


def conj_fil_pd(ctx: PDContext, i: int) -> FiltrationReport:
    """Conjugate filtration on Gamma_{F_p[X]}(Y) up to index -i.

    Fil^{-j} is the span, over the image of Frobenius-twisted A/I (which in
    B is F_p[X] with basis y^a, a < p, per divided variable), of products
    g_{k_1 p}(y_1) ... g_{k_r p}(y_r) with k_1 + ... + k_r <= j.  The rank of
    gr^{-j} over that image is (dim Fil^{-j} - dim Fil^{-j+1}) / p^r.
    """
    if not isinstance(ctx.domain, PrimeField):
        raise ValueError("conj_fil_pd needs a prime-field coefficient domain")
    p = ctx.domain.p
    r = len(ctx.divided_vars)
    need = i * p + r * (p - 1)
    if need > ctx.weight_bound:
        raise TruncationOverflow(need, ctx.weight_bound)
    frob_basis = []
    for a in itertools.product(range(p), repeat=r):
        e = ctx.one()
        for name, ai in zip(ctx.divided_vars, a):
            if ai:
                e = e * ctx.gamma(name) ** ai
        frob_basis.append(e)

    report = FiltrationReport(name="conj-fil-pd")
    fil_span = []
    prev_dim = 0
    for j in range(i + 1):
        gens = [_product_gammas(ctx, tuple(k * p for k in ks)) for ks in compositions(j, r)]
        fil_span.extend(b * g for g in gens for b in frob_basis)
        dim = _span_rank(fil_span, ctx.domain)
        diff = dim - prev_dim
        prev_dim = dim
        expected = binomial_rank(j, r)
        rank, rem = divmod(diff, p ** r)
        entry = GradedEntry(
            index=-j,
            rank=rank,
            expected=expected,
            generators=gens,
            passed=(rem == 0 and rank == expected == len(gens)),
            extra={"fil_dim": dim, "dim_step": diff},
        )
        report.entries.append(entry)
    return report


def mod_p_basis_change(p: int, bound: int, weight_bound: int | None = None, var: str = "x"):
    """Change of basis between g_n(x) and x^a g_{pm}(x), n = a + pm, a < p.

    Column ``n`` holds the coordinates of ``x^a * g_{pm}(x)`` in the basis
    g_0, ..., g_bound, computed by multiplication in Gamma_{F_p}(x).
    Returns ``(matrix, invertible)``.
    """
    field = PrimeField(p)
    N = bound if weight_bound is None else weight_bound
    if bound > N:
        raise TruncationOverflow(bound, N)
    ctx = PDContext((), (var,), field, N)
    x = ctx.gamma(var)
    columns = []
    for n in range(bound + 1):
        a, m = n % p, n // p
        e = x ** a * ctx.gamma(var, p * m)
        columns.append({mono[0]: c for mono, c in e.terms.items()})
    mat = ExactMatrix.from_columns(columns, bound + 1, field)
    diag_ok = all(mat.row(n).get(n, 0) != 0 for n in range(bound + 1))
    return mat, diag_ok and matrix_rank(mat) == bound + 1


# -- JSON ------------------------------------------------------------------


def element_to_json(f: DPElement) -> dict:
    ctx = f.ring
    terms = []
    for m, c in f.sorted_terms():
        mono = {}
        for name, e in zip(ctx.ordinary_vars, m[: ctx.n_ord]):
            if e:
                mono[name] = e
        for name, e in zip(ctx.divided_vars, m[ctx.n_ord:]):
            if e:
                mono[f"g:{name}"] = e
        terms.append({"c": scalar_str(c), "m": mono})
    return {"terms": terms}


def element_from_json(ctx: PDContext, data: dict) -> DPElement:
    raw = {}
    for t in data["terms"]:
        m = [0] * ctx.nvars
        for key, e in t["m"].items():
            name = key[2:] if key.startswith("g:") else key
            if key.startswith("g:") != (name in ctx.divided_vars):
                raise ValueError(f"variable {key!r} does not match the context")
            m[ctx.index(name)] = e
        if ctx.weight(m) > ctx.weight_bound:
            raise TruncationOverflow(ctx.weight(m), ctx.weight_bound)
        m = tuple(m)
        raw[m] = raw.get(m, 0) + parse_scalar(t["c"])
    return ctx.from_terms(raw)
