"""Lemma-keyed verification suites used by ``gammadelta verify``.

A suite is a list of sections; each section is a zero-argument callable
returning :class:`Check` records.  Sections are independent, so the CLI may
run them on worker threads and still print in a fixed order.

Random inputs come from :class:`random.Random` seeded per section, so a
section's output does not depend on which thread ran it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from . import derham, dpalg, deltaring, prismenv
from .deltaring import DeltaContext, delta, frobenius
from .derham import DeRhamContext, Form
from .dpalg import PDContext, divided_power
from .errors import GammaDeltaError
from .scalars import PrimeField, QQ, gamma_comp_coeff

SUITES = ("pd", "delta", "prism", "derham")


@dataclass
class Check:
    key: str
    passed: bool
    detail: str = ""
    gating: bool = True

    def to_json(self) -> dict:
        return {"key": self.key, "pass": self.passed, "detail": self.detail, "gating": self.gating}

    def line(self) -> str:
        tag = ("PASS" if self.passed else "FAIL") if self.gating else ("info" if self.passed else "INFO")
        text = f"{tag} {self.key}"
        return f"{text} [{self.detail}]" if self.detail else text


@dataclass
class Config:
    p: int = 2
    weight_bound: int = 12
    depth_bound: int = 4
    seed: int = 0
    samples: int = 25
    extra: dict = field(default_factory=dict)

    def rng(self, tag: str) -> random.Random:
        return random.Random(f"{self.seed}:{tag}")


def _guard(key, fn):
    """Run ``fn``; a library error becomes a failed check instead of a crash."""
    try:
        return fn()
    except GammaDeltaError as exc:
        return [Check(key, False, str(exc))]


# -- random inputs -----------------------------------------------------------


def random_pd_element(rng: random.Random, ctx: PDContext, max_weight: int = 2, max_terms: int = 3):
    """A random element of the divided-power ideal with divided weight <= max_weight."""
    dom = ctx.domain
    while True:
        raw = {}
        for _ in range(rng.randint(1, max_terms)):
            m = [0] * ctx.nvars
            for i in range(ctx.n_ord):
                m[i] = rng.randint(0, 2)
            w = rng.randint(1, max_weight)
            for _ in range(w):
                m[ctx.n_ord + rng.randrange(len(ctx.divided_vars))] += 1
            raw[tuple(m)] = raw.get(tuple(m), 0) + rng.randint(1, 5)
        f = ctx.from_terms({m: dom(c) for m, c in raw.items()})
        if f:
            return f


def random_base_scalar(rng: random.Random, ctx: PDContext):
    """A random element of the base A[X] (weight 0)."""
    raw = {}
    for _ in range(rng.randint(1, 2)):
        m = [0] * ctx.nvars
        for i in range(ctx.n_ord):
            m[i] = rng.randint(0, 1)
        raw[tuple(m)] = rng.randint(1, 4)
    return ctx.from_terms(raw)


def random_delta_element(rng: random.Random, ctx: DeltaContext, max_degree: int = 2, max_terms: int = 3):
    """Random element in the first two tower levels, integer coefficients."""
    levels = min(ctx.depth_bound, 1)
    slots = [ctx.slot(g, k) for g in ctx.generators for k in range(levels + 1)]
    raw = {}
    for _ in range(rng.randint(1, max_terms)):
        m = [0] * ctx.nvars
        for _ in range(rng.randint(0, max_degree)):
            m[rng.choice(slots)] += 1
        c = rng.choice([-3, -2, -1, 1, 2, 3])
        raw[tuple(m)] = raw.get(tuple(m), 0) + c
    return ctx.from_terms(raw)


def random_form(rng: random.Random, ctx: DeRhamContext, degree: int, max_dweight: int = 3, max_terms: int = 3) -> Form:
    from itertools import combinations

    target = ctx.target
    wedges = list(combinations(range(ctx.ngens), degree))
    raw = {}
    for _ in range(rng.randint(1, max_terms)):
        m = [0] * target.nvars
        for i in range(target.n_ord):
            m[i] = rng.randint(0, 2)
        for _ in range(rng.randint(0, max_dweight)):
            if target.divided_vars:
                m[target.n_ord + rng.randrange(len(target.divided_vars))] += 1
        key = (tuple(m), rng.choice(wedges))
        raw[key] = raw.get(key, 0) + rng.randint(1, 4)
    return ctx.form(raw, degree)


# -- pd ---------------------------------------------------------------------


def pd_axiom_checks(p: int, weight_bound: int, samples: int, rng: random.Random):
    """Counts of failures of the six divided-power axioms on random elements."""
    ctx = PDContext(("x",), ("y1", "y2"), PrimeField(p), weight_bound)
    N = weight_bound
    fails = {k: 0 for k in ("gamma0", "gamma1", "product", "scalar", "sum", "composition")}
    for _ in range(samples):
        f = random_pd_element(rng, ctx)
        g = random_pd_element(rng, ctx)
        W = max(ctx.weight(m) for m in f.terms)
        Wg = max(W, max(ctx.weight(m) for m in g.terms))
        fails["gamma0"] += divided_power(0, f) != ctx.one()
        fails["gamma1"] += divided_power(1, f) != f
        n = rng.randint(0, N // W)
        m = rng.randint(0, N // W - n)
        lhs = divided_power(n, f) * divided_power(m, f)
        fails["product"] += lhs != divided_power(n + m, f).scale(comb(n + m, n))
        a = random_base_scalar(rng, ctx)
        n = rng.randint(0, N // W)
        fails["scalar"] += divided_power(n, a * f) != a ** n * divided_power(n, f)
        n = rng.randint(0, N // Wg)
        rhs = ctx.zero()
        for i in range(n + 1):
            rhs = rhs + divided_power(i, f) * divided_power(n - i, g)
        fails["sum"] += divided_power(n, f + g) != rhs
        n = rng.randint(1, max(1, N // W))
        m = rng.randint(1, max(1, N // (W * n)))
        if n * m * W <= N:
            lhs = divided_power(n, divided_power(m, f))
            fails["composition"] += lhs != divided_power(n * m, f).scale(gamma_comp_coeff(n, m))
    return fails


def _pd_axioms(cfg: Config):
    fails = pd_axiom_checks(cfg.p, cfg.weight_bound, cfg.samples, cfg.rng("pd-axioms"))
    return [Check(f"pd-axioms/{k}", v == 0, f"{cfg.samples} samples, {v} failures") for k, v in fails.items()]


def _pd_gr(cfg: Config):
    out = []
    for r in (1, 2, 3):
        ctx = PDContext(("x",), tuple(f"y{j + 1}" for j in range(r)), PrimeField(cfg.p), cfg.weight_bound)
        for n in range(min(8, cfg.weight_bound) + 1):
            for filt, key in (("adic", "symm-cot-cx/adic-gr"), ("pd", "pdfil-free-pdalg/pd-gr")):
                got, exp, ok = dpalg.gr_rank(ctx, filt, n)
                out.append(Check(key, ok, f"r={r} n={n} rank={got} expected={exp}"))
    return out


def _pd_conj(cfg: Config):
    out = []
    p, N = cfg.p, cfg.weight_bound
    for r in (1, 2):
        top = min(4, (N - r * (p - 1)) // p)
        if top < 0:
            out.append(Check("bhatt-conj-fil/gr-rank", False, f"r={r}: weight bound {N} too small", gating=False))
            continue
        ctx = PDContext((), tuple(f"y{j + 1}" for j in range(r)), PrimeField(p), N)
        rep = dpalg.conj_fil_pd(ctx, top)
        for e in rep.entries:
            gens = ", ".join(str(g) for g in e.generators)
            out.append(Check("bhatt-conj-fil/gr-rank", e.passed, f"r={r} j={-e.index} rank={e.rank} gens={gens}"))
    return out


def _pd_basis(cfg: Config):
    p = cfg.p
    bound = min(p ** 3 if p == 2 else p ** 2, cfg.weight_bound)
    _, ok = dpalg.mod_p_basis_change(p, bound, cfg.weight_bound)
    return [Check("mod-p-basis/invertible", ok, f"weights <= {bound}")]


def pd_suite(cfg: Config):
    return [
        lambda: _guard("pd-axioms", lambda: _pd_axioms(cfg)),
        lambda: _guard("pd-gr", lambda: _pd_gr(cfg)),
        lambda: _guard("bhatt-conj-fil", lambda: _pd_conj(cfg)),
        lambda: _guard("mod-p-basis", lambda: _pd_basis(cfg)),
    ]


# -- delta -------------------------------------------------------------------


def delta_axiom_checks(p: int, depth_bound: int, samples: int, rng: random.Random):
    ctx = DeltaContext(("x", "y"), max(depth_bound, 2), p, "p-local")
    fails = {k: 0 for k in ("sum", "product", "frobenius-lift", "frobenius-hom")}
    for _ in range(samples):
        a = random_delta_element(rng, ctx)
        b = random_delta_element(rng, ctx)
        P = sum(((a ** i * b ** (p - i)).scale(Fraction(comb(p, i), p)) for i in range(1, p)), ctx.zero())
        fails["sum"] += delta(a + b) != delta(a) + delta(b) - P
        rhs = a ** p * delta(b) + b ** p * delta(a) + (delta(a) * delta(b)).scale(p)
        fails["product"] += delta(a * b) != rhs
        fails["frobenius-lift"] += frobenius(a) != a ** p + delta(a).scale(p)
        fails["frobenius-hom"] += frobenius(a * b) != frobenius(a) * frobenius(b)
    return fails


def delta_power_checks(p: int, depth_bound: int, samples: int, rng: random.Random) -> int:
    ctx = DeltaContext(("x", "y"), max(depth_bound, 2), p, "p-local")
    return sum(not deltaring.verify_delta_power(random_delta_element(rng, ctx, max_degree=2, max_terms=2)) for _ in range(samples))


def _delta_axioms(cfg: Config):
    fails = delta_axiom_checks(cfg.p, cfg.depth_bound, cfg.samples, cfg.rng("delta-axioms"))
    return [Check(f"delta-ring/{k}", v == 0, f"{cfg.samples} samples, {v} failures") for k, v in fails.items()]


def _delta_power(cfg: Config):
    bad = delta_power_checks(cfg.p, cfg.depth_bound, cfg.samples, cfg.rng("delta-power"))
    return [Check("delta-power/identity", bad == 0, f"{cfg.samples} samples, {bad} failures")]


def _delta_identities(cfg: Config):
    ok, info = deltaring.delta_divided_identity(cfg.p, details=True)
    out = [Check(f"delta-divided/{k}", v, f"p={cfg.p}") for k, v in info.items() if k != "value"]
    out.append(Check("delta-divided/identity", ok, f"p={cfg.p}"))
    out.append(Check("weakly-distinguished/witness", prismenv.weakly_distinguished_witness(cfg.p), f"p={cfg.p}"))
    return out


def _delta_rat(cfg: Config):
    p = cfg.p
    out = []
    for n in range(1, (3 if p <= 3 else 2) + 1):
        D, deg, lead = deltaring.rational_normal_form(n, p)
        want = Fraction(-1, p) ** ((p ** n - 1) // (p - 1))
        out.append(Check("delta-n-rat/degree", deg == p ** n, f"n={n} deg={deg}"))
        out.append(Check("delta-n-rat/leading", lead == want, f"n={n} leading={lead}"))
    return out


def delta_suite(cfg: Config):
    return [
        lambda: _guard("delta-ring", lambda: _delta_axioms(cfg)),
        lambda: _guard("delta-power", lambda: _delta_power(cfg)),
        lambda: _guard("delta-divided", lambda: _delta_identities(cfg)),
        lambda: _guard("delta-n-rat", lambda: _delta_rat(cfg)),
    ]


# -- prism -------------------------------------------------------------------


def expand_range(p: int, depth_bound: int) -> int:
    return min(depth_bound - 1, {2: 3, 3: 2}.get(p, 1))


def _prism_expand(cfg: Config):
    base = prismenv.prism_base(cfg.p, cfg.depth_bound)
    out = []
    for n in range(1, expand_range(cfg.p, cfg.depth_bound) + 1):
        rep = prismenv.expand_delta_n(base, n)
        for k, v in rep.checks.items():
            out.append(Check(f"expand-delta-n/{k.replace('_', '-')}", v, f"n={n} a_n={rep.a_n}"))
    return out


def _prism_units(cfg: Config):
    base = prismenv.prism_base(cfg.p, cfg.depth_bound)
    out = []
    for n in range(1, min(3, cfg.depth_bound - 1) + 1):
        t = prismenv.unit_tower(base, n)
        out.append(Check("phi-d-p-local/identity", t.checks["identity"], f"n={n}"))
        out.append(Check("phi-d-p-local/unit-mod-p", t.checks["unit_mod_p"], f"n={n} u_n = d(d)^{cfg.p ** (n - 1)} mod p"))
        # the literal congruence u_n = d(d) mod p; only true for n = 1
        out.append(Check("phi-d-p-local/literal-congruence", t.checks["congruent_to_delta_d"], f"n={n}", gating=False))
    return out


def _prism_conj(cfg: Config):
    p = cfg.p
    top = min(p * p, cfg.weight_bound)
    out = []
    for r in (1, 2):
        q = prismenv.QuotientContext(p, r, max(top, 1), 3)
        for i in range(top + 1):
            rank, exp, ok = prismenv.conj_fil_gr_rank(i, r, p)
            out.append(Check("conj-fil-prism-env/gr-rank", ok, f"r={r} i={i} rank={rank}"))
            rep = prismenv.hodge_tate_iso_check(q, i)
            out.append(Check("hdg-tate/invertible", rep.passed, f"r={r} i={i}"))
    return out


def _prism_rewrite(cfg: Config):
    p = cfg.p
    q = prismenv.QuotientContext(p, 2, 4 * p * p, 3)
    rng = cfg.rng("rewrite")
    bad = 0
    for _ in range(cfg.samples):
        m = [0] * q.ring.nvars
        for j in range(2):
            m[q.z_slot(j, 0)] = rng.randint(0, p * p)
            m[q.z_slot(j, 1)] = rng.randint(0, p)
        f = q.ring.monomial(m)
        once = prismenv.standard_decomposition(q, f)
        twice = prismenv.standard_decomposition(q, once)
        bad += once != twice or not all(prismenv.is_standard(q, t) for t in once.terms)
    return [Check("conj-fil-prism-comp-eq/rewrite-idempotent", bad == 0, f"{cfg.samples} samples")]


def _prism_integrality(cfg: Config):
    p = cfg.p
    bound = min(p * p + p, cfg.weight_bound)
    out = [Check("mod-p-basis/divided-power-integrality", prismenv.divided_power_integrality(p, bound), f"n <= {bound}")]
    i = min(p * p, cfg.weight_bound)
    out.append(Check("prism-conj-fil-mod-p-rat/degree", prismenv.rational_degree_check(p, i), f"i <= {i}"))
    return out


def prism_suite(cfg: Config):
    return [
        lambda: _guard("expand-delta-n", lambda: _prism_expand(cfg)),
        lambda: _guard("phi-d-p-local", lambda: _prism_units(cfg)),
        lambda: _guard("conj-fil-prism-env", lambda: _prism_conj(cfg)),
        lambda: _guard("conj-fil-prism-comp-eq", lambda: _prism_rewrite(cfg)),
        lambda: _guard("divided-power-integrality", lambda: _prism_integrality(cfg)),
    ]


# -- derham ------------------------------------------------------------------


def derham_random_checks(p: int, weight_bound: int, samples: int, rng: random.Random):
    ctx = DeRhamContext.over_field(("x",), ("y",), PrimeField(p), weight_bound)
    fails = {"d-squared": 0, "leibniz": 0, "hodge-subcomplex": 0}
    half = max(weight_bound // 2 - 1, 0)
    for _ in range(samples):
        q = rng.randint(0, 2)
        f = random_form(rng, ctx, q, max_dweight=min(3, weight_bound))
        fails["d-squared"] += bool(derham.d(derham.d(f)))
        a = random_form(rng, ctx, rng.randint(0, 1), max_dweight=min(3, half))
        b = random_form(rng, ctx, rng.randint(0, 1), max_dweight=min(3, half))
        lhs = derham.d(derham.wedge(a, b))
        rhs = derham.wedge(derham.d(a), b) + derham.wedge(a, derham.d(b)).scale((-1) ** a.degree)
        fails["leibniz"] += lhs != rhs
        if f:
            m = min(ctx.target.weight(mono) for mono, _ in f.terms) + f.degree
            fails["hodge-subcomplex"] += not (derham.hodge_fil_membership(f, m) and derham.hodge_fil_membership(derham.d(f), m))
    return fails


def _derham_random(cfg: Config):
    fails = derham_random_checks(cfg.p, cfg.weight_bound, cfg.samples, cfg.rng("derham"))
    return [Check(f"pd-de-rham/{k}", v == 0, f"{cfg.samples} samples, {v} failures") for k, v in fails.items()]


def _derham_poincare(cfg: Config):
    F = PrimeField(cfg.p)
    N = cfg.weight_bound
    out = []
    ctx = DeRhamContext.over_field((), ("y1", "y2"), F, N)
    ok = True
    for name in ctx.target.divided_vars:
        for n in range(1, N + 1):
            lhs = derham.d(ctx.function(ctx.target.gamma(name, n)))
            ok = ok and lhs == ctx.function(ctx.target.gamma(name, n - 1)) * ctx.dgen(name)
    out.append(Check("pd-derivation/gamma-law", ok, f"n <= {N}"))
    for divided in (("y",), ("y1", "y2")):
        c = DeRhamContext.over_field((), divided, F, N)
        out.append(Check("divided-poincare/vanishing", derham.poincare_check(c, N), f"Gamma({','.join(divided)}) weights <= {N}"))
    c = DeRhamContext.over_field(("x",), (), QQ, N)
    out.append(Check("dR-rational/poincare", derham.poincare_check(c, N), f"Q[x] weights <= {N}"))
    return out


def _derham_cartier(cfg: Config):
    F = PrimeField(cfg.p)
    N = min(10, cfg.weight_bound)
    out = []
    for ords, divs in ((("x",), ()), (("x", "y"), ()), (("x",), ("y",))):
        ctx = DeRhamContext.over_field(ords, divs, F, N)
        reports = derham.cartier_table(ctx, N)
        bad = [f"w={r.weight} q={r.degree}" for r in reports if not r.passed]
        label = "F%d[%s]" % (cfg.p, ",".join(ords)) + (f"<{','.join(divs)}>" if divs else "")
        out.append(Check("cartier/isomorphism", not bad, f"{label} weights <= {N}" + (f" failing {bad}" if bad else "")))
    w = derham.additivity_witness(cfg.p)
    out.append(Check("cartier/additivity-exact", w["exact"] and w["p_local"], f"p={cfg.p}"))
    out.append(Check("cartier/additivity-mod-p", w["reduced"], f"p={cfg.p}"))
    rng = cfg.rng("cartier-leibniz")
    ctx = PDContext(("x", "y"), (), F, 0)
    bad = 0
    for _ in range(cfg.samples):
        f = _random_poly(rng, ctx)
        g = _random_poly(rng, ctx)
        bad += not derham.leibniz_witness(f, g)
    out.append(Check("cartier/leibniz", bad == 0, f"{cfg.samples} samples"))
    return out


def _random_poly(rng, ctx):
    raw = {}
    for _ in range(rng.randint(1, 3)):
        m = tuple(rng.randint(0, 2) for _ in range(ctx.nvars))
        raw[m] = raw.get(m, 0) + rng.randint(1, 4)
    return ctx.from_terms(raw)


def derham_suite(cfg: Config):
    return [
        lambda: _guard("pd-de-rham", lambda: _derham_random(cfg)),
        lambda: _guard("divided-poincare", lambda: _derham_poincare(cfg)),
        lambda: _guard("cartier", lambda: _derham_cartier(cfg)),
    ]


BUILDERS = {"pd": pd_suite, "delta": delta_suite, "prism": prism_suite, "derham": derham_suite}


def sections(name: str, cfg: Config):
    names = SUITES if name == "all" else (name,)
    out = []
    for n in names:
        out.extend((n, s) for s in BUILDERS[n](cfg))
    return out


def run(name: str, cfg: Config, executor=None):
    """Run a suite; returns ``[(suite, [Check, ...]), ...]`` in a fixed order."""
    secs = sections(name, cfg)
    if executor is None:
        results = [fn() for _, fn in secs]
    else:
        results = list(executor.map(lambda s: s[1](), secs))
    return [(n, r) for (n, _), r in zip(secs, results)]
