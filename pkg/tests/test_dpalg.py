import random
from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import given, strategies as st

from gammadelta import dpalg
from gammadelta.dpalg import PDContext, divided_power, element_from_json, element_to_json, pd_filtration_weight
from gammadelta.errors import NotInIdeal, TruncationOverflow, ZeroElement
from gammadelta.scalars import PrimeField, QQ, gamma_comp_coeff
from gammadelta.sparse import PolyRing
from gammadelta.suites import pd_axiom_checks, random_pd_element


def to_polynomial(f):
    """Oracle: over Q, Gamma_Q[X](Y) = Q[X, Y] via g_k(y) -> y^k / k!."""
    ctx = f.ring
    ring = PolyRing(ctx.names, QQ)
    raw = {}
    for m, c in f.terms.items():
        scale = Fraction(1)
        for e in m[ctx.n_ord:]:
            scale /= factorial(e)
        raw[m] = raw.get(m, 0) + c * scale
    return ring.from_terms(raw)


@pytest.fixture
def two():
    return PDContext(("x",), ("y1", "y2"), QQ, 12)


def test_gamma_of_sum_two_variables(two):
    f = divided_power(2, two.gamma("y1") + two.gamma("y2"))
    assert str(f) == "g_2(y1) + y1*y2 + g_2(y2)"


def test_product_law_example():
    ctx = PDContext((), ("y",), QQ, 12)
    assert ctx.gamma("y", 2) * ctx.gamma("y", 3) == ctx.gamma("y", 5, 10)


def test_scalar_and_composition_examples():
    ctx = PDContext((), ("y",), QQ, 12)
    assert divided_power(2, ctx.gamma("y").scale(2)) == ctx.gamma("y", 2, 4)
    assert divided_power(2, ctx.gamma("y", 2)) == ctx.gamma("y", 4, 3)
    assert divided_power(0, ctx.gamma("y")) == ctx.one()


def test_ordinary_factor_pulls_out():
    ctx = PDContext(("x",), ("y",), QQ, 12)
    x, y = ctx.var("x"), ctx.gamma("y")
    assert str(divided_power(2, x * y)) == "x^2*g_2(y)"


def test_errors():
    ctx = PDContext(("x",), ("y",), QQ, 5)
    with pytest.raises(NotInIdeal):
        divided_power(2, ctx.var("x") + ctx.gamma("y"))
    with pytest.raises(TruncationOverflow, match="raise --weight-bound to at least 6"):
        divided_power(3, ctx.gamma("y", 2))
    with pytest.raises(TruncationOverflow):
        ctx.gamma("y", 3) * ctx.gamma("y", 3)
    with pytest.raises(ZeroElement):
        pd_filtration_weight(ctx.zero())


def test_filtration_weight():
    ctx = PDContext(("x",), ("y",), QQ, 12)
    f = ctx.gamma("y", 2) + ctx.var("x") * ctx.gamma("y", 5)
    assert pd_filtration_weight(f) == 2
    assert f.weight == 5


def test_mod_p_truncation_kills_nothing_extra():
    # over F_2, g_1(y)^2 = 2 g_2(y) = 0
    ctx = PDContext((), ("y",), PrimeField(2), 12)
    assert not ctx.gamma("y") ** 2
    assert ctx.gamma("y") ** 3 == ctx.zero()


@given(st.integers(0, 10 ** 6), st.integers(0, 6), st.integers(0, 6))
def test_gamma_of_random_element_matches_power_over_factorial(seed, n, m):
    ctx = PDContext(("x",), ("y1", "y2"), QQ, 12)
    rng = random.Random(seed)
    f = random_pd_element(rng, ctx)
    W = f.weight
    n = min(n, 12 // W)
    got = to_polynomial(divided_power(n, f))
    want = to_polynomial(f) ** n
    assert got == want.scale(Fraction(1, factorial(n)))


@given(st.integers(0, 10 ** 6))
def test_multiplication_is_the_polynomial_product(seed):
    ctx = PDContext(("x",), ("y1", "y2"), QQ, 12)
    rng = random.Random(seed)
    f, g = random_pd_element(rng, ctx, 3), random_pd_element(rng, ctx, 3)
    assert to_polynomial(f * g) == to_polynomial(f) * to_polynomial(g)


@given(st.integers(1, 6), st.integers(1, 6))
def test_composition_coefficient_is_integral_and_matches(n, m):
    if n * m > 12:
        return
    ctx = PDContext((), ("y",), QQ, 12)
    assert divided_power(n, ctx.gamma("y", m)) == ctx.gamma("y", n * m, gamma_comp_coeff(n, m))


@given(st.integers(0, 10 ** 6), st.sampled_from([2, 3, 5]))
def test_axioms_hold_mod_p(seed, p):
    fails = pd_axiom_checks(p, 12, 3, random.Random(seed))
    assert not any(fails.values()), fails


@given(st.integers(0, 10 ** 6))
def test_extraction_order_does_not_matter(seed):
    ctx = PDContext(("x",), ("y1", "y2"), QQ, 12)
    f = random_pd_element(random.Random(seed), ctx)
    a = divided_power(3, f, ("y1", "y2"))
    b = divided_power(3, f, ("y2", "y1"))
    assert a == b


@pytest.mark.parametrize("r", [1, 2, 3])
@pytest.mark.parametrize("filtration", ["adic", "pd"])
def test_graded_ranks(r, filtration):
    ctx = PDContext(("x",), tuple(f"y{j}" for j in range(r)), PrimeField(3), 12)
    for n in range(9):
        got, expected, ok = dpalg.gr_rank(ctx, filtration, n)
        assert ok and got == expected == comb(n + r - 1, r - 1)


def test_conjugate_filtration_generators_p2():
    ctx = PDContext((), ("y",), PrimeField(2), 12)
    rep = dpalg.conj_fil_pd(ctx, 4)
    assert rep.passed
    assert [str(e.generators[0]) for e in rep.entries] == ["1", "g_2(y)", "g_4(y)", "g_6(y)", "g_8(y)"]
    assert all(e.extra["dim_step"] == 2 for e in rep.entries)


def test_conjugate_filtration_needs_room():
    ctx = PDContext((), ("y",), PrimeField(3), 8)
    with pytest.raises(TruncationOverflow):
        dpalg.conj_fil_pd(ctx, 3)


@pytest.mark.parametrize("p,bound", [(2, 8), (3, 9), (5, 10)])
def test_mod_p_basis_change(p, bound):
    mat, ok = dpalg.mod_p_basis_change(p, bound)
    assert ok
    # x^a = a! g_a(x), so x^a g_{pm}(x) = a! C(n, a) g_n(x): diagonal only
    for n in range(bound + 1):
        a = n % p
        assert mat.row(n) == {n: factorial(a) * comb(n, a) % p}


def test_json_roundtrip(two):
    f = two.gamma("y1", 3).scale(Fraction(2, 3)) - two.var("x") * two.gamma("y2")
    data = element_to_json(f)
    assert data["terms"] == [{"c": "-1", "m": {"x": 1, "g:y2": 1}}, {"c": "2/3", "m": {"g:y1": 3}}]
    assert element_from_json(two, data) == f
