from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gammadelta.errors import NonPLocal
from gammadelta.scalars import (
    INF,
    PLocal,
    PrimeContext,
    PrimeField,
    QQ,
    binomial,
    gamma_comp_coeff,
    is_p_local,
    mod_p,
    parse_scalar,
    scalar_str,
    vp,
)

rationals = st.fractions(max_denominator=10 ** 4).filter(lambda q: abs(q.numerator) < 10 ** 6)
primes = st.sampled_from([2, 3, 5, 7])


def test_prime_context_rejects_composites():
    assert PrimeContext(5).p == 5
    for bad in (0, 1, 4, 9, 15):
        with pytest.raises(ValueError, match=f"{bad} is not prime"):
            PrimeContext(bad)


def test_vp_examples():
    assert vp(12, 2) == 2
    assert vp(1, 3) == 0
    assert vp(Fraction(3, 8), 2) == -3
    assert vp(0, 2) is INF


def test_infinity_orders_above_integers():
    assert vp(0, 5) > 10 ** 30
    assert min(vp(0, 5), 4) == 4
    assert vp(0, 5) + 3 is INF
    assert str(INF) == "+inf"


def test_mod_p_examples():
    assert mod_p(Fraction(1, 3), 2) == 1
    assert mod_p(Fraction(1, 2), 3) == 2
    assert mod_p(-1, 5) == 4
    with pytest.raises(NonPLocal):
        mod_p(Fraction(1, 2), 2)


def test_gamma_composition_coefficients():
    # (mn)! / (m! (n!)^m)
    assert gamma_comp_coeff(2, 2) == 3
    assert gamma_comp_coeff(2, 3) == 10
    assert gamma_comp_coeff(3, 2) == 15
    assert gamma_comp_coeff(0, 4) == 1
    assert gamma_comp_coeff(1, 7) == 1


def test_binomial_outside_range():
    assert binomial(5, 7) == 0
    assert binomial(5, -1) == 0
    assert binomial(6, 3) == 20


def test_scalar_roundtrip_strings():
    assert scalar_str(Fraction(-3, 4)) == "-3/4"
    assert scalar_str(7) == "7"
    assert parse_scalar("5/10") == Fraction(1, 2)


def test_domains_normalise():
    assert PrimeField(3)(Fraction(1, 2)) == 2
    assert PrimeField(5).inv(2) == 3
    assert QQ(3) == Fraction(3)
    with pytest.raises(NonPLocal):
        PLocal(2)(Fraction(1, 4))
    with pytest.raises(NonPLocal):
        PLocal(3).inv(6)
    assert PLocal(2).inv(3) == Fraction(1, 3)


@given(rationals, rationals, primes)
def test_vp_is_a_valuation(q, r, p):
    assert vp(q * r, p) == vp(q, p) + vp(r, p)
    s = vp(q + r, p)
    assert s >= min(vp(q, p), vp(r, p))
    if vp(q, p) != vp(r, p):
        assert s == min(vp(q, p), vp(r, p))


@given(rationals, rationals, primes)
def test_reduction_is_a_ring_map(q, r, p):
    if is_p_local(q, p) and is_p_local(r, p):
        assert mod_p(q + r, p) == (mod_p(q, p) + mod_p(r, p)) % p
        assert mod_p(q * r, p) == (mod_p(q, p) * mod_p(r, p)) % p


@given(rationals)
def test_scalar_str_roundtrip(q):
    assert parse_scalar(scalar_str(q)) == q
