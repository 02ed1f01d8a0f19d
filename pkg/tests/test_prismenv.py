import random
from math import comb

import pytest
from hypothesis import given, strategies as st

from gammadelta import prismenv
from gammadelta.deltaring import DeltaContext, delta, frobenius, frobenius_n
from gammadelta.errors import DepthExceeded, TruncationOverflow
from gammadelta.prismenv import (
    QuotientContext,
    conj_fil_gr_rank,
    digit_unit,
    divided_power_integrality,
    expand_delta_n,
    hodge_tate_iso_check,
    ht_image,
    is_standard,
    partial_sum_a,
    prism_base,
    rational_degree_check,
    standard_decomposition,
    unit_tower,
    unit_tower_passed,
    weakly_distinguished_witness,
)


def test_partial_sums():
    assert [partial_sum_a(n, 2) for n in range(1, 4)] == [1, 3, 7]
    assert [partial_sum_a(n, 3) for n in range(1, 3)] == [1, 10]


@pytest.mark.parametrize("p", [2, 3, 5])
def test_p1_is_delta_d_times_z_to_the_p(p):
    base = prism_base(p, 3)
    rep = expand_delta_n(base, 1)
    assert rep.P_n == base.tower("d", 1) * base.gen("z") ** p
    assert not rep.Q_n and rep.a_n == 1 and rep.passed


def test_p2_leading_coefficient_p2():
    base = prism_base(2, 4)
    rep = expand_delta_n(base, 2)
    assert rep.a_n == 3
    dz = base.tower("z", 1)
    coeff = prismenv._strip_power(rep.P_n, base.slot("z", 1), 2)
    assert coeff == frobenius(base.tower("d", 1)).scale(3)
    assert rep.checks["homogeneity"] and rep.passed
    assert dz.degree_in(base.slot("z", 1)) == 1


@pytest.mark.parametrize("p,top", [(2, 3), (3, 2)])
def test_expand_all_checks(p, top):
    base = prism_base(p, 4)
    for n in range(1, top + 1):
        rep = expand_delta_n(base, n)
        assert rep.passed, (n, rep.checks)


def test_expand_respects_depth():
    with pytest.raises(DepthExceeded):
        expand_delta_n(prism_base(2, 2), 2)


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_unit_tower_identity_and_true_congruence(p, n):
    base = prism_base(p, 4)
    t = unit_tower(base, n)
    d = base.gen("d")
    assert frobenius_n(d, n) == d ** (p ** n) + t.u.scale(p)
    assert t.checks["unit_mod_p"]
    assert unit_tower_passed(t)


def test_unit_tower_literal_congruence_fails_beyond_one():
    base = prism_base(2, 4)
    u1, ok1 = unit_tower(base, 1)
    assert u1 == base.tower("d", 1) and ok1
    u2, ok2 = unit_tower(base, 2)
    assert str(u2) == "2*d^2(d) + 3*d(d)^2 + 2*d^2*d(d)"
    assert not ok2


def test_weakly_distinguished():
    assert weakly_distinguished_witness(2)
    assert weakly_distinguished_witness(3)
    ctx = DeltaContext(("u", "d"), 2, 2)
    assert weakly_distinguished_witness(2, ctx.one())
    assert weakly_distinguished_witness(2, ctx.gen("d"))


def test_relations_p2():
    q = QuotientContext(2, 1, 16, 3)
    z, dz = q.z_tower(0, 0), q.z_tower(0, 1)
    w1 = q.ring.var("w_1(z)")
    w2 = q.ring.var("w_2(z)")
    assert standard_decomposition(q, z ** 2) == q.dd_power(-1) * w1
    want = q.dd_power(-2) * w2 + q.dd_power(-4) * q.ring.var("d^2(d)") * w1 ** 2
    assert standard_decomposition(q, dz ** 2) == want
    assert standard_decomposition(q, z * dz) == z * dz


def test_decomposition_bounds():
    q = QuotientContext(2, 1, 3, 3)
    with pytest.raises(TruncationOverflow):
        standard_decomposition(q, q.z_tower(0, 2))
    q2 = QuotientContext(2, 1, 16, 2)
    with pytest.raises(DepthExceeded):
        standard_decomposition(q2, q2.z_tower(0, 1) ** 2)


@given(st.integers(0, 10 ** 6), st.sampled_from([2, 3]))
def test_decomposition_is_idempotent_and_standard(seed, p):
    rng = random.Random(seed)
    q = QuotientContext(p, 2, 4 * p * p, 3)
    m = [0] * q.ring.nvars
    for j in range(2):
        m[q.z_slot(j, 0)] = rng.randint(0, p * p)
        m[q.z_slot(j, 1)] = rng.randint(0, p)
    once = standard_decomposition(q, q.ring.monomial(m))
    assert all(is_standard(q, t) for t in once.terms)
    assert standard_decomposition(q, once) == once


def test_conj_rank_examples():
    assert conj_fil_gr_rank(0, 3, 2) == (1, 1, True)
    assert conj_fil_gr_rank(3, 1, 2) == (1, 1, True)
    assert conj_fil_gr_rank(2, 2, 2) == (3, 3, True)


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("r", [1, 2])
def test_conj_ranks_up_to_p_squared(p, r):
    for i in range(p * p + 1):
        rank, expected, ok = conj_fil_gr_rank(i, r, p)
        assert ok and rank == comb(i + r - 1, r - 1)


def test_ht_images_small():
    q = QuotientContext(2, 1, 4, 3)
    assert ht_image(q, (1,)) == q.z_tower(0, 0)
    # -d(z)/phi(d(d)), and -1 = 1 mod 2
    assert ht_image(q, (2,)) == q.dd_power(-2) * q.z_tower(0, 1)


def test_digit_unit():
    assert digit_unit(2, 3) == 2
    # 5 = 1 + 0*2 + 1*4: 5! / (1! * 4!)
    assert digit_unit(5, 2) == 5
    assert all(digit_unit(n, p) % p for p in (2, 3) for n in range(30))


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("r", [1, 2])
def test_hodge_tate_invertible(p, r):
    q = QuotientContext(p, r, p * p, 3)
    for i in range(p * p + 1):
        rep = hodge_tate_iso_check(q, i)
        assert rep.passed, (i, rep.checks)
        assert rep.entries[0].rank == comb(i + r - 1, r - 1)


def test_hodge_tate_matrix_json():
    rep = hodge_tate_iso_check(QuotientContext(2, 1, 4, 3), 2)
    assert rep.matrix == [["d(d)^-2"]]
    data = rep.to_json()
    assert data["pass"] and data["entries"][0]["generators"] == ["d(z)"]


@pytest.mark.parametrize("p", [2, 3])
def test_divided_power_integrality(p):
    ok, info = divided_power_integrality(p, details=True)
    assert ok
    assert all(v["unique"] for v in info.values())


@pytest.mark.parametrize("p", [2, 3])
def test_rational_degree(p):
    assert rational_degree_check(p, p * p)


def test_reduce_drops_d_and_reduces_coefficients():
    base = prism_base(3, 3)
    q = QuotientContext(3, 1, 9, 3)
    f = base.gen("d") * base.gen("z") + base.tower("d", 1).scale(4) * base.gen("z").scale(3) + base.tower("z", 1).scale(7)
    assert q.reduce(f, {"z": 0}) == q.z_tower(0, 1)
    assert q.reduce(delta(base.gen("z")), {"z": 0}) == q.z_tower(0, 1)
