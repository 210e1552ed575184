import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kimgold import ddt
from kimgold import kimtype as kt
from kimgold.gf2field import make_field
from kimgold.kimtype import KimCoeffs


def _eval_by_powers(ctx, k, x):
    q = ctx.q
    return (ctx.pow(x, 3 * q) ^ ctx.mul(k.a1, ctx.pow(x, 2 * q + 1))
            ^ ctx.mul(k.a2, ctx.pow(x, q + 2)) ^ ctx.mul(k.a3, ctx.pow(x, 3)))


def test_eval_kim_basics(ctx4):
    xs = ctx4.elements()
    assert np.array_equal(kt.eval_kim(ctx4, KimCoeffs(0, 0, 0), xs), ctx4.pow(xs, 48))
    k = KimCoeffs(5, 100, 201)
    assert kt.eval_kim(ctx4, k, 0) == 0
    assert kt.eval_kim(ctx4, k, 1) == 1 ^ 5 ^ 100 ^ 201


def test_eval_kim_against_powers(ctx6):
    rng = np.random.default_rng(0)
    k = KimCoeffs(*(int(v) for v in rng.integers(0, ctx6.size, 3)))
    xs = rng.integers(0, ctx6.size, 1000)
    assert np.array_equal(kt.eval_kim(ctx6, k, xs), _eval_by_powers(ctx6, k, xs))


def test_thetas_examples(ctx4):
    assert kt.thetas(ctx4, KimCoeffs(0, 0, 0)) == (1, 0, 0, 0)
    for a3 in ctx4.unit_circle():
        assert kt.thetas(ctx4, KimCoeffs(0, 0, a3)).t1 == 0
    for a1, a2, a3 in itertools.product(range(16), repeat=3):
        s = 1 ^ a1 ^ a2 ^ a3
        assert kt.thetas(ctx4, KimCoeffs(a1, a2, a3)).t1 == ctx4.mul(s, s)


def test_thetas_subfield_when_a1_small(ctx4):
    rng = np.random.default_rng(1)
    for _ in range(200):
        k = KimCoeffs(int(rng.integers(16)), *(int(v) for v in rng.integers(0, 256, 2)))
        th = kt.thetas(ctx4, k)
        assert ctx4.in_subfield(th.t1) and ctx4.in_subfield(th.t4)
        assert kt.thetas(ctx4, k) == th


def test_gamma_examples(ctx4):
    assert kt.in_gamma1(ctx4, KimCoeffs(0, 0, 0))
    for a3 in ctx4.unit_circle():
        assert not kt.in_gamma1(ctx4, KimCoeffs(0, 0, a3))
        assert not kt.in_gamma2(ctx4, KimCoeffs(0, 0, a3))
    with pytest.raises(kt.ScopeError):
        kt.in_gamma1(ctx4, KimCoeffs(ctx4.beta, 0, 0))


def test_gamma1_subfield_reduces_to_S(ctx4):
    for a1, a2, a3 in itertools.product(range(16), repeat=3):
        k = KimCoeffs(a1, a2, a3)
        rep = kt.gamma_report(ctx4, a1, a2, a3)
        S = kt.subfield_S(ctx4, a1, a2, a3)
        assert kt.in_gamma1(ctx4, k) == (bool(rep.trace_ok) and S == 0)


def test_scalar_and_array_reports_agree(ctx4):
    rng = np.random.default_rng(2)
    a1 = rng.integers(0, 16, 300)
    a2 = rng.integers(0, 256, 300)
    a3 = rng.integers(0, 256, 300)
    arr = kt.is_apn_by_theorem_array(ctx4, a1, a2, a3)
    assert arr.tolist() == [kt.is_apn_by_theorem(ctx4, KimCoeffs(int(x), int(y), int(z)))
                            for x, y, z in zip(a1, a2, a3)]


def test_theorem_scope():
    with pytest.raises(kt.ScopeError):
        kt.is_apn_by_theorem(make_field(3), KimCoeffs(0, 0, 0))


def test_theorem_examples(ctx4, ctx5):
    assert kt.is_apn_by_theorem(ctx4, KimCoeffs(0, 0, 0))
    rng = np.random.default_rng(3)
    seen = 0
    while seen < 3:
        a1, a2, a3 = (int(rng.integers(32)), int(rng.integers(1024)), int(rng.integers(1024)))
        k = KimCoeffs(a1, a2, a3)
        if kt.in_gamma2(ctx5, k) and not kt.in_gamma1(ctx5, k):
            assert not kt.is_apn_by_theorem(ctx5, k)
            seen += 1


def test_theorem_vs_oracle_random_m4(ctx4):
    rng = np.random.default_rng(4)
    n = 10_000
    a1 = rng.integers(0, 16, n)
    a2 = rng.integers(0, 256, n)
    a3 = rng.integers(0, 256, n)
    pred = kt.is_apn_by_theorem_array(ctx4, a1, a2, a3)
    oracle = ddt.batch_is_apn(ddt.kim_tables(ctx4, a1, a2, a3))
    assert np.array_equal(pred, oracle)


def test_substitution_law(ctx4):
    rng = np.random.default_rng(5)
    xs = ctx4.elements()
    for _ in range(20):
        k = KimCoeffs(*(int(v) for v in rng.integers(0, 256, 3)))
        c = int(rng.integers(1, 256))
        k2 = kt.substitute(ctx4, k, c)
        expect = ctx4.mul(ctx4.inv(ctx4.pow(c, 3 * ctx4.q)), kt.eval_kim(ctx4, k, ctx4.mul(c, xs)))
        assert np.array_equal(kt.eval_kim(ctx4, k2, xs), expect)
        assert kt.substitute(ctx4, k2, ctx4.inv(c)) == k


def test_normalize_identity_when_small(ctx4):
    k = KimCoeffs(7, 99, 3)
    k2, L1, L2 = kt.normalize_a1(ctx4, k)
    assert k2 == k and L1.coeffs == L2.coeffs == (1,) + (0,) * 7


def test_normalize_preserves_a2_zero(ctx4):
    for a1 in (ctx4.beta, 0x35, 0xF1):
        k2, _, _ = kt.normalize_a1(ctx4, KimCoeffs(a1, 0, 0x42))
        assert k2.a2 == 0 and ctx4.in_subfield(k2.a1)


@settings(max_examples=60, deadline=None)
@given(st.integers(16, 255), st.integers(0, 255), st.integers(0, 255))
def test_normalize_pointwise(a1, a2, a3):
    ctx = make_field(4)
    k = KimCoeffs(a1, a2, a3)
    k2, L1, L2 = kt.normalize_a1(ctx, k)
    xs = ctx.elements()
    assert ctx.in_subfield(k2.a1)
    assert np.array_equal(kt.eval_kim(ctx, k2, xs), L1(kt.eval_kim(ctx, k, L2(xs))))
    # normalization cannot change APN-ness
    assert ddt.is_apn_bruteforce(ddt.table_of_kim(ctx, k)) == kt.is_apn_by_theorem(ctx, k2)


def test_gamma_stable_under_substitution_round_trip(ctx4):
    rng = np.random.default_rng(6)
    for _ in range(50):
        k = KimCoeffs(int(rng.integers(16)), *(int(v) for v in rng.integers(0, 256, 2)))
        y = int(rng.integers(1, 16))  # c in F_q keeps a1 in F_q
        back = kt.substitute(ctx4, kt.substitute(ctx4, k, y), ctx4.inv(y))
        assert back == k
        assert kt.in_gamma1(ctx4, back) == kt.in_gamma1(ctx4, k)
        assert kt.in_gamma2(ctx4, back) == kt.in_gamma2(ctx4, k)


def test_json(ctx4):
    k = KimCoeffs(1, 2, 3)
    assert KimCoeffs.from_json(k.to_json()) == k
    assert KimCoeffs.from_json({"a1": "0x1", "a2": "2", "a3": 3}) == k
