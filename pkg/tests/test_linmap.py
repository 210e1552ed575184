import numpy as np
import pytest

from kimgold import ddt
from kimgold import linmap as lm
from kimgold.kimtype import KimCoeffs


def _random_bijections(ctx, rng, count):
    out = []
    while len(out) < count:
        L = lm.from_coeffs(ctx, rng.integers(0, ctx.size, 2 * ctx.m))
        if L.is_bijective():
            out.append(L)
    return out


def _kernel_size(ctx, L):
    return int(np.sum(L(ctx.elements()) == 0))


def test_constructors(ctx4):
    assert lm.conj_plus(ctx4, 0) == lm.frobenius_power(ctx4, 4)
    c = lm.conj_plus(ctx4, 7).coeffs
    assert c[0] == 7 and c[4] == 1 and sum(map(bool, c)) == 2
    with pytest.raises(lm.SingularMapError):
        lm.scale(ctx4, 0)
    with pytest.raises(ValueError):
        lm.from_coeffs(ctx4, [1, 2, 3])


def test_eval_is_additive(ctx4):
    rng = np.random.default_rng(0)
    L = lm.from_coeffs(ctx4, rng.integers(0, 256, 8))
    xs = ctx4.elements()
    ys = rng.integers(0, 256, 256)
    assert np.array_equal(L(xs ^ ys), L(xs) ^ L(ys))
    assert L(5) == int(L(np.array([5]))[0])


@pytest.mark.parametrize("m", [4, 5])
def test_conj_plus_bijective_iff_off_unit_circle(m):
    from kimgold.gf2field import make_field

    ctx = make_field(m)
    for t in range(ctx.size):
        L = lm.conj_plus(ctx, t)
        assert L.is_bijective() == (not ctx.in_U(t))
        assert L.is_bijective() == (_kernel_size(ctx, L) == 1)
    for t in range(ctx.q):
        assert lm.conj_plus(ctx, t).is_bijective() == (t != 1)


def test_compose_identity_and_frobenius(ctx4):
    rng = np.random.default_rng(1)
    L = lm.from_coeffs(ctx4, rng.integers(0, 256, 8))
    ident = lm.identity(ctx4)
    assert lm.compose(L, ident) == L == lm.compose(ident, L)
    f1 = lm.frobenius_power(ctx4, 1)
    assert f1.inverse() == lm.frobenius_power(ctx4, 7)


def test_compose_pointwise_and_matrix(ctx4):
    rng = np.random.default_rng(2)
    xs = ctx4.elements()
    for L, M in zip(_random_bijections(ctx4, rng, 10), _random_bijections(ctx4, rng, 10)):
        LM = L @ M
        assert np.array_equal(LM(xs), L(M(xs)))
        prod = (L.to_matrix().astype(int) @ M.to_matrix().astype(int)) % 2
        assert np.array_equal(LM.to_matrix(), prod)


def test_matrix_columns_are_basis_images(ctx4):
    L = lm.conj_plus(ctx4, 9)
    mat = L.to_matrix()
    for j in range(8):
        col = sum(int(mat[i, j]) << i for i in range(8))
        assert col == L(1 << j)


def test_rank_matches_kernel(ctx4):
    rng = np.random.default_rng(3)
    for _ in range(30):
        coeffs = rng.integers(0, 256, 8) * (rng.random(8) < 0.4)
        L = lm.from_coeffs(ctx4, coeffs)
        assert 2 ** (8 - L.rank()) == _kernel_size(ctx4, L)


def test_inverse_round_trip(ctx4):
    rng = np.random.default_rng(4)
    xs = ctx4.elements()
    for L in _random_bijections(ctx4, rng, 100):
        Li = L.inverse()
        assert np.array_equal(Li(L(xs)), xs)
        assert np.array_equal(L(Li(xs)), xs)


def test_inverse_of_singular_raises(ctx4):
    with pytest.raises(lm.SingularMapError):
        lm.conj_plus(ctx4, 1).inverse()


def test_from_images_interpolates(ctx4):
    rng = np.random.default_rng(5)
    images = [int(v) for v in rng.integers(0, 256, 8)]
    L = lm.from_images(ctx4, images)
    assert [L(1 << j) for j in range(8)] == images


def _g1_identity_witness(ctx):
    ident = lm.identity(ctx)
    return lm.EquivWitness("G1", lm.frobenius_power(ctx, ctx.m), ident, KimCoeffs(0, 0, 0))


def test_verify_witness_examples(ctx4):
    assert lm.verify_witness(ctx4, _g1_identity_witness(ctx4))
    bad = lm.EquivWitness("G2", _g1_identity_witness(ctx4).L1, lm.identity(ctx4), KimCoeffs(0, 0, 0))
    assert not lm.verify_witness(ctx4, bad)


def test_verify_rejects_singular_maps(ctx4):
    # f = x^3q, L2 singular: even pointwise agreement at 0 must not pass
    w = lm.EquivWitness("G1", lm.frobenius_power(ctx4, 4), lm.conj_plus(ctx4, 1), KimCoeffs(0, 0, 0))
    assert not lm.verify_witness(ctx4, w)


def test_witness_composition(ctx4):
    rng = np.random.default_rng(6)
    w = _g1_identity_witness(ctx4)
    # x^3 is fixed by x -> c^-3 (c x)^3, so (scale(c^-3) o A, B o scale(c)) also proves G1
    for c in (2, 17, 200):
        C = lm.scale(ctx4, ctx4.inv(ctx4.pow(c, 3)))
        D = lm.scale(ctx4, c)
        composed = lm.EquivWitness("G1", C @ w.L1, w.L2 @ D, w.source)
        assert lm.verify_witness(ctx4, composed)
    for _ in range(3):
        M, = _random_bijections(ctx4, rng, 1)
        composed = lm.EquivWitness("G1", w.L1, w.L2 @ M, w.source)
        assert not lm.verify_witness(ctx4, composed)


def test_witness_json_round_trip(ctx4):
    w = _g1_identity_witness(ctx4)
    data = w.to_json()
    assert set(data) == {"target", "L1", "L2", "source", "field_ctx"}
    back = lm.EquivWitness.from_json(data)
    assert back == w
    assert lm.verify_witness(ctx4, back)
