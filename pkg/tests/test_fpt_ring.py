import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import GF
from sympy.polys.matrices import DomainMatrix

from hausdorff_lab.fpt_ring import (
    TOP,
    RingCtx,
    SeriesMatrix,
    encode_matrix,
    encode_series,
    fp_nullspace,
    fp_rref,
    mat_const,
    mat_det,
    mat_from_coeffs,
    mat_identity,
    mat_inv,
    mat_mul,
    parse_matrix,
    parse_series,
    ts_add,
    ts_inv,
    ts_mul,
    ts_valuation,
)

CTXS = [RingCtx(p, k) for p in (2, 3, 5) for k in (4, 8)]


@st.composite
def series(draw, ctx):
    return ctx.series(draw(st.lists(st.integers(0, ctx.p - 1), min_size=ctx.k, max_size=ctx.k)))


@st.composite
def ctx_and_triple(draw):
    ctx = draw(st.sampled_from(CTXS))
    return ctx, draw(series(ctx)), draw(series(ctx)), draw(series(ctx))


# --- examples


def test_add_examples():
    c2 = RingCtx(2, 4)
    assert ts_add(c2.t, c2.t) == c2.zero
    c3 = RingCtx(3, 4)
    assert ts_add(c3.series([1, 1]), c3.series([0, 1, 1])) == c3.series([1, 2, 1])
    a = c3.series([2, 0, 1, 1])
    assert a + c3.zero == a


def test_mul_examples():
    c = RingCtx(2, 3)
    assert ts_mul(c.t, c.t) == c.monomial(2)
    c4 = RingCtx(2, 4)
    assert ts_mul(c4.series([1, 1]), c4.series([1, 1, 1, 1])) == c4.one
    assert ts_mul(c4.monomial(3), c4.t) == c4.zero


def test_inverse_examples():
    c = RingCtx(2, 4)
    assert ts_inv(c.one) == c.one
    assert ts_inv(c.series([1, 1])) == c.series([1, 1, 1, 1])
    with pytest.raises(ValueError):
        ts_inv(c.t)


def test_valuation_examples():
    c = RingCtx(3, 6)
    assert ts_valuation(c.series([0, 0, 1, 1])) == 2
    assert ts_valuation(c.zero) is TOP
    assert ts_valuation(ts_mul(c.monomial(2), c.monomial(3))) == 5
    assert TOP > 10**9


def test_ctx_validation():
    with pytest.raises(ValueError):
        RingCtx(4, 3)
    with pytest.raises(ValueError):
        RingCtx(3, 0)
    with pytest.raises(ValueError):
        RingCtx(2, 3).t + RingCtx(3, 3).t


def test_matrix_inverse_examples():
    c = RingCtx(3, 3)
    I = mat_identity(c, 2)
    assert mat_inv(I) == I
    U = mat_from_coeffs(c, [[[1, 0], [0, 1]], [[0, 1], [0, 0]]])
    assert mat_inv(U) == mat_from_coeffs(c, [[[1, 0], [0, 1]], [[0, 2], [0, 0]]])
    singular = mat_from_coeffs(c, [[[1, 1], [1, 1]], [[1, 0], [0, 0]]])
    with pytest.raises(ValueError):
        mat_inv(singular)


def test_rref_examples():
    assert fp_rref([(1, 0), (0, 1)], 5).rank == 2
    assert fp_rref([(1, 1), (2, 2)], 3).rank == 1
    assert fp_rref([], 3, 4).rank == 0


# --- ring axioms, >= 10^4 cases per (p, k)


@pytest.mark.parametrize("ctx", CTXS, ids=lambda c: f"p{c.p}k{c.k}")
def test_ring_axioms_bulk(ctx):
    rng = np.random.default_rng(ctx.p * 100 + ctx.k)
    draws = rng.integers(0, ctx.p, size=(10_000, 3, ctx.k))
    for a, b, c in draws:
        a, b, c = ctx.series(a), ctx.series(b), ctx.series(c)
        assert (a * b) * c == a * (b * c)
        assert a * b == b * a
        assert a * (b + c) == a * b + a * c
        assert (a + b) + c == a + (b + c)


@settings(max_examples=300, deadline=None)
@given(ctx_and_triple())
def test_inverse_property(data):
    ctx, a, _, _ = data
    if a.is_unit():
        assert ts_mul(a, ts_inv(a)) == ctx.one
    else:
        with pytest.raises(ValueError):
            ts_inv(a)


@settings(max_examples=300, deadline=None)
@given(ctx_and_triple())
def test_valuation_laws(data):
    ctx, a, b, _ = data
    va, vb = ts_valuation(a), ts_valuation(b)
    if va + vb < ctx.k:
        assert ts_valuation(a * b) == va + vb
    assert ts_valuation(a + b) >= min(va, vb)


def test_mul_matches_sympy_polynomials():
    t = sympy.symbols("t")
    rng = np.random.default_rng(7)
    for p, k in [(2, 5), (3, 6), (5, 4)]:
        ctx = RingCtx(p, k)
        for _ in range(50):
            a, b = rng.integers(0, p, size=(2, k))
            pa = sympy.Poly(list(reversed(a.tolist())), t, modulus=p)
            pb = sympy.Poly(list(reversed(b.tolist())), t, modulus=p)
            prod = (pa * pb).all_coeffs()[::-1]
            want = [int(x) % p for x in prod][:k]
            assert list((ctx.series(a) * ctx.series(b)).coeffs) == want + [0] * (k - len(want))


# --- matrices


def _random_matrix(ctx, n, rng):
    return mat_from_coeffs(ctx, rng.integers(0, ctx.p, size=(ctx.k, n, n)).tolist())


def test_det_matches_sympy():
    t = sympy.symbols("t")
    rng = np.random.default_rng(11)
    for p, k in [(2, 4), (3, 3), (5, 3)]:
        ctx = RingCtx(p, k)
        for n in range(1, 6):
            A = _random_matrix(ctx, n, rng)
            S = sympy.Matrix(n, n, lambda i, j: sum(c * t**e for e, c in enumerate(A[i, j].coeffs)))
            d = sympy.Poly(S.det(method="berkowitz"), t, modulus=p).all_coeffs()[::-1]
            want = [int(x) % p for x in d][:k]
            want += [0] * (k - len(want))
            assert list(mat_det(A).coeffs) == want


def test_matrix_inverse_random():
    rng = np.random.default_rng(3)
    for p, k, n in [(2, 4, 3), (3, 5, 4), (5, 3, 2)]:
        ctx = RingCtx(p, k)
        done = 0
        while done < 20:
            A = _random_matrix(ctx, n, rng)
            if not mat_det(A).is_unit():
                with pytest.raises(ValueError):
                    mat_inv(A)
                continue
            assert mat_mul(A, mat_inv(A)).is_identity()
            assert mat_mul(mat_inv(A), A).is_identity()
            done += 1


def test_det_multiplicative():
    rng = np.random.default_rng(5)
    ctx = RingCtx(3, 4)
    for _ in range(30):
        A, B = _random_matrix(ctx, 3, rng), _random_matrix(ctx, 3, rng)
        assert mat_det(mat_mul(A, B)) == mat_det(A) * mat_det(B)


# --- row reduction


def _sympy_rref(rows, p):
    K = GF(p)
    M = DomainMatrix([[K(int(x)) for x in r] for r in rows], (len(rows), len(rows[0])), K)
    R, piv = M.rref()
    out = [[int(K.to_int(x)) % p for x in r] for r in R.to_list()]
    return [r for r in out if any(r)], tuple(piv)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.integers(1, 6), st.integers(1, 7), st.data())
def test_rref_matches_sympy(p, nrows, ncols, data):
    rows = data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=ncols, max_size=ncols),
                              min_size=nrows, max_size=nrows))
    S = fp_rref(rows, p, ncols)
    want_rows, want_piv = _sympy_rref(rows, p)
    assert [list(r) for r in S.rows] == want_rows
    assert S.pivots == want_piv
    assert list(S.pivots) == sorted(set(S.pivots))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.data())
def test_rref_canonical_and_idempotent(p, data):
    ncols = data.draw(st.integers(1, 6))
    rows = data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=ncols, max_size=ncols), min_size=1, max_size=5))
    S = fp_rref(rows, p, ncols)
    assert fp_rref(list(S.rows) or [[0] * ncols], p, ncols) == S
    # a different generating set of the same span: random invertible combination plus redundancy
    coeffs = data.draw(st.lists(st.integers(0, p - 1), min_size=len(rows), max_size=len(rows)))
    extra = [sum(c * r[j] for c, r in zip(coeffs, rows)) % p for j in range(ncols)]
    shuffled = list(reversed(rows)) + [extra] + [[(2 * x) % p for x in rows[0]]] if p > 2 else list(reversed(rows)) + [extra]
    assert fp_rref(shuffled, p, ncols) == S


def test_nullspace():
    rng = np.random.default_rng(1)
    for p in (2, 3, 5):
        for _ in range(20):
            A = rng.integers(0, p, size=(3, 6))
            N = fp_nullspace(A.tolist(), p, 6)
            assert N.rank == 6 - fp_rref(A.tolist(), p, 6).rank
            for v in N.rows:
                assert not ((A @ np.array(v)) % p).any()


def test_subspace_membership():
    S = fp_rref([(1, 2, 0), (0, 0, 1)], 3)
    assert (2, 1, 2) in S
    assert (0, 1, 0) not in S
    assert S.coordinates((2, 1, 2)) == (2, 2)
    assert S.join(fp_rref([(0, 1, 0)], 3)).is_full()


# --- encodings


def test_series_encoding():
    ctx = RingCtx(5, 4)
    a = ctx.series([3, 0, 4, 1])
    assert encode_series(a) == "3+0*t+4*t^2+1*t^3"
    assert parse_series(encode_series(a), ctx) == a
    assert parse_series("1+t^3", ctx) == ctx.series([1, 0, 0, 1])
    assert parse_series("-2*t", ctx) == ctx.series([0, 3])
    with pytest.raises(ValueError):
        parse_series("", ctx)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(CTXS), st.data())
def test_matrix_encoding_roundtrip(ctx, data):
    n = data.draw(st.integers(1, 3))
    A = SeriesMatrix(ctx, tuple(tuple(data.draw(series(ctx)) for _ in range(n)) for _ in range(n)))
    assert parse_matrix(encode_matrix(A), ctx) == A


def test_const_matrix():
    ctx = RingCtx(3, 2)
    M = mat_const(ctx, [[1, 2], [0, 1]])
    assert M.coeff_matrix(0) == [[1, 2], [0, 1]]
    assert M.coeff_matrix(1) == [[0, 0], [0, 0]]
    assert math.isinf(ts_valuation(M[1, 0]))
