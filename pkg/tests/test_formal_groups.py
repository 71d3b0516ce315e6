import math

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hausdorff_lab.formal_groups import (
    FormalGroupLaw,
    StandardGroup,
    dump_fgl,
    exhaustive_points,
    fgl_additive,
    fgl_check_axioms,
    fgl_heisenberg,
    fgl_multiplicative,
    fgl_product,
    fgl_subgroup_closure,
    index_log,
    parse_fgl,
    power_exponent_bound,
    sg_inv,
    sg_level,
    sg_mul,
    sg_pow,
)
from hausdorff_lab.fpt_ring import RingCtx
from hausdorff_lab.rng import Xoshiro256


def law_1d(extra: dict, D: int, p: int) -> FormalGroupLaw:
    terms = {(1, 0): [(1,)], (0, 1): [(1,)]}
    terms.update({m: [(c,)] for m, c in extra.items()})
    return FormalGroupLaw.from_terms(1, D, p, 1, terms, exact=True)


def sympy_axioms_hold(extra: dict, D: int, p: int) -> bool:
    """Unit laws, tail shape and associativity mod degree D via sympy expansion."""
    X, Y, Z = sympy.symbols("X Y Z")

    def F(a, b):
        return a + b + sum(c * a**i * b**j for (i, j), c in extra.items())

    def trunc(expr):
        P = sympy.Poly(sympy.expand(expr), X, Y, Z, modulus=p)
        return {m: c % p for m, c in P.terms() if sum(m) <= D and c % p}

    if trunc(F(X, 0)) != trunc(X) or trunc(F(0, Y)) != trunc(Y):
        return False
    if any(i == 0 or j == 0 for (i, j), c in extra.items() if c % p):
        return False
    return trunc(F(F(X, Y), Z)) == trunc(F(X, F(Y, Z)))


# --- laws and axioms


def test_additive_and_multiplicative_shape():
    assert all(sum(m) == 1 for m, _ in fgl_additive(2).terms)
    tail = [m for m, _ in fgl_multiplicative().terms if sum(m) > 1]
    assert tail == [(1, 1)]


@pytest.mark.parametrize("p", [2, 3, 5])
def test_standard_laws_pass(p):
    for F in (fgl_additive(1, 8, p), fgl_additive(3, 8, p), fgl_multiplicative(8, p), fgl_heisenberg(8, p),
              fgl_product(fgl_multiplicative(8, p), fgl_additive(1, 8, p))):
        rep = fgl_check_axioms(F)
        assert rep.passed, rep.violations
        assert rep.checked_mod_degree == 8


def test_pure_power_tail_fails():
    rep = fgl_check_axioms(law_1d({(2, 0): 1}, 4, 3))
    assert not rep.passed
    assert any("tail shape" in v for v in rep.violations)


def test_truncated_cubic_law():
    # X + Y + XY^2 at D = 3: unit laws hold, associativity only modulo degree 3
    assert fgl_check_axioms(law_1d({(1, 2): 1}, 3, 2)).passed
    rep = fgl_check_axioms(law_1d({(1, 2): 1}, 3, 3))
    assert rep.violations == ["associativity through degree 3 component 1"]


CANDIDATES = [
    {(1, 1): 1},
    {(1, 1): 2},
    {(1, 2): 1},
    {(2, 1): 1, (1, 2): 1},
    {(1, 1): 1, (2, 2): 1},
    {(1, 1): 1, (1, 2): 1},
    {(2, 0): 1},
    {(1, 1): 1, (2, 1): 1, (1, 2): 1, (2, 2): 1},
]


@pytest.mark.parametrize("extra", CANDIDATES, ids=str)
@pytest.mark.parametrize("p", [2, 3, 5])
def test_axioms_match_sympy_oracle(extra, p):
    for D in (3, 4):
        assert fgl_check_axioms(law_1d(extra, D, p)).passed == sympy_axioms_hold(extra, D, p)


# --- standard group arithmetic


def test_multiplicative_examples():
    S = StandardGroup(fgl_multiplicative(8, 2), 1, RingCtx(2, 4))
    t = S.point([RingCtx(2, 4).t])
    assert sg_mul(t, t).coords[0] == RingCtx(2, 4).monomial(2)
    assert sg_mul(t, S.identity()) == t
    ctx3 = RingCtx(3, 4)
    S3 = StandardGroup(fgl_multiplicative(8, 3), 1, ctx3)
    inv = sg_inv(S3.point([ctx3.t]))
    assert inv.coords[0] == ctx3.series([0, 2, 1, 2])
    assert sg_inv(S3.identity()) == S3.identity()


def test_additive_inverse_and_power():
    ctx = RingCtx(5, 6)
    S = StandardGroup(fgl_additive(2, 8, 5), 1, ctx)
    x = S.point([ctx.series([0, 1, 3]), ctx.series([0, 0, 4])])
    assert sg_inv(x).coords == tuple(-c for c in x.coords)
    assert sg_pow(x, 5) == S.identity()
    assert sg_pow(x, 0) == S.identity()


def test_levels():
    ctx = RingCtx(2, 8)
    S = StandardGroup(fgl_additive(2, 8, 2), 1, ctx)
    assert sg_level(S.point([ctx.t, ctx.monomial(4)])) == 0
    assert sg_level(S.point([ctx.monomial(3), ctx.monomial(5)])) == 2
    assert sg_level(S.identity()) == 7
    M = StandardGroup(fgl_multiplicative(8, 2), 1, RingCtx(2, 5))
    x = M.point([RingCtx(2, 5).t])
    assert sg_pow(x, 2).coords[0] == RingCtx(2, 5).monomial(2)


def test_standard_group_validation():
    with pytest.raises(ValueError):
        StandardGroup(fgl_additive(1, 8, 2), 1, RingCtx(2, 1))
    with pytest.raises(ValueError):
        StandardGroup(fgl_additive(1, 8, 3), 1, RingCtx(2, 4))
    S = StandardGroup(fgl_additive(1, 8, 2), 2, RingCtx(2, 5))
    with pytest.raises(ValueError):
        S.point([RingCtx(2, 5).t])


LAWS = [
    ("additive-d2", lambda p: fgl_additive(2, 8, p)),
    ("multiplicative", lambda p: fgl_multiplicative(8, p)),
    ("heisenberg", lambda p: fgl_heisenberg(8, p)),
]


@pytest.mark.parametrize("name,make", LAWS, ids=[n for n, _ in LAWS])
@pytest.mark.parametrize("p", [2, 3])
def test_group_axioms_random(name, make, p):
    ctx = RingCtx(p, 7)
    S = StandardGroup(make(p), 1, ctx)
    rng = Xoshiro256(p * 31 + len(name))
    e = S.identity()
    for _ in range(1000):
        x, y, z = (S.random_point(rng) for _ in range(3))
        assert sg_mul(sg_mul(x, y), z) == sg_mul(x, sg_mul(y, z))
        assert sg_mul(x, e) == x and sg_mul(e, x) == x
        assert sg_mul(x, sg_inv(x)) == e


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 2**32), st.integers(0, 5), st.integers(0, 5))
def test_filtration_compatibility(p, seed, a, b):
    ctx = RingCtx(p, 7)
    S = StandardGroup(fgl_heisenberg(8, p), 1, ctx)
    rng = Xoshiro256(seed)
    x, y = S.random_point(rng, level=a), S.random_point(rng, level=b)
    assert sg_level(x) >= a and sg_level(y) >= b
    assert sg_level(sg_mul(x, y)) >= min(a, b)
    assert sg_level(sg_inv(x)) >= a


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.sampled_from(["additive-d2", "multiplicative", "heisenberg"]),
       st.integers(0, 2**32), st.integers(0, 6))
def test_p_power_deepening(p, name, seed, level):
    make = dict(LAWS)[name]
    ctx = RingCtx(p, 8)
    S = StandardGroup(make(p), 1, ctx)
    x = S.random_point(Xoshiro256(seed), level=level)
    n = sg_level(x)
    y = sg_pow(x, p)
    assert sg_level(y) >= min(2 * n, S.depth)
    assert sg_level(y) >= min(S.N + 2 * n, S.depth)


def test_elementary_abelian_layers():
    # images of S_n in S/S_2n have exponent p and commute
    for p in (2, 3):
        ctx = RingCtx(p, 9)
        S = StandardGroup(fgl_heisenberg(8, p), 1, ctx)
        rng = Xoshiro256(99)
        for n in (1, 2, 3):
            top = min(2 * n, S.depth)
            for _ in range(100):
                x, y = S.random_point(rng, level=n), S.random_point(rng, level=n)
                assert sg_level(sg_pow(x, p)) >= top
                comm = sg_mul(sg_mul(sg_inv(x), sg_inv(y)), sg_mul(x, y))
                assert sg_level(comm) >= top


# --- index growth and closures


def test_index_log_examples():
    S3 = StandardGroup(fgl_additive(3, 8, 2), 1, RingCtx(2, 4))
    assert index_log(S3, 0) == 0
    assert index_log(S3, 2) == 6
    with pytest.raises(ValueError):
        index_log(S3, 4)


def test_index_log_against_enumeration():
    S = StandardGroup(fgl_multiplicative(8, 2), 1, RingCtx(2, 4))
    orders = []
    for n in (0, 1, 2, 3):
        pts = list(exhaustive_points(S, n))
        res = fgl_subgroup_closure(S, pts, n)
        orders.append(2**res.exponent)
        assert res.exponent == index_log(S, n)
    assert orders == [1, 2, 4, 8]


def test_closure_examples():
    ctx = RingCtx(2, 4)
    A = StandardGroup(fgl_additive(1, 8, 2), 1, ctx)
    assert fgl_subgroup_closure(A, [], 3).exponent == 0
    assert fgl_subgroup_closure(A, [A.point([ctx.t])], 3).exponent == 1
    M = StandardGroup(fgl_multiplicative(8, 2), 1, ctx)
    e = fgl_subgroup_closure(M, [M.point([ctx.t])], 3).exponent
    assert e == 2  # <1+t> mod t^4 = {1, 1+t, 1+t^2, 1+t+t^2+t^3}
    assert e <= math.ceil(math.log2(3))


def test_closure_cap_flag():
    ctx = RingCtx(3, 5)
    S = StandardGroup(fgl_additive(2, 8, 3), 1, ctx)
    res = fgl_subgroup_closure(S, list(exhaustive_points(S, 2)), 2, cap=10)
    assert not res.exhausted and res.states == 10


def test_literal_log_bound_fails_at_powers_of_two():
    # the order of 1+t modulo t^(1+n) in char 2 is 2^e with e = power_exponent_bound(1, n),
    # which exceeds ceil(log2 n) whenever n is a power of two
    for n, want in [(1, 1), (2, 2), (3, 2), (4, 3), (5, 3), (7, 3), (8, 4)]:
        ctx = RingCtx(2, 1 + n)
        M = StandardGroup(fgl_multiplicative(16, 2), 1, ctx)
        e = fgl_subgroup_closure(M, [M.point([ctx.t])], n).exponent
        assert e == want == power_exponent_bound(1, n)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(0, 2**32), st.integers(1, 2), st.integers(1, 4))
def test_finitely_generated_growth(p, seed, r, n):
    ctx = RingCtx(p, 6)
    for make in (lambda: fgl_multiplicative(8, p), lambda: fgl_additive(2, 8, p)):
        S = StandardGroup(make(), 1, ctx)
        rng = Xoshiro256(seed)
        gens = [S.random_point(rng) for _ in range(r)]
        res = fgl_subgroup_closure(S, gens, n)
        # abelian: r generators of order at most p^e span at most p^(r e) elements
        assert res.exponent <= r * power_exponent_bound(S.N, n)
        assert res.exponent <= index_log(S, n)


# --- file format


def test_fgl_roundtrip():
    F = fgl_heisenberg(6, 3)
    G = parse_fgl(dump_fgl(F))
    assert (G.d, G.D, G.p) == (3, 6, 3)
    assert G.terms == F.terms
    assert fgl_check_axioms(G).passed


def test_fgl_parse_errors():
    with pytest.raises(ValueError):
        parse_fgl("")
    with pytest.raises(ValueError):
        parse_fgl("fgl d=1 D=3 p=2\n")
    with pytest.raises(ValueError):
        parse_fgl("fgl d=1 D=3 p=2 k=2\n(1,0) [1+0*t]\n")


def test_inexact_law_precision_guard():
    F = parse_fgl(dump_fgl(fgl_multiplicative(3, 2)))
    with pytest.raises(ValueError):
        StandardGroup(F, 1, RingCtx(2, 4))
