"""Formal group laws over F_p[[t]] and the standard groups they define.

A law is stored as d truncated polynomials in the 2d variables
``X_1..X_d, Y_1..Y_d`` with coefficients in F_p[t].  A ``StandardGroup``
realises the group (t^N)^d with multiplication given by the law, computed in
F_p[t]/(t^k).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from .fpt_ring import (
    TOP,
    RingCtx,
    TruncatedSeries,
    encode_series,
    parse_series,
    poly_add,
    poly_mul,
    valuation,
)

DEFAULT_CAP = 10**6


# ---------------------------------------------------------------------------
# sparse multivariate polynomials: {exponent tuple: coefficient tuple}


def _mv_add_into(acc: dict, mono, coeff, p: int):
    if mono in acc:
        c = poly_add(acc[mono], coeff, p)
        if any(c):
            acc[mono] = c
        else:
            del acc[mono]
    elif any(coeff):
        acc[mono] = coeff


def _mv_mul(a: dict, b: dict, p: int, k: int, D: int) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        da = sum(ma)
        for mb, cb in b.items():
            if da + sum(mb) > D:
                continue
            c = poly_mul(ca, cb, p, k)
            if any(c):
                _mv_add_into(out, tuple(x + y for x, y in zip(ma, mb)), c, p)
    return out


def _mv_powers(u: dict, e: int, p: int, k: int, D: int, nvars: int) -> list:
    one = {(0,) * nvars: (1,) + (0,) * (k - 1)}
    pows = [one]
    for _ in range(e):
        pows.append(_mv_mul(pows[-1], u, p, k, D))
    return pows


# ---------------------------------------------------------------------------
# formal group laws


@dataclass(frozen=True)
class FormalGroupLaw:
    """F(X, Y) = X + Y + G(X, Y), truncated at total degree D.

    ``terms`` maps an exponent vector over (X_1..X_d, Y_1..Y_d) to a d-tuple of
    coefficient tuples (each a polynomial in t over F_p, length ``precision``).
    ``exact`` marks laws that are genuinely polynomial, so no terms above D
    exist and evaluation is exact at any truncation.
    """

    d: int
    D: int
    p: int
    precision: int
    terms: tuple  # sorted ((mono, (c_1, ..., c_d)), ...)
    exact: bool = False
    name: str = ""

    @classmethod
    def from_terms(cls, d, D, p, precision, terms: dict, exact=False, name=""):
        cleaned = {}
        for mono, coeffs in terms.items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != 2 * d:
                raise ValueError(f"monomial {mono} needs {2 * d} exponents")
            if sum(mono) > D:
                continue
            cs = []
            for c in coeffs:
                c = [int(x) % p for x in c][:precision]
                c.extend([0] * (precision - len(c)))
                cs.append(tuple(c))
            if len(cs) != d:
                raise ValueError(f"monomial {mono} needs {d} coefficients")
            if any(any(c) for c in cs):
                cleaned[mono] = tuple(cs)
        return cls(d, D, p, precision, tuple(sorted(cleaned.items())), exact, name)

    def component(self, i: int) -> dict:
        """Component i as a sparse polynomial {mono: coeff tuple}."""
        return {m: cs[i] for m, cs in self.terms if any(cs[i])}

    def evaluate(self, x: Sequence, y: Sequence, p: int, k: int) -> tuple:
        """F(x, y) for raw coordinate tuples, computed mod t^k."""
        if k > self.precision and not self.exact:
            raise ValueError(f"law known only mod t^{self.precision}, asked for t^{k}")
        vals = list(x) + list(y)
        nv = len(vals)
        cache: dict = {}

        def power(j, e):
            key = (j, e)
            if key not in cache:
                if e == 1:
                    cache[key] = vals[j]
                else:
                    cache[key] = poly_mul(power(j, e - 1), vals[j], p, k)
            return cache[key]

        out = [[0] * k for _ in range(self.d)]
        for mono, coeffs in self.terms:
            term = None
            for j in range(nv):
                e = mono[j]
                if e:
                    pw = power(j, e)
                    term = pw if term is None else poly_mul(term, pw, p, k)
            if term is None:
                term = (1,) + (0,) * (k - 1)
            if not any(term):
                continue
            for i, c in enumerate(coeffs):
                if any(c):
                    prod = poly_mul(_fit(c, k), term, p, k)
                    oi = out[i]
                    for e, v in enumerate(prod):
                        oi[e] += v
        return tuple(tuple(v % p for v in o) for o in out)


def _fit(c: tuple, k: int) -> tuple:
    if len(c) >= k:
        return c[:k]
    return c + (0,) * (k - len(c))


def _unit_x(d, i, which):
    mono = [0] * (2 * d)
    mono[i + (d if which == "Y" else 0)] = 1
    return tuple(mono)


def fgl_additive(d: int = 1, D: int = 8, p: int = 2) -> FormalGroupLaw:
    if d < 1:
        raise ValueError("d must be >= 1")
    terms = {}
    for i in range(d):
        for which in "XY":
            cs = [(0,)] * d
            cs[i] = (1,)
            terms[_unit_x(d, i, which)] = cs
    return FormalGroupLaw.from_terms(d, D, p, 1, terms, exact=True, name="additive")


def fgl_multiplicative(D: int = 8, p: int = 2) -> FormalGroupLaw:
    """X + Y + XY, the law of 1 + x under multiplication."""
    terms = {(1, 0): [(1,)], (0, 1): [(1,)], (1, 1): [(1,)]}
    return FormalGroupLaw.from_terms(1, D, p, 1, terms, exact=True, name="multiplicative")


def fgl_heisenberg(D: int = 8, p: int = 2) -> FormalGroupLaw:
    """A non-commutative 3-dimensional law: the third coordinate picks up X_1 Y_2."""
    d = 3
    terms = {}
    for i in range(d):
        for which in "XY":
            cs = [(0,)] * d
            cs[i] = (1,)
            terms[_unit_x(d, i, which)] = cs
    terms[(1, 0, 0, 0, 1, 0)] = [(0,), (0,), (1,)]
    return FormalGroupLaw.from_terms(d, D, p, 1, terms, exact=True, name="heisenberg")


def fgl_product(a: FormalGroupLaw, b: FormalGroupLaw) -> FormalGroupLaw:
    """Direct product law on (t^N)^(d_a + d_b)."""
    if a.p != b.p:
        raise ValueError("laws over different primes")
    d = a.d + b.d
    terms = {}
    for mono, cs in a.terms:
        x, y = mono[: a.d], mono[a.d :]
        terms[x + (0,) * b.d + y + (0,) * b.d] = list(cs) + [(0,)] * b.d
    for mono, cs in b.terms:
        x, y = mono[: b.d], mono[b.d :]
        terms[(0,) * a.d + x + (0,) * a.d + y] = [(0,)] * a.d + list(cs)
    return FormalGroupLaw.from_terms(
        d,
        min(a.D, b.D),
        a.p,
        min(a.precision, b.precision),
        terms,
        exact=a.exact and b.exact,
        name=f"{a.name}x{b.name}",
    )


@dataclass
class AxiomReport:
    violations: list = field(default_factory=list)
    checked_mod_degree: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations


def _compose(F: FormalGroupLaw, U: list, V: list, nvars: int, k: int) -> list:
    """F(U, V) for polynomial tuples U, V in nvars variables, degree <= D."""
    p, D = F.p, F.D
    args = list(U) + list(V)
    maxe = [0] * (2 * F.d)
    for mono, _ in F.terms:
        for j, e in enumerate(mono):
            maxe[j] = max(maxe[j], e)
    pows = [_mv_powers(args[j], maxe[j], p, k, D, nvars) for j in range(2 * F.d)]
    out = [dict() for _ in range(F.d)]
    for mono, coeffs in F.terms:
        term = {(0,) * nvars: (1,) + (0,) * (k - 1)}
        for j, e in enumerate(mono):
            if e:
                term = _mv_mul(term, pows[j][e], p, k, D)
        for i, c in enumerate(coeffs):
            if any(c):
                scaled = _mv_mul(term, {(0,) * nvars: _fit(c, k)}, p, k, D)
                for m, v in scaled.items():
                    _mv_add_into(out[i], m, v, p)
    return out


def fgl_check_axioms(F: FormalGroupLaw) -> AxiomReport:
    """Check unit laws, associativity mod degree D, and the tail shape."""
    rep = AxiomReport(checked_mod_degree=F.D)
    d, k = F.d, F.precision
    for i in range(d):
        comp = F.component(i)
        for which, offset in (("X", 0), ("Y", d)):
            # F(X, 0) keeps only monomials free of the other block
            other = slice(d, 2 * d) if which == "X" else slice(0, d)
            restricted = {m: c for m, c in comp.items() if not any(m[other])}
            want = {_unit_x(d, i, which): _fit((1,), k)}
            if {m: _fit(c, k) for m, c in restricted.items()} != want:
                rep.violations.append(f"unit law F({'X,0' if which == 'X' else '0,Y'}) component {i + 1}")
        for m, c in comp.items():
            deg = sum(m)
            if deg == 1:
                if m not in (_unit_x(d, i, "X"), _unit_x(d, i, "Y")) or _fit(c, k) != _fit((1,), k):
                    rep.violations.append(f"tail shape: unexpected linear term {m} in component {i + 1}")
            elif deg == 0:
                rep.violations.append(f"tail shape: constant term in component {i + 1}")
            elif not (any(m[:d]) and any(m[d:])):
                rep.violations.append(f"tail shape: unmixed monomial {m} in component {i + 1}")

    nv = 3 * d

    def var(j):
        mono = [0] * nv
        mono[j] = 1
        return {tuple(mono): _fit((1,), k)}

    X = [var(j) for j in range(d)]
    Y = [var(d + j) for j in range(d)]
    Z = [var(2 * d + j) for j in range(d)]
    left = _compose(F, _compose(F, X, Y, nv, k), Z, nv, k)
    right = _compose(F, X, _compose(F, Y, Z, nv, k), nv, k)
    for i in range(d):
        if left[i] != right[i]:
            rep.violations.append(f"associativity through degree {F.D} component {i + 1}")
    return rep


# ---------------------------------------------------------------------------
# standard groups


@dataclass(frozen=True)
class StandardGroup:
    fgl: FormalGroupLaw
    N: int
    ctx: RingCtx

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("level N must be >= 1")
        if self.ctx.k < self.N + 1:
            raise ValueError("need k >= N + 1 for a visible filtration step")
        if self.ctx.p != self.fgl.p:
            raise ValueError("law and ring use different primes")
        if not self.fgl.exact:
            if self.ctx.k > self.fgl.precision:
                raise ValueError("law coefficients not known to the ring's precision")
            if (self.fgl.D + 1) * self.N < self.ctx.k:
                raise ValueError(
                    f"degree cutoff D={self.fgl.D} too small: need (D+1)*N >= k={self.ctx.k}"
                )

    @property
    def d(self) -> int:
        return self.fgl.d

    @property
    def depth(self) -> int:
        """Deepest visible filtration index, k - N."""
        return self.ctx.k - self.N

    def identity(self) -> "StandardPoint":
        return StandardPoint(self, (self.ctx.zero,) * self.d)

    def point(self, coords: Iterable) -> "StandardPoint":
        cs = []
        for c in coords:
            if isinstance(c, TruncatedSeries):
                cs.append(c)
            else:
                cs.append(self.ctx.series(c))
        return StandardPoint(self, tuple(cs))

    def random_point(self, rng, level: int = 0) -> "StandardPoint":
        """Uniform element of S_level."""
        lo = self.N + level
        coords = []
        for _ in range(self.d):
            c = [0] * self.ctx.k
            for e in range(lo, self.ctx.k):
                c[e] = rng.below(self.ctx.p)
            coords.append(self.ctx.series(c))
        return StandardPoint(self, tuple(coords))


@dataclass(frozen=True)
class StandardPoint:
    group: StandardGroup
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.group.d:
            raise ValueError("wrong number of coordinates")
        for c in self.coords:
            if c.ctx != self.group.ctx:
                raise ValueError("coordinate ring mismatch")
            if c.valuation() < self.group.N:
                raise ValueError(f"coordinate {c} has valuation below N={self.group.N}")

    def raw(self) -> tuple:
        return tuple(c.coeffs for c in self.coords)

    def __mul__(self, other):
        return sg_mul(self, other)


def sg_mul(x: StandardPoint, y: StandardPoint) -> StandardPoint:
    if x.group != y.group:
        raise ValueError("points belong to different standard groups")
    S = x.group
    raw = S.fgl.evaluate(x.raw(), y.raw(), S.ctx.p, S.ctx.k)
    return StandardPoint(S, tuple(TruncatedSeries(S.ctx, c) for c in raw))


def sg_inv(x: StandardPoint) -> StandardPoint:
    """Inverse by the fixed-point refinement y <- y - F(x, y)."""
    S = x.group
    p, k = S.ctx.p, S.ctx.k
    xr = x.raw()
    y = tuple(tuple((-c) % p for c in co) for co in xr)
    for _ in range(k + 1):
        r = S.fgl.evaluate(xr, y, p, k)
        if not any(any(c) for c in r):
            return StandardPoint(S, tuple(TruncatedSeries(S.ctx, c) for c in y))
        y = tuple(tuple((a - b) % p for a, b in zip(yc, rc)) for yc, rc in zip(y, r))
    raise ArithmeticError("inverse iteration did not converge; law is not a valid FGL")


def sg_level(x: StandardPoint) -> int:
    """Largest n <= k - N with x in S_n."""
    S = x.group
    v = min(c.valuation() for c in x.coords)
    if v is TOP or v >= S.ctx.k:
        return S.depth
    return min(int(v) - S.N, S.depth)


def sg_pow(x: StandardPoint, e: int) -> StandardPoint:
    if e < 0:
        return sg_pow(sg_inv(x), -e)
    result, base = x.group.identity(), x
    while e:
        if e & 1:
            result = sg_mul(result, base)
        base = sg_mul(base, base)
        e >>= 1
    return result


def index_log(S: StandardGroup, n: int) -> int:
    """log_p |S : S_n| = d * n over F_p[[t]]."""
    if not 0 <= n <= S.depth:
        raise ValueError(f"n={n} outside visible range [0, {S.depth}]")
    return S.d * n


def power_exponent_bound(N: int, n: int) -> int:
    """Least e with N * 2^e >= N + n.

    p-th powers at least double coordinate valuations, so every element of an
    abelian S/S_n has order dividing p^e for this e.
    """
    e = 0
    while N * (1 << e) < N + n:
        e += 1
    return e


@dataclass(frozen=True)
class FglClosureResult:
    n: int
    exponent: int
    states: int
    exhausted: bool


def _encode_slots(raw: tuple, N: int, p: int) -> bytes:
    if p < 256:
        return bytes(x for c in raw for x in c[N:])
    return b"".join(x.to_bytes(4, "little") for c in raw for x in c[N:])


def fgl_subgroup_closure(
    S: StandardGroup, gens: Sequence[StandardPoint], n: int, cap: int = DEFAULT_CAP
) -> FglClosureResult:
    """p-exponent of |H S_n / S_n| for H generated by ``gens``.

    Breadth-first closure on coset representatives (coordinates taken mod
    t^(N+n)).  If the cap is hit the result is a lower bound with
    ``exhausted=False``.
    """
    if not 0 <= n <= S.depth:
        raise ValueError(f"n={n} outside visible range [0, {S.depth}]")
    p = S.ctx.p
    kk = S.N + n
    law = S.fgl
    gen_raw = []
    for g in gens:
        if g.group != S:
            raise ValueError("generator from another group")
        gen_raw.append(tuple(c.coeffs[:kk] for c in g.coords))
    ident = tuple((0,) * kk for _ in range(S.d))
    seen = {_encode_slots(ident, S.N, p)}
    frontier = [ident]
    exhausted = True
    while frontier and exhausted:
        nxt = []
        for x in frontier:
            for g in gen_raw:
                y = law.evaluate(x, g, p, kk)
                key = _encode_slots(y, S.N, p)
                if key not in seen:
                    if len(seen) >= cap:
                        exhausted = False
                        break
                    seen.add(key)
                    nxt.append(y)
            if not exhausted:
                break
        frontier = nxt
    size = len(seen)
    exponent = int(round(math.log(size, p))) if exhausted else int(math.floor(math.log(size, p) + 1e-12))
    if exhausted and p**exponent != size:
        raise ArithmeticError(f"closure size {size} is not a power of {p}")
    return FglClosureResult(n, exponent, size, exhausted)


# ---------------------------------------------------------------------------
# file format


def dump_fgl(F: FormalGroupLaw) -> str:
    ctx = RingCtx(F.p, F.precision)
    lines = [f"fgl d={F.d} D={F.D} p={F.p} k={F.precision}"]
    for mono, coeffs in F.terms:
        series = ", ".join(encode_series(ctx.series(c)) for c in coeffs)
        lines.append(f"({','.join(map(str, mono))}) -> [{series}]")
    return "\n".join(lines) + "\n"


_HEADER = re.compile(r"^fgl\s+d=(\d+)\s+D=(\d+)\s+p=(\d+)\s+k=(\d+)\s*$")


def parse_fgl(text: str) -> FormalGroupLaw:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise ValueError("empty FGL file")
    m = _HEADER.match(lines[0])
    if not m:
        raise ValueError(f"bad FGL header: {lines[0]!r}")
    d, D, p, k = map(int, m.groups())
    ctx = RingCtx(p, k)
    terms: dict = {}
    for ln in lines[1:]:
        if "->" not in ln:
            raise ValueError(f"bad FGL line: {ln!r}")
        lhs, rhs = ln.split("->", 1)
        mono = tuple(int(x) for x in re.findall(r"\d+", lhs))
        body = rhs.strip().strip("[]")
        series = [parse_series(s, ctx).coeffs for s in body.split(",")]
        if mono in terms:
            raise ValueError(f"duplicate monomial {mono}")
        terms[mono] = series
    return FormalGroupLaw.from_terms(d, D, p, k, terms, exact=False, name="file")


def exhaustive_points(S: StandardGroup, n: int) -> Iterable[StandardPoint]:
    """All points whose coordinates live in slots t^N..t^(N+n-1)."""
    slots = range(S.N, S.N + n)
    for flat in product(range(S.ctx.p), repeat=S.d * n):
        coords = []
        for i in range(S.d):
            c = [0] * S.ctx.k
            for j, e in enumerate(slots):
                c[e] = flat[i * n + j]
            coords.append(S.ctx.series(c))
        yield StandardPoint(S, tuple(coords))
