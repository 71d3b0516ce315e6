"""Classical groups SL, SO, Sp over F_p[t]/(t^k) and their congruence filtration.

The ambient group throughout is the level-1 congruence subgroup G^1 (matrices
congruent to I mod t), filtered by G_m = ker(G^1 -> G(R/t^m)).  Each layer
G_m/G_(m+1) is an F_p-space of dimension d = dim of the group, so
|G^1 : G_m| = p^(d(m-1)).

For SO and Sp the congruence filtration is used as the working standard
filtration; for SL it is known to be one.
"""

from __future__ import annotations

import math
import os
import re
import warnings
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .fpt_ring import (
    FpSubspace,
    RingCtx,
    SeriesMatrix,
    encode_matrix,
    fp_nullspace,
    fp_rref,
    mat_const,
    mat_det,
    mat_from_coeffs,
    mat_identity,
    mat_inv,
    mat_mul,
    parse_matrix,
    ts_inv,
)
from .rng import Xoshiro256
from .traces import Trace, TraceRow

DEFAULT_CAP = 10**6

FAMILIES = ("SL", "SO_odd", "SO_even", "Sp")
_ALIASES = {
    "SL": "SL",
    "SO_ODD": "SO_odd",
    "SOODD": "SO_odd",
    "SO_EVEN": "SO_even",
    "SOEVEN": "SO_even",
    "SP": "Sp",
}
_FILE_NAMES = {"SL": "SL", "SO_odd": "SOodd", "SO_even": "SOeven", "Sp": "Sp"}


class InvariantError(AssertionError):
    """A computed quantity disagrees with its closed form."""


def normalize_family(name: str) -> str:
    key = name.strip().upper()
    if key not in _ALIASES:
        raise ValueError(f"unknown family {name!r}; expected one of {FAMILIES}")
    return _ALIASES[key]


@dataclass(frozen=True)
class GroupSpec:
    family: str
    n: int
    ctx: RingCtx

    def __post_init__(self):
        fam = normalize_family(self.family)
        object.__setattr__(self, "family", fam)
        minimum = {"SL": 2, "SO_odd": 2, "Sp": 2, "SO_even": 1}[fam]
        if self.n < minimum:
            raise ValueError(f"{fam} needs n >= {minimum}")
        if fam == "SO_even" and self.n < 4:
            warnings.warn(
                f"SO_even with n={self.n} is not of type D_n; treated as a plain matrix group",
                stacklevel=2,
            )

    @property
    def size(self) -> int:
        return _size(self.family, self.n)

    @property
    def p(self) -> int:
        return self.ctx.p

    def label(self) -> str:
        return {"SL": f"SL_{self.n}", "SO_odd": f"SO_{self.size}", "SO_even": f"SO_{self.size}",
                "Sp": f"Sp_{self.size}"}[self.family]


def _size(family: str, n: int) -> int:
    return {"SL": n, "SO_odd": 2 * n + 1, "SO_even": 2 * n, "Sp": 2 * n}[family]


def closed_form_dimension(family: str, n: int) -> int:
    family = normalize_family(family)
    if family == "SL":
        return n * n - 1
    if family in ("SO_odd", "Sp"):
        return n * (2 * n + 1)
    return n * (2 * n - 1)


# ---------------------------------------------------------------------------
# forms and tangent spaces


def antidiag(s: int) -> np.ndarray:
    return np.fliplr(np.eye(s, dtype=np.int64))


@dataclass(frozen=True)
class GramForm:
    matrix: tuple  # integer entries, canonical residues not applied

    def array(self, p: int | None = None) -> np.ndarray:
        a = np.array(self.matrix, dtype=np.int64)
        return a % p if p else a

    def series(self, ctx: RingCtx) -> SeriesMatrix:
        return mat_const(ctx, self.matrix)


def _gram_array(family: str, n: int) -> np.ndarray:
    if family in ("SO_odd", "SO_even"):
        return antidiag(_size(family, n))
    K = antidiag(n)
    Z = np.zeros((n, n), dtype=np.int64)
    return np.block([[Z, K], [-K, Z]])


def gram_matrix(spec: GroupSpec) -> GramForm:
    if spec.family == "SL":
        raise ValueError("SL has no defining bilinear form")
    G = _gram_array(spec.family, spec.n)
    return GramForm(tuple(tuple(int(x) for x in row) for row in G))


def _tangent_constraints(family: str, n: int, p: int, s: int) -> list:
    """Rows of the linear system cutting out the tangent space in F_p^(s*s)."""
    rows = []
    if family == "SL":
        rows.append([1 if i % (s + 1) == 0 else 0 for i in range(s * s)])
        return rows
    G = _gram_array(family, n)
    # X -> X^t G + G X, evaluated on unit matrices
    cols = []
    diag_cols = []
    for idx in range(s * s):
        E = np.zeros((s, s), dtype=np.int64)
        E[divmod(idx, s)] = 1
        cols.append(((E.T @ G + G @ E) % p).ravel())
        diag_cols.append(np.diag(G @ E) % p)
    rows.extend(np.array(cols).T.tolist())
    if family in ("SO_odd", "SO_even"):
        # G X must be alternating, not merely antisymmetric (matters only for p = 2)
        rows.extend(np.array(diag_cols).T.tolist())
    return rows


@lru_cache(maxsize=None)
def _tangent(family: str, n: int, p: int, borel: bool) -> FpSubspace:
    s = _size(family, n)
    rows = _tangent_constraints(family, n, p, s)
    if borel:
        for i in range(s):
            for j in range(i):
                r = [0] * (s * s)
                r[i * s + j] = 1
                rows.append(r)
    return fp_nullspace(rows, p, s * s)


def tangent_space(spec: GroupSpec) -> FpSubspace:
    """The F_p-space {X : X in the Lie algebra of the group} inside F_p^(s*s)."""
    return _tangent(spec.family, spec.n, spec.p, False)


def borel_tangent_space(spec: GroupSpec) -> FpSubspace:
    return _tangent(spec.family, spec.n, spec.p, True)


def layer_dimension(spec: GroupSpec) -> int:
    """dim over F_p of each congruence layer; checked against the closed form."""
    d = tangent_space(spec).rank
    want = closed_form_dimension(spec.family, spec.n)
    if d != want:
        raise InvariantError(
            f"{spec.label()} over F_{spec.p}: tangent dimension {d} != closed form {want}"
        )
    return d


def borel_dimension(spec: GroupSpec) -> tuple:
    """(dim B, dim G, dim B / dim G) for the upper-triangular Borel subgroup."""
    dB = borel_tangent_space(spec).rank
    dG = layer_dimension(spec)
    return dB, dG, Fraction(dB, dG)


# ---------------------------------------------------------------------------
# elements


def defining_check(M: SeriesMatrix, spec: GroupSpec) -> bool:
    """True iff the defining relation holds exactly mod t^k."""
    if M.n != spec.size:
        raise ValueError(f"matrix size {M.n} does not match {spec.label()} (size {spec.size})")
    ctx = M.ctx
    if spec.family == "SL":
        return mat_det(M) == ctx.one
    G = gram_matrix(spec).series(ctx)
    return mat_mul(mat_mul(M.T, G), M) == G


def _as_square(X, s: int) -> list:
    X = np.asarray(X, dtype=np.int64)
    if X.shape == (s * s,):
        X = X.reshape(s, s)
    if X.shape != (s, s):
        raise ValueError(f"tangent seed must be {s}x{s}")
    return X.tolist()


@dataclass(frozen=True)
class CongruenceElement:
    spec: GroupSpec
    M: SeriesMatrix

    def __post_init__(self):
        if self.M.ctx != self.spec.ctx:
            raise ValueError("element ring does not match the group's ring")
        if self.M.n != self.spec.size:
            raise ValueError("element has wrong size")
        if any(
            self.M[i, j].coeffs[0] != int(i == j) for i in range(self.M.n) for j in range(self.M.n)
        ):
            raise ValueError("element is not congruent to I mod t")
        if not defining_check(self.M, self.spec):
            raise ValueError(f"element violates the defining relation of {self.spec.label()}")

    def __matmul__(self, other: "CongruenceElement") -> "CongruenceElement":
        return CongruenceElement(self.spec, mat_mul(self.M, other.M))

    def inverse(self) -> "CongruenceElement":
        return CongruenceElement(self.spec, mat_inv(self.M))

    def level(self) -> int:
        """Largest m with self in G_m (k if self is the identity)."""
        k = self.spec.ctx.k
        v = k
        for i, row in enumerate(self.M.rows):
            for j, x in enumerate(row):
                c = list(x.coeffs)
                if i == j:
                    c[0] -= 1
                for e, ce in enumerate(c):
                    if ce % self.spec.p:
                        v = min(v, e)
                        break
        return v


def identity_element(spec: GroupSpec) -> CongruenceElement:
    return CongruenceElement(spec, mat_identity(spec.ctx, spec.size))


def lift_element(spec: GroupSpec, X, m: int | None = None, degree: int = 1) -> CongruenceElement:
    """An element congruent to I + t^degree X mod t^(degree+1).

    SL: rescale the first row of I + t^degree X by the inverse determinant.
    SO/Sp: Cayley transform (I + Y)(I - Y)^(-1) with Y = t^degree X / 2.
    The relation holds exactly mod t^k (so mod t^m for every m <= k).
    """
    ctx, s = spec.ctx, spec.size
    if m is not None and not 1 <= m <= ctx.k:
        raise ValueError(f"m={m} outside [1, {ctx.k}]")
    if degree < 1:
        raise ValueError("degree must be >= 1")
    X = [[x % spec.p for x in row] for row in _as_square(X, s)]
    if [x for row in X for x in row] not in tangent_space(spec):
        raise ValueError(f"seed is not in the tangent space of {spec.label()}")
    zero = [[0] * s for _ in range(s)]
    ident = [[int(i == j) for j in range(s)] for i in range(s)]
    if spec.family == "SL":
        A = mat_from_coeffs(ctx, [ident] + [zero] * (degree - 1) + [X])
        det_inv = ts_inv(mat_det(A))
        rows = list(A.rows)
        rows[0] = tuple(x * det_inv for x in rows[0])
        return CongruenceElement(spec, SeriesMatrix(ctx, tuple(rows)))
    if spec.p == 2:
        raise ValueError("SO/Sp lifts need p >= 3 (the Cayley transform divides by 2)")
    half = pow(2, -1, spec.p)
    Xh = [[(x * half) % spec.p for x in row] for row in X]
    Y = mat_from_coeffs(ctx, [zero] * degree + [Xh])
    I = mat_identity(ctx, s)
    return CongruenceElement(spec, mat_mul(I + Y, mat_inv(I - Y)))


def ambient_index_log(spec: GroupSpec, m: int) -> int:
    """log_p |G^1 : G_m| = d (m - 1)."""
    if not 1 <= m <= spec.ctx.k:
        raise ValueError(f"m={m} outside [1, {spec.ctx.k}]")
    return layer_dimension(spec) * (m - 1)


def full_generators(spec: GroupSpec, m_max: int) -> list:
    """Lifts of a tangent basis at every degree 1..m_max-1; they generate G^1 mod t^m_max."""
    gens = []
    for deg in range(1, m_max):
        for row in tangent_space(spec).rows:
            gens.append(lift_element(spec, row, degree=deg))
    return gens


def root_generators(spec: GroupSpec, i: int, j: int, m_max: int) -> list:
    """I + t^e E_ij for e = 1..m_max-1.

    Together these generate the closed subgroup {I + x E_ij : x in t F_p[[t]]}
    modulo t^m_max.  A single I + t E_ij only generates a cyclic group of
    order p.
    """
    if spec.family != "SL" or i == j:
        raise ValueError("root generators implemented for off-diagonal SL entries")
    s = spec.size
    gens = []
    for e in range(1, m_max):
        X = [[0] * s for _ in range(s)]
        X[i][j] = 1
        gens.append(lift_element(spec, X, degree=e))
    return gens


def random_tangent(spec: GroupSpec, rng: Xoshiro256) -> list:
    basis = tangent_space(spec).rows
    v = [0] * (spec.size**2)
    for row in basis:
        c = rng.below(spec.p)
        if c:
            for a, x in enumerate(row):
                v[a] = (v[a] + c * x) % spec.p
    return v


# ---------------------------------------------------------------------------
# raw arithmetic mod t^m on flattened matrices


def _raw(el: CongruenceElement, m: int) -> tuple:
    return tuple(x.coeffs[:m] for row in el.M.rows for x in row)


def _raw_identity(s: int, m: int) -> tuple:
    one = (1,) + (0,) * (m - 1)
    zero = (0,) * m
    return tuple(one if i == j else zero for i in range(s) for j in range(s))


def _raw_mul(A: tuple, B: tuple, s: int, m: int, p: int) -> tuple:
    out = []
    for i in range(s):
        Ai = A[i * s : (i + 1) * s]
        for j in range(s):
            acc = [0] * m
            for l in range(s):
                a = Ai[l]
                b = B[l * s + j]
                for u in range(m):
                    au = a[u]
                    if au:
                        for v in range(m - u):
                            bv = b[v]
                            if bv:
                                acc[u + v] += au * bv
            out.append(tuple(x % p for x in acc))
    return tuple(out)


def _raw_pow(A: tuple, e: int, s: int, m: int, p: int) -> tuple:
    result, base = _raw_identity(s, m), A
    while e:
        if e & 1:
            result = _raw_mul(result, base, s, m, p)
        base = _raw_mul(base, base, s, m, p)
        e >>= 1
    return result


def _raw_inv(A: tuple, s: int, m: int, p: int) -> tuple:
    """(I + N)^(-1) = sum (-N)^i; N is nilpotent mod t^m."""
    ident = _raw_identity(s, m)
    negN = tuple(tuple((-(a - b)) % p for a, b in zip(x, y)) for x, y in zip(A, ident))
    result, term = ident, ident
    for _ in range(m - 1):
        term = _raw_mul(term, negN, s, m, p)
        result = tuple(tuple((a + b) % p for a, b in zip(x, y)) for x, y in zip(result, term))
    return result


def _raw_level(A: tuple, s: int, m: int) -> tuple:
    """(level j, leading F_p vector) of A = I + t^j Y + ..., or (m, None) for I."""
    for j in range(1, m):
        vec = [A[idx][j] for idx in range(s * s)]
        if any(vec):
            return j, vec
    return m, None


def encode_state(A: tuple, p: int) -> bytes:
    """Coefficient slots t^1..t^(m-1) of every entry, row-major."""
    if p < 256:
        return bytes(x for entry in A for x in entry[1:])
    return b"".join(x.to_bytes(4, "little") for entry in A for x in entry[1:])


# ---------------------------------------------------------------------------
# closures


@dataclass(frozen=True)
class ClosureResult:
    level: int
    exponent: int
    states: int
    exhausted: bool
    deep_exponent: int | None = None  # exponent of the part inside G_2, if asked for


def _check_gens(spec: GroupSpec, gens, m: int):
    if not 1 <= m <= spec.ctx.k:
        raise ValueError(f"m={m} outside [1, {spec.ctx.k}]")
    for g in gens:
        if not isinstance(g, CongruenceElement) or g.spec != spec:
            raise ValueError("generators must be CongruenceElements of this group")


def subgroup_closure(
    spec: GroupSpec, gens: Sequence[CongruenceElement], m: int, cap: int = DEFAULT_CAP,
    deep_level: int | None = None,
) -> ClosureResult:
    """Order of the image of <gens> in G^1 mod t^m, by breadth-first closure.

    ``deep_level`` additionally counts the elements lying in G_deep_level,
    which gives the image of H intersected with that congruence subgroup.
    """
    _check_gens(spec, gens, m)
    s, p = spec.size, spec.p
    graw = [_raw(g, m) for g in gens]
    ident = _raw_identity(s, m)
    seen = {encode_state(ident, p)}
    frontier = [ident]
    deep = 1
    exhausted = True
    while frontier and exhausted:
        nxt = []
        for x in frontier:
            for g in graw:
                y = _raw_mul(x, g, s, m, p)
                key = encode_state(y, p)
                if key in seen:
                    continue
                if len(seen) >= cap:
                    exhausted = False
                    break
                seen.add(key)
                nxt.append(y)
                if deep_level is not None and _raw_level(y, s, m)[0] >= deep_level:
                    deep += 1
            if not exhausted:
                break
        frontier = nxt
    size = len(seen)
    exponent = _log_p(size, p, exact=exhausted)
    deep_exp = _log_p(deep, p, exact=exhausted) if deep_level is not None else None
    return ClosureResult(m, exponent, size, exhausted, deep_exp)


def _log_p(size: int, p: int, exact: bool) -> int:
    e = 0
    while p ** (e + 1) <= size:
        e += 1
    if exact and p**e != size:
        raise InvariantError(f"group order {size} is not a power of {p}")
    return e


@dataclass
class PcTable:
    """Sifted generating sequence of a subgroup of G^1 mod t^m, by level."""

    m: int
    levels: dict  # level -> list of (pivot, element, lead vector)

    @property
    def exponent(self) -> int:
        return sum(len(v) for v in self.levels.values())

    def exponent_from(self, level: int) -> int:
        """log_p of the image of H intersected with G_level."""
        return sum(len(v) for j, v in self.levels.items() if j >= level)


def subgroup_closure_pc(spec: GroupSpec, gens: Sequence[CongruenceElement], m: int) -> PcTable:
    """Order of <gens> mod t^m by sifting through the congruence layers.

    Each layer G_j/G_(j+1) is an elementary abelian, central section, so a
    generating sequence closed under p-th powers and commutators, kept in
    echelon form per layer, has exactly p^(length) products.  Independent of
    the breadth-first route and polynomial in the layer dimensions.
    """
    _check_gens(spec, gens, m)
    s, p = spec.size, spec.p
    table = PcTable(m, {})

    def sift(g):
        while True:
            j, v = _raw_level(g, s, m)
            if j == m:
                return None
            for c, h, hv in table.levels.get(j, []):
                a = v[c]
                if a:
                    g = _raw_mul(g, _raw_pow(h, p - a, s, m, p), s, m, p)
                    v = [(x - a * y) % p for x, y in zip(v, hv)]
            if any(v):
                j2, v2 = _raw_level(g, s, m)
                assert j2 == j and v2 == v
                c = next(i for i, x in enumerate(v) if x)
                g = _raw_pow(g, pow(v[c], -1, p), s, m, p)
                _, v = _raw_level(g, s, m)
                table.levels.setdefault(j, []).append((c, g, v))
                return g

    queue = deque(_raw(g, m) for g in gens)
    while queue:
        new = sift(queue.popleft())
        if new is None:
            continue
        inv_new = _raw_inv(new, s, m, p)
        queue.append(_raw_pow(new, p, s, m, p))
        for entries in table.levels.values():
            for _, h, _ in entries:
                if h is new:
                    continue
                comm = _raw_mul(
                    _raw_mul(inv_new, _raw_inv(h, s, m, p), s, m, p), _raw_mul(new, h, s, m, p), s, m, p
                )
                queue.append(comm)
    return table


def dimension_trace(
    spec: GroupSpec,
    gens: Sequence[CongruenceElement],
    m_max: int,
    cap: int = DEFAULT_CAP,
    method: str = "bfs",
    ambient_level: int = 1,
) -> Trace:
    """Ratios log|H G_m : G_m| / log|A : G_m| for m up to m_max.

    The ambient A is G^ambient_level (default G^1); with ambient_level=2 the
    numerator is computed for H intersected with G^2.
    """
    if not 1 <= ambient_level < m_max <= spec.ctx.k:
        raise ValueError(f"need 1 <= ambient_level < m_max <= k, got {ambient_level}, {m_max}")
    d = layer_dimension(spec)
    rows = []
    flagged = False
    for m in range(ambient_level + 1, m_max + 1):
        if method == "bfs":
            res = subgroup_closure(spec, gens, m, cap, deep_level=ambient_level if ambient_level > 1 else None)
            flagged |= not res.exhausted
            num = res.exponent if ambient_level == 1 else res.deep_exponent
        elif method == "pc":
            num = subgroup_closure_pc(spec, gens, m).exponent_from(ambient_level)
        else:
            raise ValueError(f"unknown closure method {method!r}")
        rows.append(TraceRow(m, num, d * (m - ambient_level)))
    return Trace(rows, window=math.ceil(m_max / 2), flagged=flagged)


def _sample_one(args):
    spec, m, seed, index, cap, method = args
    rng = Xoshiro256(seed * 1_000_003 + index)
    r = rng.randint(1, 3)
    gens = [lift_element(spec, random_tangent(spec, rng)) for _ in range(r)]
    if method == "pc":
        return Fraction(subgroup_closure_pc(spec, gens, m).exponent, layer_dimension(spec) * (m - 1)), False
    res = subgroup_closure(spec, gens, m, cap)
    return Fraction(res.exponent, layer_dimension(spec) * (m - 1)), not res.exhausted


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("HAUSDORFF_LAB_THREADS", "1")))
    except ValueError:
        return 1


def spectrum_sample(
    spec: GroupSpec, m: int, count: int, seed: int, cap: int = DEFAULT_CAP, method: str = "bfs"
) -> tuple:
    """Level-m ratios of ``count`` random finitely generated subgroups.

    Sample i draws 1..3 generators (lifts of random tangent vectors) from a
    generator seeded by (seed, i), so results do not depend on worker count.
    Returns (ratios, any_cap_flagged).
    """
    if spec.family != "SL" and spec.p == 2:
        raise ValueError("SO/Sp sampling needs p >= 3")
    if m < 2:
        raise ValueError("need m >= 2")
    jobs = [(spec, m, seed, i, cap, method) for i in range(count)]
    workers = worker_count()
    if workers > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(_sample_one, jobs))
    else:
        out = [_sample_one(j) for j in jobs]
    return [q for q, _ in out], any(f for _, f in out)


# ---------------------------------------------------------------------------
# layer counting


def _respec(spec: GroupSpec, ctx: RingCtx) -> GroupSpec:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return GroupSpec(spec.family, spec.n, ctx)


def enumerate_congruence_group(spec: GroupSpec, m: int) -> list:
    """Every element of G^1 mod t^m, by brute force over all matrices I + tA.

    Only feasible for tiny cases (p^(s^2 (m-1)) candidates).
    """
    s, p = spec.size, spec.p
    ctx = RingCtx(p, m)
    sub = _respec(spec, ctx)
    ident = [[int(i == j) for j in range(s)] for i in range(s)]
    out = []
    for flat in product(range(p), repeat=s * s * (m - 1)):
        layers = [ident]
        for e in range(m - 1):
            chunk = flat[e * s * s : (e + 1) * s * s]
            layers.append([list(chunk[i * s : (i + 1) * s]) for i in range(s)])
        M = mat_from_coeffs(ctx, layers)
        if defining_check(M, sub):
            out.append(M)
    return out


def kernel_by_lifting(spec: GroupSpec, m: int) -> int:
    """|ker(G(R/t^m) -> G(R/t^(m-1)))| by trying every lift I + t^(m-1) A."""
    if m < 2:
        raise ValueError("need m >= 2")
    s, p = spec.size, spec.p
    ctx = RingCtx(p, m)
    sub = _respec(spec, ctx)
    ident = [[int(i == j) for j in range(s)] for i in range(s)]
    zero = [[0] * s for _ in range(s)]
    count = 0
    for flat in product(range(p), repeat=s * s):
        A = [list(flat[i * s : (i + 1) * s]) for i in range(s)]
        if defining_check(mat_from_coeffs(ctx, [ident] + [zero] * (m - 2) + [A]), sub):
            count += 1
    return count


def layer_exponent(spec: GroupSpec, j: int) -> int:
    """log_p |G_j / G_(j+1)| from the group relation itself.

    Evaluates the defining relation on I + t^j E_ab in R/t^(j+1), checks the
    induced map on the t^j coefficient is linear, and returns its kernel
    dimension.
    """
    if j < 1:
        raise ValueError("layers start at j = 1")
    s, p = spec.size, spec.p
    ctx = RingCtx(p, j + 1)
    sub = _respec(spec, ctx)
    ident = [[int(a == b) for b in range(s)] for a in range(s)]
    zero = [[0] * s for _ in range(s)]

    def relation(Y):
        M = mat_from_coeffs(ctx, [ident] + [zero] * (j - 1) + [Y])
        if sub.family == "SL":
            return [mat_det(M).coeffs[j]]
        G = gram_matrix(sub).series(ctx)
        R = mat_mul(mat_mul(M.T, G), M) - G
        return [x for row in R.coeff_matrix(j) for x in row]

    cols = []
    for idx in range(s * s):
        E = [[0] * s for _ in range(s)]
        E[idx // s][idx % s] = 1
        cols.append(relation(E))
    A = np.array(cols, dtype=np.int64).T
    rng = Xoshiro256(j * 7919 + s)
    for _ in range(4):
        y = rng.vector(s * s, p)
        Y = [y[a * s : (a + 1) * s] for a in range(s)]
        if list((A @ np.array(y)) % p) != [x % p for x in relation(Y)]:
            raise InvariantError("layer relation is not linear in the t^j coefficient")
    return fp_nullspace(A.tolist(), p, s * s).rank


# ---------------------------------------------------------------------------
# subgroup spec files


_HEADER = re.compile(r"^group\s+family=(\w+)\s+n=(\d+)\s+p=(\d+)\s+k=(\d+)\s*$")


def parse_subgroup_spec(text: str) -> tuple:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise ValueError("empty subgroup spec")
    m = _HEADER.match(lines[0])
    if not m:
        raise ValueError(f"bad subgroup header: {lines[0]!r}")
    fam, n, p, k = m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        spec = GroupSpec(fam, n, RingCtx(p, k))
    gens = []
    for ln in lines[1:]:
        if not ln.startswith("gen:"):
            raise ValueError(f"expected 'gen:' line, got {ln!r}")
        gens.append(CongruenceElement(spec, parse_matrix(ln[4:], spec.ctx)))
    return spec, gens


def dump_subgroup_spec(spec: GroupSpec, gens: Sequence[CongruenceElement]) -> str:
    lines = [f"group family={_FILE_NAMES[spec.family]} n={spec.n} p={spec.p} k={spec.ctx.k}"]
    lines.extend(f"gen: {encode_matrix(g.M)}" for g in gens)
    return "\n".join(lines) + "\n"
