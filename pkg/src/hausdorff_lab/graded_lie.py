"""Classical Lie algebras over F_p and graded subalgebras of loop algebras.

Algebras are built from the same linear relations that cut out the tangent
spaces in :mod:`matrix_groups`.  Elements are handled in coordinates with
respect to the echelon basis, so a bracket is one contraction with the
structure-constant tensor ``C[i, j, k]`` ([b_i, b_j] = sum_k C[i,j,k] b_k).

A graded subalgebra of L ⊗ t F_p[t] is stored as one subspace per degree
1..D of the coordinate space F_p^d.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fpt_ring import (
    FpSubspace,
    RingCtx,
    encode_matrix,
    fp_nullspace,
    fp_rref,
    mat_const,
    parse_matrix,
    rref_array,
)
from .matrix_groups import (
    GroupSpec,
    InvariantError,
    borel_tangent_space,
    layer_dimension,
    layer_exponent,
    normalize_family,
    tangent_space,
    worker_count,
)
from .rng import Xoshiro256
from .traces import Trace, TraceRow

CERTIFY_LIMIT = 10**5
CODIM_SLOPE = Fraction(1, 2)
SIMPLICITY_NOTE = "simple over F_p is used in place of central simple (finite-field case)"


@dataclass
class LieAlgebra:
    p: int
    family: str
    n: int
    consts: np.ndarray  # shape (d, d, d)
    basis: np.ndarray | None = None  # shape (d, s*s), echelon rows of matrices
    pivots: tuple = ()

    @property
    def d(self) -> int:
        return self.consts.shape[0]

    @property
    def s(self) -> int:
        return 0 if self.basis is None else math.isqrt(self.basis.shape[1])

    def bracket(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        return np.einsum("i,j,ijk->k", x, y, self.consts) % self.p

    def ad(self, a) -> np.ndarray:
        """Matrix M with [a, x] = x @ M for coordinate row vectors x."""
        return np.einsum("i,ijk->jk", np.asarray(a, dtype=np.int64), self.consts) % self.p

    def coords(self, v) -> np.ndarray:
        """Coordinates of a flattened matrix in the basis; ValueError if outside."""
        if self.basis is None:
            raise ValueError("algebra has no matrix basis")
        v = np.asarray(v, dtype=np.int64).reshape(-1) % self.p
        c = v[list(self.pivots)]
        if not np.array_equal((c @ self.basis) % self.p, v):
            raise ValueError("matrix is not in the algebra")
        return c

    def matrix(self, c) -> np.ndarray:
        s = self.s
        return ((np.asarray(c, dtype=np.int64) @ self.basis) % self.p).reshape(s, s)

    def full_space(self) -> FpSubspace:
        return fp_rref(np.eye(self.d, dtype=np.int64), self.p, self.d)

    def zero_space(self) -> FpSubspace:
        return FpSubspace(self.p, self.d, (), ())

    def subspace_bracket(self, U: FpSubspace, W: FpSubspace) -> FpSubspace:
        """span{[u, w] : u in U, w in W}."""
        if U.rank == 0 or W.rank == 0:
            return self.zero_space()
        P = np.einsum("ai,bj,ijk->abk", U.array(), W.array(), self.consts) % self.p
        return fp_rref(P.reshape(-1, self.d), self.p, self.d)

    def is_subalgebra(self, H: FpSubspace) -> bool:
        return H.contains_subspace(self.subspace_bracket(H, H))


def _matrix_brackets(B: np.ndarray, p: int) -> np.ndarray:
    d, ss = B.shape
    s = math.isqrt(ss)
    M = B.reshape(d, s, s)
    XY = np.einsum("iab,jbc->ijac", M, M)
    return ((XY - XY.transpose(1, 0, 2, 3)) % p).reshape(d, d, ss)


def lie_from_spec(family: str, n: int, p: int) -> LieAlgebra:
    """sl / so / sp over F_p from the tangent relations of the group."""
    family = normalize_family(family)
    spec = GroupSpec(family, n, RingCtx(p, 2))
    T = tangent_space(spec)
    d = layer_dimension(spec)
    if T.rank != d:
        raise InvariantError(f"basis size {T.rank} != layer dimension {d}")
    B = T.array()
    P = _matrix_brackets(B, p)
    C = P[:, :, list(T.pivots)]
    if not np.array_equal(np.einsum("ijk,kl->ijl", C, B) % p, P):
        raise InvariantError(f"{spec.label()}: bracket leaves the span of the basis")
    return LieAlgebra(p, family, n, C.astype(np.int64), B, tuple(T.pivots))


def abelian_lie(d: int, p: int) -> LieAlgebra:
    return LieAlgebra(p, "abelian", d, np.zeros((d, d, d), dtype=np.int64))


def check_lie_invariants(L: LieAlgebra) -> list:
    """Named violations among antisymmetry, jacobi and closure; [] if none."""
    p, C = L.p, L.consts
    out = []
    bad = np.argwhere((C + C.transpose(1, 0, 2)) % p)
    if bad.size:
        i, j, k = bad[0]
        out.append(f"antisymmetry: c[{i},{j},{k}] != -c[{j},{i},{k}]")
    if np.any(np.einsum("iik->ik", C) % p):
        out.append("antisymmetry: [b_i, b_i] != 0")
    T = np.einsum("ijm,mkl->ijkl", C, C)
    J = (T + np.transpose(T, (2, 0, 1, 3)) + np.transpose(T, (1, 2, 0, 3))) % p
    bad = np.argwhere(J)
    if bad.size:
        i, j, k, _ = bad[0]
        out.append(f"jacobi: fails on basis triple ({i},{j},{k})")
    if L.basis is not None:
        P = _matrix_brackets(L.basis, p)
        bad = np.argwhere((np.einsum("ijk,kl->ijl", C, L.basis) - P) % p)
        if bad.size:
            i, j, _ = bad[0]
            out.append(f"closure: [b_{i}, b_{j}] does not match its structure constants")
    return out


def is_perfect(L: LieAlgebra) -> bool:
    return fp_rref(L.consts.reshape(-1, L.d), L.p, L.d).rank == L.d


def _ideal_rows(C: np.ndarray, p: int, W: np.ndarray) -> np.ndarray:
    d = C.shape[0]
    rank = W.shape[0]
    while rank < d:
        N = np.einsum("rj,ijk->rik", W, C).reshape(-1, d)
        W, piv = rref_array(np.vstack([W, N]), p)
        if len(piv) == rank:
            break
        rank = len(piv)
    return W


def ideal_closure(L: LieAlgebra, v) -> FpSubspace:
    """Smallest ideal containing v."""
    v = np.asarray(v, dtype=np.int64).reshape(1, -1) % L.p
    if not v.any():
        raise ValueError("v must be nonzero")
    W, _ = rref_array(v, L.p)
    return fp_rref(_ideal_rows(L.consts, L.p, W), L.p, L.d)


def projective_class_count(p: int, d: int) -> int:
    return (p**d - 1) // (p - 1)


def _class_vector(index: int, p: int, d: int) -> np.ndarray:
    """index-th normalised vector: leading 1 at the first nonzero slot, lexicographic tails."""
    for lead in range(d):
        block = p ** (d - lead - 1)
        if index < block:
            v = np.zeros(d, dtype=np.int64)
            v[lead] = 1
            for pos in range(d - 1, lead, -1):
                index, v[pos] = divmod(index, p)
            return v
        index -= block
    raise IndexError("class index out of range")


def _scan_classes(args):
    C, p, lo, hi = args
    d = C.shape[0]
    for idx in range(lo, hi):
        v = _class_vector(idx, p, d).reshape(1, -1)
        if _ideal_rows(C, p, v).shape[0] < d:
            return idx
    return None


@dataclass
class SimplicityResult:
    status: str  # "simple", "not-simple", "unknown-if-no-witness"
    classes_checked: int
    witness: tuple | None = None
    ideal: FpSubspace | None = None
    note: str = SIMPLICITY_NOTE

    @property
    def simple(self) -> bool | None:
        return {"simple": True, "not-simple": False}.get(self.status)


def is_simple_bruteforce(L: LieAlgebra, limit: int = CERTIFY_LIMIT, workers: int | None = None,
                         chunk: int = 2048) -> SimplicityResult:
    """Every projective class must generate the whole algebra as an ideal.

    Certified when the number of classes is at most ``limit``; otherwise only
    the basis vectors are tried.  The reported witness is always the one with
    the lowest class index, whatever the number of workers.
    """
    d, p = L.d, L.p
    total = projective_class_count(p, d)
    if total > limit:
        for i in range(d):
            e = np.zeros(d, dtype=np.int64)
            e[i] = 1
            I = ideal_closure(L, e)
            if not I.is_full():
                return SimplicityResult("not-simple", i + 1, tuple(int(x) for x in e), I)
        return SimplicityResult("unknown-if-no-witness", d)
    jobs = [(L.consts, p, lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            found = [r for r in ex.map(_scan_classes, jobs) if r is not None]
        hit = min(found) if found else None
    else:
        hit = None
        for job in jobs:
            hit = _scan_classes(job)
            if hit is not None:
                break
    if hit is None:
        return SimplicityResult("simple", total)
    v = _class_vector(hit, p, d)
    return SimplicityResult("not-simple", hit + 1, tuple(int(x) for x in v), ideal_closure(L, v))


def lie_centralizer(L: LieAlgebra, a) -> FpSubspace:
    """ker ad(a) in coordinates."""
    M = L.ad(a)
    return fp_nullspace(M.T.tolist(), L.p, L.d)


# ---------------------------------------------------------------------------
# graded subalgebras of L ⊗ t F_p[t]


@dataclass
class GradedSubalgebra:
    base: LieAlgebra
    D: int
    layers: list  # layers[m-1] = K_m
    label: str = ""

    def dims(self) -> list:
        return [K.rank for K in self.layers]

    def codim_upto(self, n: int) -> int:
        return n * self.base.d - sum(self.dims()[:n])


def check_grading(K: GradedSubalgebra) -> list:
    """Pairs (a, b) with [K_a, K_b] not inside K_(a+b)."""
    L = K.base
    bad = []
    for a in range(1, K.D + 1):
        for b in range(a, K.D + 1 - a):
            if not K.layers[a + b - 1].contains_subspace(L.subspace_bracket(K.layers[a - 1], K.layers[b - 1])):
                bad.append((a, b))
    return bad


def loop_subalgebra_closure(L: LieAlgebra, gens, D: int, label: str = "") -> GradedSubalgebra:
    """Graded subalgebra generated by (coordinate vector, degree) pairs, truncated at D.

    Degree m only receives brackets of degrees a + b = m with a, b < m, so one
    pass in increasing degree reaches the fixed point.
    """
    if D < 1:
        raise ValueError("D must be >= 1")
    seeds = [[] for _ in range(D)]
    for v, deg in gens:
        if not 1 <= deg <= D:
            raise ValueError(f"generator degree {deg} outside [1, {D}]")
        seeds[deg - 1].append([int(x) % L.p for x in v])
    layers = []
    for m in range(1, D + 1):
        K = fp_rref(seeds[m - 1], L.p, L.d)
        for a in range(1, m // 2 + 1):
            K = K.join(L.subspace_bracket(layers[a - 1], layers[m - a - 1]))
        layers.append(K)
    return GradedSubalgebra(L, D, layers, label)


def density_trace(K: GradedSubalgebra, D: int | None = None) -> Trace:
    D = K.D if D is None else D
    if D > K.D:
        raise ValueError("trace longer than the computed degrees")
    rows = []
    acc = 0
    for n in range(1, D + 1):
        acc += K.layers[n - 1].rank
        rows.append(TraceRow(n, acc, n * K.base.d))
    return Trace(rows, window=math.ceil(D / 2))


def congruence_family(L: LieAlgebra, q: int, D: int) -> GradedSubalgebra:
    """Closure of the full algebra placed in degree q."""
    if q < 1:
        raise ValueError("q must be >= 1")
    gens = [(row, q) for row in np.eye(L.d, dtype=np.int64)] if q <= D else []
    return loop_subalgebra_closure(L, gens, D, label=f"congruence q={q}")


def subalgebra_family(L: LieAlgebra, H: FpSubspace, D: int, label: str = "") -> GradedSubalgebra:
    """H ⊗ t F_p[t]; H must be a subalgebra."""
    if not L.is_subalgebra(H):
        raise ValueError("H is not closed under the bracket")
    return GradedSubalgebra(L, D, [H] * D, label or f"H dim {H.rank}")


def borel_subalgebra(L: LieAlgebra) -> FpSubspace:
    spec = GroupSpec(L.family, L.n, RingCtx(L.p, 2))
    rows = [L.coords(r) for r in borel_tangent_space(spec).rows]
    return fp_rref(rows, L.p, L.d)


# ---------------------------------------------------------------------------
# isolated-point bound


@dataclass
class BoundReport:
    d: int
    bound: Fraction
    D: int
    proxy: str
    checked: list = field(default_factory=list)  # (label, density at D)
    excluded: list = field(default_factory=list)  # labels failing the codimension proxy
    violations: list = field(default_factory=list)
    note: str = SIMPLICITY_NOTE

    @property
    def passed(self) -> bool:
        return not self.violations


def linear_codimension(K: GradedSubalgebra, slope: Fraction = CODIM_SLOPE) -> bool:
    """codim(K, <= n) >= slope * n on [D/2, D]: the infinite-codimension proxy."""
    lo = max(1, math.ceil(K.D / 2))
    return all(K.codim_upto(n) >= slope * n for n in range(lo, K.D + 1))


def _sample_subalgebra(L: LieAlgebra, rng: Xoshiro256, D: int, borel: FpSubspace) -> GradedSubalgebra:
    kind = rng.below(4)
    if kind == 0:
        q = rng.randint(2, 5)
        return congruence_family(L, q, D)
    if kind == 1:
        a = rng.vector(L.d, L.p)
        H = lie_centralizer(L, a)
        return subalgebra_family(L, H, D, label=f"centralizer of {tuple(a)}")
    if kind == 2:
        gens = []
        for _ in range(rng.randint(1, 3)):
            c = np.array(rng.vector(borel.rank, L.p), dtype=np.int64)
            gens.append(((c @ borel.array()) % L.p, rng.randint(1, D)))
        return loop_subalgebra_closure(L, gens, D, label="generated inside the Borel")
    gens = [(rng.vector(L.d, L.p), rng.randint(1, 3)) for _ in range(rng.randint(1, 2))]
    return loop_subalgebra_closure(L, gens, D, label="random generators")


def isolated_bound_check(L: LieAlgebra, count: int, seed: int, D: int) -> BoundReport:
    """Densities of sampled graded subalgebras with linear codimension stay <= 1 - 1/d."""
    bound = 1 - Fraction(1, L.d)
    rep = BoundReport(
        L.d, bound, D,
        proxy=f"infinite codimension proxy: codim(K, <=n) >= {CODIM_SLOPE}*n for n in [{math.ceil(D / 2)}, {D}]",
    )
    rng = Xoshiro256(seed)
    borel = borel_subalgebra(L) if L.basis is not None else L.zero_space()
    for i in range(count):
        K = _sample_subalgebra(L, rng, D, borel)
        label = f"#{i} {K.label}"
        if not linear_codimension(K):
            rep.excluded.append(label)
            continue
        dens = density_trace(K).rows[-1].ratio
        rep.checked.append((label, dens))
        if dens > bound:
            rep.violations.append(f"{label}: density {dens} > {bound} with dims {K.dims()}")
    return rep


def group_to_graded(spec: GroupSpec, m_max: int) -> list:
    """Layer dimensions of G_m/G_(m+1), m = 1..m_max, each equal to dim L(F_p)."""
    if m_max > spec.ctx.k:
        raise ValueError(f"m_max={m_max} exceeds precision k={spec.ctx.k}")
    d = layer_dimension(spec)
    dims = [layer_exponent(spec, m) for m in range(1, m_max + 1)]
    if any(x != d for x in dims):
        raise InvariantError(f"layer dimensions {dims} differ from dim L = {d}")
    return dims


# ---------------------------------------------------------------------------
# dump format


def dump_lie(L: LieAlgebra) -> str:
    lines = [f"lie family={L.family} n={L.n} p={L.p} d={L.d}"]
    if L.basis is not None:
        ctx = RingCtx(L.p, 1)
        for i in range(L.d):
            lines.append("basis: " + encode_matrix(mat_const(ctx, L.matrix(np.eye(L.d, dtype=np.int64)[i]).tolist())))
    for i, j, k in np.argwhere(L.consts % L.p):
        lines.append(f"{i} {j} {k} {int(L.consts[i, j, k]) % L.p}")
    return "\n".join(lines) + "\n"


_LIE_HEAD = re.compile(r"^lie\s+family=(\S+)\s+n=(\d+)\s+p=(\d+)\s+d=(\d+)\s*$")


def parse_lie(text: str) -> LieAlgebra:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise ValueError("empty algebra dump")
    m = _LIE_HEAD.match(lines[0])
    if not m:
        raise ValueError(f"bad algebra header: {lines[0]!r}")
    family, n, p, d = m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4))
    ctx = RingCtx(p, 1)
    mats = []
    C = np.zeros((d, d, d), dtype=np.int64)
    for ln in lines[1:]:
        if ln.startswith("basis:"):
            M = parse_matrix(ln[len("basis:"):].strip(), ctx)
            mats.append([M[a, b].coeffs[0] for a in range(M.n) for b in range(M.n)])
            continue
        parts = ln.split()
        if len(parts) != 4:
            raise ValueError(f"bad structure constant line: {ln!r}")
        i, j, k, c = (int(x) for x in parts)
        if not (0 <= i < d and 0 <= j < d and 0 <= k < d):
            raise ValueError(f"index out of range in {ln!r}")
        C[i, j, k] = c % p
    basis, pivots = None, ()
    if mats:
        if len(mats) != d:
            raise ValueError(f"expected {d} basis matrices, found {len(mats)}")
        R = fp_rref(mats, p, len(mats[0]))
        if R.rank != d or not np.array_equal(R.array(), np.array(mats) % p):
            raise ValueError("basis matrices are not in reduced echelon form")
        basis, pivots = R.array(), R.pivots
    return LieAlgebra(p, family, n, C, basis, tuple(pivots))


__all__ = [
    "LieAlgebra", "lie_from_spec", "abelian_lie", "check_lie_invariants", "is_perfect",
    "ideal_closure", "is_simple_bruteforce", "SimplicityResult", "lie_centralizer",
    "GradedSubalgebra", "loop_subalgebra_closure", "density_trace", "congruence_family",
    "subalgebra_family", "borel_subalgebra", "check_grading", "isolated_bound_check",
    "BoundReport", "group_to_graded", "dump_lie", "parse_lie", "projective_class_count",
]
