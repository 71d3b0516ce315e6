"""Exact arithmetic in F_p[t]/(t^k), matrices over it, and row reduction over F_p.

Everything here is immutable.  ``TruncatedSeries`` and ``SeriesMatrix`` carry
their ``RingCtx``; mixing contexts raises ``ValueError``.

The module also exposes a few raw helpers (``poly_mul`` and friends) that work
on plain coefficient tuples.  The closure engines in the other modules use
them directly in their inner loops to avoid object churn.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: Valuation of the zero series; compares above every integer.
TOP = math.inf


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class RingCtx:
    """The ring F_p[t]/(t^k)."""

    p: int
    k: int

    def __post_init__(self):
        if not (isinstance(self.p, int) and is_prime(self.p)):
            raise ValueError(f"p must be prime, got {self.p!r}")
        if self.p >= 2**31:
            raise ValueError("p must fit in 31 bits")
        if not (isinstance(self.k, int) and self.k >= 1):
            raise ValueError(f"k must be >= 1, got {self.k!r}")

    def series(self, coeffs: Iterable[int]) -> "TruncatedSeries":
        """Build a series from low-to-high coefficients; pads or truncates to k."""
        c = [int(x) % self.p for x in coeffs][: self.k]
        c.extend([0] * (self.k - len(c)))
        return TruncatedSeries(self, tuple(c))

    def const(self, c: int) -> "TruncatedSeries":
        return self.series([c])

    def monomial(self, i: int, c: int = 1) -> "TruncatedSeries":
        if i < 0:
            raise ValueError("negative exponent")
        coeffs = [0] * self.k
        if i < self.k:
            coeffs[i] = c % self.p
        return TruncatedSeries(self, tuple(coeffs))

    @property
    def zero(self) -> "TruncatedSeries":
        return TruncatedSeries(self, (0,) * self.k)

    @property
    def one(self) -> "TruncatedSeries":
        return self.const(1)

    @property
    def t(self) -> "TruncatedSeries":
        return self.monomial(1)

    def with_k(self, k: int) -> "RingCtx":
        return RingCtx(self.p, k)


# ---------------------------------------------------------------------------
# raw coefficient-tuple arithmetic


def poly_add(a: Sequence[int], b: Sequence[int], p: int) -> tuple:
    return tuple((x + y) % p for x, y in zip(a, b))


def poly_sub(a: Sequence[int], b: Sequence[int], p: int) -> tuple:
    return tuple((x - y) % p for x, y in zip(a, b))


def poly_mul(a: Sequence[int], b: Sequence[int], p: int, k: int) -> tuple:
    """Product of two coefficient vectors truncated below t^k."""
    acc = [0] * k
    for i, ai in enumerate(a):
        if ai:
            for j in range(k - i):
                bj = b[j]
                if bj:
                    acc[i + j] += ai * bj
    return tuple(x % p for x in acc)


def poly_inv(a: Sequence[int], p: int, k: int) -> tuple:
    if a[0] % p == 0:
        raise ZeroDivisionError("series with zero constant term is not a unit")
    inv0 = pow(a[0], -1, p)
    out = [0] * k
    out[0] = inv0
    for n in range(1, k):
        s = 0
        for i in range(1, n + 1):
            s += a[i] * out[n - i]
        out[n] = (-s * inv0) % p
    return tuple(out)


def valuation(coeffs: Sequence[int]) -> int | float:
    for i, c in enumerate(coeffs):
        if c:
            return i
    return TOP


# ---------------------------------------------------------------------------
# series


@dataclass(frozen=True)
class TruncatedSeries:
    ctx: RingCtx
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.ctx.k:
            raise ValueError("coefficient vector must have length k")

    def _check(self, other: "TruncatedSeries"):
        if not isinstance(other, TruncatedSeries):
            raise TypeError(f"expected TruncatedSeries, got {type(other).__name__}")
        if other.ctx != self.ctx:
            raise ValueError(f"ring context mismatch: {self.ctx} vs {other.ctx}")

    def _coerce(self, other):
        if isinstance(other, int):
            return self.ctx.const(other)
        self._check(other)
        return other

    def __add__(self, other):
        other = self._coerce(other)
        return TruncatedSeries(self.ctx, poly_add(self.coeffs, other.coeffs, self.ctx.p))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return TruncatedSeries(self.ctx, poly_sub(self.coeffs, other.coeffs, self.ctx.p))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        p = self.ctx.p
        return TruncatedSeries(self.ctx, tuple((-c) % p for c in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, int):
            p = self.ctx.p
            return TruncatedSeries(self.ctx, tuple((c * other) % p for c in self.coeffs))
        self._check(other)
        return TruncatedSeries(
            self.ctx, poly_mul(self.coeffs, other.coeffs, self.ctx.p, self.ctx.k)
        )

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return ts_inv(self) ** (-e)
        result, base = self.ctx.one, self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __bool__(self):
        return any(self.coeffs)

    def is_unit(self) -> bool:
        return self.coeffs[0] != 0

    def valuation(self) -> int | float:
        return valuation(self.coeffs)

    def truncate(self, k: int) -> "TruncatedSeries":
        """Reduce (or zero-extend) into F_p[t]/(t^k)."""
        return self.ctx.with_k(k).series(self.coeffs[:k])

    def __str__(self):
        return encode_series(self)

    def __repr__(self):
        return f"TruncatedSeries({encode_series(self)!r}, p={self.ctx.p}, k={self.ctx.k})"


def ts_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    a._check(b)
    return a + b


def ts_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    a._check(b)
    return a * b


def ts_inv(a: TruncatedSeries) -> TruncatedSeries:
    """Inverse of a unit of F_p[t]/(t^k)."""
    try:
        return TruncatedSeries(a.ctx, poly_inv(a.coeffs, a.ctx.p, a.ctx.k))
    except ZeroDivisionError:
        raise ValueError(f"{a} is not a unit") from None


def ts_valuation(a: TruncatedSeries) -> int | float:
    """Least i with a nonzero t^i coefficient, or ``TOP`` for zero."""
    return a.valuation()


# ---------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class SeriesMatrix:
    ctx: RingCtx
    rows: tuple

    def __post_init__(self):
        n = len(self.rows)
        for row in self.rows:
            if len(row) != n:
                raise ValueError("SeriesMatrix must be square")
            for x in row:
                if x.ctx != self.ctx:
                    raise ValueError("entry ring context mismatch")

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def _check(self, other):
        if not isinstance(other, SeriesMatrix):
            raise TypeError("expected SeriesMatrix")
        if other.ctx != self.ctx:
            raise ValueError("ring context mismatch")
        if other.n != self.n:
            raise ValueError(f"size mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        self._check(other)
        return SeriesMatrix(
            self.ctx,
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)),
        )

    def __sub__(self, other):
        self._check(other)
        return SeriesMatrix(
            self.ctx,
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)),
        )

    def __neg__(self):
        return SeriesMatrix(self.ctx, tuple(tuple(-a for a in r) for r in self.rows))

    def scale(self, c) -> "SeriesMatrix":
        return SeriesMatrix(self.ctx, tuple(tuple(a * c for a in r) for r in self.rows))

    def __matmul__(self, other):
        return mat_mul(self, other)

    def transpose(self) -> "SeriesMatrix":
        return SeriesMatrix(self.ctx, tuple(zip(*self.rows)))

    @property
    def T(self) -> "SeriesMatrix":
        return self.transpose()

    def coeff_matrix(self, i: int) -> list:
        """The F_p matrix of t^i coefficients."""
        return [[x.coeffs[i] for x in row] for row in self.rows]

    def truncate(self, k: int) -> "SeriesMatrix":
        return SeriesMatrix(
            self.ctx.with_k(k), tuple(tuple(x.truncate(k) for x in r) for r in self.rows)
        )

    def is_identity(self) -> bool:
        one, zero = self.ctx.one, self.ctx.zero
        return all(
            x == (one if i == j else zero)
            for i, r in enumerate(self.rows)
            for j, x in enumerate(r)
        )

    def __str__(self):
        return encode_matrix(self)


def mat_from_coeffs(ctx: RingCtx, layers: Sequence) -> SeriesMatrix:
    """Assemble sum_i t^i * layers[i] from integer matrices."""
    n = len(layers[0])
    rows = []
    for a in range(n):
        row = []
        for b in range(n):
            row.append(ctx.series([layer[a][b] for layer in layers]))
        rows.append(tuple(row))
    return SeriesMatrix(ctx, tuple(rows))


def mat_const(ctx: RingCtx, m: Sequence[Sequence[int]]) -> SeriesMatrix:
    return mat_from_coeffs(ctx, [m])


def mat_identity(ctx: RingCtx, n: int) -> SeriesMatrix:
    return mat_const(ctx, [[int(i == j) for j in range(n)] for i in range(n)])


def mat_mul(A: SeriesMatrix, B: SeriesMatrix) -> SeriesMatrix:
    A._check(B)
    p, k, n = A.ctx.p, A.ctx.k, A.n
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = [0] * k
            for l in range(n):
                for e, c in enumerate(poly_mul(A.rows[i][l].coeffs, B.rows[l][j].coeffs, p, k)):
                    acc[e] += c
            row.append(TruncatedSeries(A.ctx, tuple(c % p for c in acc)))
        rows.append(tuple(row))
    return SeriesMatrix(A.ctx, tuple(rows))


def mat_det(A: SeriesMatrix) -> TruncatedSeries:
    """Determinant by the division-free Berkowitz algorithm."""
    ctx, n = A.ctx, A.n
    a = [list(r) for r in A.rows]
    # vect holds the characteristic polynomial coefficients of the leading block
    vect = [ctx.one, -a[0][0]]
    for r in range(1, n):
        # R: row r, cols < r; S: col r, rows < r; C: leading r x r block
        R = a[r][:r]
        S = [a[i][r] for i in range(r)]
        C = [row[:r] for row in a[:r]]
        col = [ctx.one, -a[r][r]]
        Q = list(S)
        for _ in range(r):
            col.append(-sum((x * y for x, y in zip(R, Q)), ctx.zero))
            Q = [sum((C[i][j] * Q[j] for j in range(r)), ctx.zero) for i in range(r)]
        # Toeplitz(col) applied to vect
        new = []
        for i in range(r + 2):
            s = ctx.zero
            for j in range(min(i, r) + 1):
                if i - j < len(col):
                    s = s + col[i - j] * vect[j]
            new.append(s)
        vect = new
    det = vect[n]
    return det if n % 2 == 0 else -det


def mat_inv(A: SeriesMatrix) -> SeriesMatrix:
    """Gauss-Jordan inverse over the local ring; pivots are units."""
    ctx, n = A.ctx, A.n
    M = [list(r) + [ctx.one if i == j else ctx.zero for j in range(n)] for i, r in enumerate(A.rows)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c].is_unit()), None)
        if piv is None:
            raise ValueError("matrix is not invertible (determinant is not a unit)")
        M[c], M[piv] = M[piv], M[c]
        inv = ts_inv(M[c][c])
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return SeriesMatrix(ctx, tuple(tuple(r[n:]) for r in M))


# ---------------------------------------------------------------------------
# linear algebra over F_p


@dataclass(frozen=True)
class FpSubspace:
    """A subspace of F_p^dim stored by its reduced row echelon basis."""

    p: int
    dim: int
    rows: tuple
    pivots: tuple

    @property
    def rank(self) -> int:
        return len(self.rows)

    def array(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.array(self.rows, dtype=np.int64)

    def coordinates(self, v: Sequence[int]) -> tuple | None:
        """Coordinates of v in the echelon basis, or None if v is outside."""
        coords = tuple(int(v[c]) % self.p for c in self.pivots)
        w = [0] * self.dim
        for a, row in zip(coords, self.rows):
            if a:
                for j, x in enumerate(row):
                    w[j] += a * x
        if all((x - int(y)) % self.p == 0 for x, y in zip(w, v)):
            return coords
        return None

    def __contains__(self, v) -> bool:
        return self.coordinates(v) is not None

    def contains_subspace(self, other: "FpSubspace") -> bool:
        return all(r in self for r in other.rows)

    def join(self, other: "FpSubspace") -> "FpSubspace":
        return fp_rref(list(self.rows) + list(other.rows), self.p, self.dim)

    def is_full(self) -> bool:
        return self.rank == self.dim


def rref_array(M: np.ndarray, p: int) -> tuple[np.ndarray, list]:
    """Reduced row echelon form of an integer array mod p.

    Returns the nonzero rows and their pivot columns.
    """
    M = np.array(M, dtype=np.int64) % p
    nrows, ncols = M.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(M[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            M[[r, piv]] = M[[piv, r]]
        inv = pow(int(M[r, c]), -1, p)
        M[r] = (M[r] * inv) % p
        col = M[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            M[nzr] = (M[nzr] - np.outer(col[nzr], M[r])) % p
        pivots.append(c)
        r += 1
    return M[:r], pivots


def fp_rref(rows, p: int, ncols: int | None = None) -> FpSubspace:
    """Canonical echelon basis of the span of ``rows`` over F_p."""
    rows = list(rows) if not isinstance(rows, np.ndarray) else rows
    if ncols is None:
        if len(rows) == 0:
            raise ValueError("ncols is required for an empty generating set")
        ncols = len(rows[0])
    if len(rows) == 0:
        return FpSubspace(p, ncols, (), ())
    M = np.asarray(rows, dtype=np.int64).reshape(len(rows), -1)
    if M.shape[1] != ncols:
        raise ValueError(f"row length {M.shape[1]} != {ncols}")
    R, piv = rref_array(M, p)
    return FpSubspace(p, ncols, tuple(tuple(int(x) for x in row) for row in R), tuple(piv))


def fp_nullspace(rows, p: int, ncols: int) -> FpSubspace:
    """The subspace {x : A x = 0} for the constraint rows of A."""
    A = fp_rref(rows, p, ncols)
    free = [c for c in range(ncols) if c not in A.pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for row, pc in zip(A.rows, A.pivots):
            v[pc] = (-row[f]) % p
        basis.append(v)
    return fp_rref(basis, p, ncols)


# ---------------------------------------------------------------------------
# text encodings


def encode_series(a: TruncatedSeries) -> str:
    parts = []
    for i, c in enumerate(a.coeffs):
        if i == 0:
            parts.append(str(c))
        elif i == 1:
            parts.append(f"{c}*t")
        else:
            parts.append(f"{c}*t^{i}")
    return "+".join(parts)


_TERM = re.compile(r"^(?:(\d+)\*?)?(t(?:\^(\d+))?)?$")


def parse_series(text: str, ctx: RingCtx) -> TruncatedSeries:
    """Parse ``c0+c1*t+...``; also accepts sparse forms like ``1+t^3`` or ``-2*t``."""
    s = text.replace(" ", "").replace("−", "-")
    if not s:
        raise ValueError("empty series")
    coeffs = [0] * ctx.k
    for sign, term in re.findall(r"([+-]?)([^+-]+)", s):
        m = _TERM.match(term)
        if not m or not (m.group(1) or m.group(2)):
            raise ValueError(f"bad series term {term!r} in {text!r}")
        c = int(m.group(1)) if m.group(1) else 1
        if m.group(2):
            e = int(m.group(3)) if m.group(3) else 1
        else:
            e = 0
        if sign == "-":
            c = -c
        if e < ctx.k:
            coeffs[e] += c
    if re.sub(r"([+-]?)([^+-]+)", "", s):
        raise ValueError(f"cannot parse series {text!r}")
    return ctx.series(coeffs)


def encode_matrix(A: SeriesMatrix) -> str:
    return "[" + ", ".join("[" + ", ".join(encode_series(x) for x in r) + "]" for r in A.rows) + "]"


def parse_matrix(text: str, ctx: RingCtx) -> SeriesMatrix:
    s = text.strip()
    if not (s.startswith("[[") and s.endswith("]]")):
        raise ValueError(f"matrix must look like [[...], ...], got {text!r}")
    body = s[2:-2]
    rows = []
    for chunk in re.split(r"\]\s*,\s*\[", body):
        rows.append(tuple(parse_series(x, ctx) for x in chunk.split(",")))
    return SeriesMatrix(ctx, tuple(rows))
