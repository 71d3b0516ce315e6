"""Abelian spectrum workbench over the additive group (t F_p[[t]])^d.

A closed "coordinate subgroup" is described by one exponent set per
coordinate: exponent i in S_j means the coefficient of t^(1+i) in coordinate j
is free, all others vanish.  Its image in S/S_n has p-exponent
sum_j |S_j ∩ [0, n)|, so dimension traces are pure counting and every ratio
is an exact rational.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .traces import Trace, TraceRow


@dataclass(frozen=True)
class ExponentSet:
    """prefix ∪ {n >= start : period[(n - start) mod len(period)] == 1}."""

    prefix: tuple = ()
    period: tuple = (0,)
    start: int = 0

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must have length >= 1")
        if any(f not in (0, 1) for f in self.period):
            raise ValueError("period entries are 0/1 membership flags")
        if self.start < 0:
            raise ValueError("start must be >= 0")
        if list(self.prefix) != sorted(set(self.prefix)):
            raise ValueError("prefix must be strictly increasing")
        if any(not 0 <= x < self.start for x in self.prefix):
            raise ValueError("prefix elements must lie in [0, start)")

    @classmethod
    def full(cls) -> "ExponentSet":
        return cls((), (1,), 0)

    @classmethod
    def empty(cls) -> "ExponentSet":
        return cls((), (0,), 0)

    @classmethod
    def multiples(cls, q: int) -> "ExponentSet":
        if q < 1:
            raise ValueError("q must be >= 1")
        return cls((), (1,) + (0,) * (q - 1), 0)

    @property
    def length(self) -> int:
        return len(self.period)

    def __contains__(self, i: int) -> bool:
        if i < self.start:
            return i in self.prefix
        return self.period[(i - self.start) % self.length] == 1

    def count_below(self, n: int) -> int:
        """|S ∩ [0, n)|."""
        if n <= self.start:
            return sum(1 for x in self.prefix if x < n)
        q, r = divmod(n - self.start, self.length)
        return len(self.prefix) + q * sum(self.period) + sum(self.period[:r])

    @property
    def density(self) -> Fraction:
        return Fraction(sum(self.period), self.length)

    def deviation_bound(self) -> int:
        """C with |count_below(n) - n * density| <= C for every n."""
        return self.start + self.length

    def issubset(self, other: "ExponentSet") -> bool:
        horizon = max(self.start, other.start) + math.lcm(self.length, other.length)
        return all((i not in self) or (i in other) for i in range(horizon))

    def members(self, n: int) -> list:
        return [i for i in range(n) if i in self]


@dataclass(frozen=True)
class CoordinateSubgroupSpec:
    sets: tuple
    p: int = 2

    @property
    def d(self) -> int:
        return len(self.sets)

    def __post_init__(self):
        if not self.sets:
            raise ValueError("need at least one coordinate")

    @property
    def density(self) -> Fraction:
        """The exact limit of the dimension trace."""
        return sum((s.density for s in self.sets), Fraction(0)) / self.d

    def issubset(self, other: "CoordinateSubgroupSpec") -> bool:
        if other.d != self.d:
            return False
        return all(a.issubset(b) for a, b in zip(self.sets, other.sets))

    def error_constant(self) -> Fraction:
        """|ratio(n) - density| <= error_constant() / n."""
        return Fraction(sum(s.deviation_bound() for s in self.sets), self.d)


def abelian_index_log(spec: CoordinateSubgroupSpec, n: int) -> int:
    """log_p |H S_n : S_n| for the coordinate subgroup H."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return sum(s.count_below(n) for s in spec.sets)


def abelian_trace(spec: CoordinateSubgroupSpec, n_max: int) -> Trace:
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    rows = [TraceRow(n, abelian_index_log(spec, n), spec.d * n) for n in range(1, n_max + 1)]
    return Trace(rows, window=math.ceil(n_max / 2))


def beatty_set(theta: Fraction) -> ExponentSet:
    """{n : ceil((n+1) theta) > ceil(n theta)}; |S ∩ [0,n)| = ceil(n theta).

    The ceiling form starts at 0 when theta > 0, so theta = 1/2 gives the evens.
    """
    theta = Fraction(theta)
    if not 0 <= theta <= 1:
        raise ValueError(f"theta={theta} outside [0, 1]")
    b = theta.denominator
    flags = tuple(int(math.ceil((i + 1) * theta) > math.ceil(i * theta)) for i in range(b))
    return ExponentSet((), flags, 0)


def realize_dimension(theta, d: int = 1, p: int = 2) -> CoordinateSubgroupSpec:
    """A coordinate subgroup whose trace converges to theta with error <= 1/n."""
    if d != 1:
        raise ValueError("realisation is implemented for d = 1")
    return CoordinateSubgroupSpec((beatty_set(Fraction(theta)),), p)


def splice_dimension(
    inner: CoordinateSubgroupSpec, outer: CoordinateSubgroupSpec, theta
) -> CoordinateSubgroupSpec:
    """Subgroup between ``inner`` and ``outer`` of density eta + theta (kappa - eta).

    In each coordinate the exponents of outer \\ inner are enumerated in order
    and a Beatty pattern for theta selects which of them to add to inner.
    """
    if not inner.issubset(outer):
        raise ValueError("inner spec is not contained in outer spec")
    pattern = beatty_set(Fraction(theta))
    sets = []
    for a, b in zip(inner.sets, outer.sets):
        start = max(a.start, b.start)
        L = math.lcm(a.length, b.length)
        gap_before = [i for i in range(start) if i in b and i not in a]
        gap_per_period = sum(1 for i in range(start, start + L) if i in b and i not in a)
        span = L * pattern.length if gap_per_period else L
        members = set(i for i in range(start + span) if i in a)
        j = 0
        for i in range(start + span):
            if i in b and i not in a:
                if j in pattern:
                    members.add(i)
                j += 1
        assert j == len(gap_before) + gap_per_period * (span // L)
        prefix = tuple(sorted(i for i in members if i < start))
        flags = tuple(int(i in members) for i in range(start, start + span))
        sets.append(ExponentSet(prefix, flags, start))
    return CoordinateSubgroupSpec(tuple(sets), inner.p)


# ---------------------------------------------------------------------------
# subgroup / quotient identities


@dataclass
class IdentityReport:
    name: str
    levels_checked: int = 0
    failures: list = field(default_factory=list)
    limits: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures


def _require_nested(small: CoordinateSubgroupSpec, big: CoordinateSubgroupSpec):
    if small.d != big.d:
        raise ValueError("specs have different dimensions")
    if not small.issubset(big):
        raise ValueError("specs are not nested")


def _check_convergence(rep: IdentityReport, label: str, spec: CoordinateSubgroupSpec, n_max: int):
    C = spec.error_constant()
    lim = spec.density
    for n in range(1, n_max + 1):
        r = Fraction(abelian_index_log(spec, n), spec.d * n)
        if abs(r - lim) > C / n:
            rep.failures.append(f"{label}: ratio({n})={r} not within {C}/{n} of {lim}")
            return


def chain_rule_check(H: CoordinateSubgroupSpec, K: CoordinateSubgroupSpec, n_max: int) -> IdentityReport:
    """hdim_G(K) = hdim_G(H) * hdim_H(K), level by level and in the limit."""
    _require_nested(K, H)
    rep = IdentityReport("chain rule")
    for n in range(1, n_max + 1):
        den = H.d * n
        nH, nK = abelian_index_log(H, n), abelian_index_log(K, n)
        if nH == 0:
            if nK != 0:
                rep.failures.append(f"n={n}: K visible while H is not")
            continue
        # relative trace of K inside H with the induced filtration H ∩ S_n
        rel = Fraction(nK, nH)
        if Fraction(nK, den) != Fraction(nH, den) * rel:
            rep.failures.append(f"n={n}: {nK}/{den} != ({nH}/{den}) * ({nK}/{nH})")
        rep.levels_checked += 1
    for label, spec in (("H", H), ("K", K)):
        _check_convergence(rep, label, spec, n_max)
    dH, dK = H.density, K.density
    rel_lim = dK / dH if dH else None
    rep.limits = {"hdim_H": dH, "hdim_K": dK, "relative": rel_lim}
    if rel_lim is not None and dK != dH * rel_lim:
        rep.failures.append("limit identity fails")
    if rel_lim is None and dK != 0:
        rep.failures.append("H has density 0 but K does not")
    return rep


def quotient_formula_check(N: CoordinateSubgroupSpec, H: CoordinateSubgroupSpec, n_max: int) -> IdentityReport:
    """hdim(H) = (1 - hdim N) hdim_{G/N}(H/N) + hdim N, level by level and in the limit."""
    _require_nested(N, H)
    rep = IdentityReport("quotient formula")
    for n in range(1, n_max + 1):
        den = H.d * n
        nH, nN = abelian_index_log(H, n), abelian_index_log(N, n)
        if den == nN:
            continue
        # image of H/N in (G/N)/(S_n N/N): complement counts
        q = Fraction(nH - nN, den - nN)
        hN = Fraction(nN, den)
        if Fraction(nH, den) != (1 - hN) * q + hN:
            rep.failures.append(f"n={n}: quotient identity fails")
        rep.levels_checked += 1
    for label, spec in (("N", N), ("H", H)):
        _check_convergence(rep, label, spec, n_max)
    dN, dH = N.density, H.density
    q_lim = (dH - dN) / (1 - dN) if dN != 1 else None
    rep.limits = {"hdim_N": dN, "hdim_H": dH, "quotient": q_lim}
    if q_lim is not None and dH != (1 - dN) * q_lim + dN:
        rep.failures.append("limit identity fails")
    return rep


# ---------------------------------------------------------------------------
# text format


def _fmt_list(xs) -> str:
    return "[" + ",".join(str(x) for x in xs) + "]"


def dump_abelian_spec(spec: CoordinateSubgroupSpec) -> str:
    lines = [f"abelian d={spec.d} p={spec.p}"]
    for i, s in enumerate(spec.sets, 1):
        lines.append(f"S{i}: prefix={_fmt_list(s.prefix)} period={_fmt_list(s.period)} from={s.start}")
    return "\n".join(lines) + "\n"


_HEAD = re.compile(r"^abelian\s+d=(\d+)\s+p=(\d+)\s*$")
_LINE = re.compile(r"^S(\d+):\s*prefix=\[([\d,\s]*)\]\s+period=\[([\d,\s]*)\]\s+from=(\d+)\s*$")


def parse_abelian_spec(text: str) -> CoordinateSubgroupSpec:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise ValueError("empty abelian spec")
    m = _HEAD.match(lines[0])
    if not m:
        raise ValueError(f"bad abelian header: {lines[0]!r}")
    d, p = int(m.group(1)), int(m.group(2))
    sets: dict = {}
    for ln in lines[1:]:
        mm = _LINE.match(ln)
        if not mm:
            raise ValueError(f"bad coordinate line: {ln!r}")
        idx = int(mm.group(1))

        def ints(s):
            return tuple(int(x) for x in s.split(",") if x.strip())

        sets[idx] = ExponentSet(ints(mm.group(2)), ints(mm.group(3)), int(mm.group(4)))
    if sorted(sets) != list(range(1, d + 1)):
        raise ValueError(f"expected coordinates S1..S{d}")
    return CoordinateSubgroupSpec(tuple(sets[i] for i in range(1, d + 1)), p)


def spec_from_sets(*sets: Sequence[ExponentSet], p: int = 2) -> CoordinateSubgroupSpec:
    return CoordinateSubgroupSpec(tuple(sets), p)
