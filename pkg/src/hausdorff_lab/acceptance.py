"""The acceptance suite run by ``hausdorff-lab verify``.

Each check returns a :class:`CheckResult`; the rendered report holds no
timings, so identical seeds give byte-identical reports.  Time budgets are
still enforced and a blown budget fails the check.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from fractions import Fraction

from .fpt_ring import RingCtx
from .formal_groups import (
    StandardGroup,
    exhaustive_points,
    fgl_additive,
    fgl_check_axioms,
    fgl_heisenberg,
    fgl_multiplicative,
    fgl_product,
    fgl_subgroup_closure,
    index_log,
    sg_level,
    sg_pow,
)
from .graded_lie import (
    borel_subalgebra,
    check_grading,
    congruence_family,
    density_trace,
    is_simple_bruteforce,
    isolated_bound_check,
    lie_from_spec,
    subalgebra_family,
)
from .hausdorff import (
    ExponentSet,
    abelian_index_log,
    chain_rule_check,
    quotient_formula_check,
    realize_dimension,
    spec_from_sets,
)
from .matrix_groups import (
    GroupSpec,
    borel_dimension,
    closed_form_dimension,
    dimension_trace,
    enumerate_congruence_group,
    kernel_by_lifting,
    layer_dimension,
    layer_exponent,
    root_generators,
)
from .rng import Xoshiro256


@dataclass
class CheckResult:
    number: int
    tag: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} [{self.number:2d}] {self.tag}: {self.detail}"


def _q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# individual checks; each returns (passed, detail)


BOREL_TABLE = [
    ("SL", 2, (2, 3, Fraction(2, 3))),
    ("SL", 3, (5, 8, Fraction(5, 8))),
    ("Sp", 2, (6, 10, Fraction(3, 5))),
    ("Sp", 3, (12, 21, Fraction(4, 7))),
    ("SO_odd", 3, (12, 21, Fraction(4, 7))),
    ("SO_even", 4, (16, 28, Fraction(4, 7))),
]


def borel_closed_form(family: str, n: int) -> Fraction:
    """Ratio dim B / dim G from the closed forms."""
    if family == "SL":
        return Fraction(n * (n + 1) - 2, 2 * n * n - 2)
    if family in ("Sp", "SO_odd"):
        return Fraction(n + 1, 2 * n + 1)
    return Fraction(n, 2 * n - 1)


def check_borel(seed: int):
    bad = []
    for family, n, want in BOREL_TABLE:
        got = borel_dimension(GroupSpec(family, n, RingCtx(3, 2)))
        if got != want or got[2] != borel_closed_form(family, n):
            bad.append(f"{family}{n}: {got}")
    return not bad, "6 groups match the tabulated triples and closed forms" if not bad else "; ".join(bad)


def check_dimensions(seed: int):
    bad, count = [], 0
    for family in ("SL", "Sp", "SO_odd", "SO_even"):
        primes = (2, 3, 5) if family == "SL" else (3, 5)
        for n in range(2 if family != "SO_even" else 4, 6):
            for p in primes:
                spec = GroupSpec(family, n, RingCtx(p, 2))
                got = layer_dimension(spec)
                count += 1
                if got != closed_form_dimension(family, n):
                    bad.append(f"{spec.label()} p={p}")
    return not bad, f"{count} (family, n, p) cases equal n^2-1 / n(2n+1) / n(2n-1)" if not bad else ", ".join(bad)


def check_formal_groups(seed: int):
    bad = []
    for make in (fgl_additive, fgl_multiplicative):
        for p in (2, 3, 5):
            rep = fgl_check_axioms(make(D=8, p=p))
            if not rep.passed:
                bad.append(f"{make.__name__} p={p}: {rep.violations[0]}")
    # exhaustive deepening, d = 1, p = 2, k = 8
    ctx = RingCtx(2, 8)
    exhaustive = 0
    for make in (fgl_additive, fgl_multiplicative):
        S = StandardGroup(make(D=8, p=2), 1, ctx)
        for x in exhaustive_points(S, S.depth):
            n = sg_level(x)
            y = sg_pow(x, 2)
            exhaustive += 1
            if sg_level(y) < min(S.N + 2 * n, S.depth):
                bad.append(f"{make.__name__}: {x.coords} level {n} -> {sg_level(y)}")
    # sampled deepening for the remaining laws and primes
    rng = Xoshiro256(seed)
    cases = [(fgl_additive, 3), (fgl_additive, 5), (fgl_multiplicative, 3), (fgl_multiplicative, 5),
             (fgl_heisenberg, 2), (fgl_heisenberg, 3)]
    per = math.ceil(10**4 / len(cases))
    for make, p in cases:
        S = StandardGroup(make(D=8, p=p), 1, RingCtx(p, 8))
        for _ in range(per):
            x = S.random_point(rng)
            n = sg_level(x)
            if sg_level(sg_pow(x, p)) < min(S.N + 2 * n, S.depth):
                bad.append(f"{make.__name__} p={p}: deepening fails at {x.coords}")
                break
    detail = f"axioms at D=8 for 6 laws; deepening on {exhaustive} exhaustive and {per * len(cases)} sampled points"
    return not bad, detail if not bad else "; ".join(bad[:3])


def check_index_growth(seed: int):
    bad, cases = [], 0
    laws = [fgl_additive(1, 8, 2), fgl_multiplicative(8, 2), fgl_additive(2, 8, 2),
            fgl_product(fgl_additive(1, 8, 2), fgl_multiplicative(8, 2))]
    for F in laws:
        S = StandardGroup(F, 1, RingCtx(2, 4))
        for n in (1, 2, 3):
            pts = list(exhaustive_points(S, n))
            res = fgl_subgroup_closure(S, pts, n)
            cases += 1
            if not res.exhausted or res.exponent != index_log(S, n) or len(pts) != 2 ** index_log(S, n):
                bad.append(f"{F.name} n={n}: closure {res.exponent} vs {index_log(S, n)}")
    return not bad, f"{cases} quotients S/S_n enumerated, all of order p^(d n)" if not bad else "; ".join(bad)


REALIZE_THETAS = (Fraction(0), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(1))


def check_realization(seed: int):
    bad = []
    for theta in REALIZE_THETAS:
        spec = realize_dimension(theta)
        for n in range(1, 1001):
            r = Fraction(abelian_index_log(spec, n), n)
            if abs(r - theta) > Fraction(1, n):
                bad.append(f"theta={_q(theta)} n={n} ratio={_q(r)}")
                break
    return not bad, "|ratio(n) - theta| <= 1/n for n <= 1000, theta in {0,1/4,1/3,1/2,2/3,1}" if not bad else "; ".join(bad)


def check_lemmas(seed: int):
    evens = spec_from_sets(ExponentSet.multiples(2))
    fours = spec_from_sets(ExponentSet.multiples(4))
    ch = chain_rule_check(evens, fours, 1000)
    qu = quotient_formula_check(fours, evens, 1000)
    ok = ch.passed and qu.passed and ch.limits["relative"] == Fraction(1, 2) and qu.limits["quotient"] == Fraction(1, 3)
    detail = (f"chain rule on {ch.levels_checked} levels (1/2 * 1/2 = 1/4); "
              f"quotient formula on {qu.levels_checked} levels (quotient 1/3)")
    return ok, detail if ok else "; ".join(ch.failures + qu.failures)[:300] or "limit mismatch"


def check_layers(seed: int):
    spec = GroupSpec("SL", 2, RingCtx(2, 4))
    lifts = [kernel_by_lifting(spec, m) for m in (2, 3, 4)]
    sizes = [len(enumerate_congruence_group(spec, m)) for m in (2, 3, 4)]
    quotients = [sizes[0]] + [sizes[i] // sizes[i - 1] for i in (1, 2)]
    tangent = {}
    for family, n in (("Sp", 2), ("SO_odd", 2)):
        gs = GroupSpec(family, n, RingCtx(3, 4))
        tangent[gs.label()] = ([layer_exponent(gs, j) for j in (1, 2, 3)], layer_dimension(gs))
    ok = lifts == [8, 8, 8] and quotients == [8, 8, 8] and all(all(x == d for x in v) for v, d in tangent.values())
    detail = f"SL2 F2 kernels {lifts} (lifting), {quotients} (group orders); " + ", ".join(
        f"{k} layers {v}" for k, (v, _) in tangent.items())
    return ok, detail


def _unipotent_traces(m_max: int):
    spec = GroupSpec("SL", 2, RingCtx(3, m_max))
    gens = root_generators(spec, 0, 1, m_max)
    g1 = dimension_trace(spec, gens, m_max, cap=10**6)
    g2 = dimension_trace(spec, gens, m_max, cap=10**6, ambient_level=2)
    return g1, g2


def check_unipotent(seed: int):
    g1, _ = _unipotent_traces(5)
    ok = not g1.flagged and all(r == Fraction(1, 3) for r in g1.ratios())
    return ok, "root subgroup I + tF_3[[t]]E12 in SL2: ratios " + ", ".join(_q(r) for r in g1.ratios())


def check_lie(seed: int):
    out = []
    ok = True
    for family, n, p, want in (("Sp", 2, 3, "simple"), ("SO_odd", 2, 3, "simple"), ("Sp", 2, 2, "not-simple")):
        L = lie_from_spec(family, n, p)
        name = GroupSpec(family, n, RingCtx(p, 2)).label().lower()
        res = is_simple_bruteforce(L)
        ok &= res.status == want
        if res.status == "not-simple":
            out.append(f"{name}(F{p}) not simple, witness {res.witness} spans an ideal of dim {res.ideal.rank}")
        else:
            out.append(f"{name}(F{p}) {res.status} ({res.classes_checked} classes)")
    return ok, "; ".join(out)


def check_density(seed: int):
    bad, notes = [], []
    D = 30
    for family in ("Sp", "SO_odd"):
        L = lie_from_spec(family, 2, 3)
        bound = 1 - Fraction(1, L.d)
        for q in (2, 3, 5):
            K = congruence_family(L, q, D)
            ratios = density_trace(K).ratios()
            if ratios != [Fraction(n // q, n) for n in range(1, D + 1)] or check_grading(K):
                bad.append(f"{family} q={q}")
            if ratios[-1] > bound:
                bad.append(f"{family} q={q} above {bound}")
        B = borel_subalgebra(L)
        K = subalgebra_family(L, B, D, label="Borel")
        want = Fraction(B.rank, L.d)
        if any(r != want for r in density_trace(K).ratios()) or want > bound:
            bad.append(f"{family} Borel")
        rep = isolated_bound_check(L, 20, seed, D)
        if not rep.passed:
            bad.extend(rep.violations)
        notes.append(f"{GroupSpec(family, 2, RingCtx(3, 2)).label().lower()}(F3) Borel {_q(want)}, {len(rep.checked)} sampled families <= {_q(bound)}")
    return not bad, "floor(n/q)/n exact for q in {2,3,5}, D=30; " + "; ".join(notes) if not bad else "; ".join(bad)


def check_level_shift(seed: int):
    m_max = 5
    g1, g2 = _unipotent_traces(m_max)
    a, b = g1.liminf_proxy, g2.liminf_proxy
    tol = Fraction(2, m_max - 2)
    ok = abs(a - b) <= tol and not (g1.flagged or g2.flagged)
    return ok, f"tail minimum over G^1 {_q(a)}, over G^2 {_q(b)}, tolerance {_q(tol)}"


def check_determinism(seed: int):
    """Seeded parts of the suite, run twice, must agree exactly."""
    first = [check_formal_groups(seed), check_density(seed)]
    second = [check_formal_groups(seed), check_density(seed)]
    return first == second, "seeded checks reproduce identical results"


CHECKS = [
    (1, "borel", check_borel, 1.0),
    (2, "dimensions", check_dimensions, 1.0),
    (3, "formal-groups", check_formal_groups, 10.0),
    (4, "index-growth", check_index_growth, 5.0),
    (5, "realization", check_realization, 5.0),
    (6, "lemmas", check_lemmas, 5.0),
    (7, "layers", check_layers, 30.0),
    (8, "unipotent", check_unipotent, 30.0),
    (9, "lie-simplicity", check_lie, 300.0),
    (10, "density", check_density, 10.0),
    (11, "level-shift", check_level_shift, 60.0),
    (12, "determinism", check_determinism, None),
]


def select_checks(filt: str | None) -> list:
    if not filt:
        return list(CHECKS)
    keys = [k.strip() for k in filt.split(",") if k.strip()]
    picked = [c for c in CHECKS if any(k == str(c[0]) or k in c[1] for k in keys)]
    if not picked:
        raise ValueError(f"filter {filt!r} matches no check")
    return picked


def run_checks(seed: int = 0, filt: str | None = None) -> list:
    results = []
    for number, tag, fn, budget in select_checks(filt):
        t0 = time.perf_counter()
        try:
            ok, detail = fn(seed)
        except Exception as exc:  # a crash is a failed check, reported by name
            ok, detail = False, f"error: {type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0
        if budget is not None and dt > budget:
            ok, detail = False, f"{detail} (over the {budget:g}s budget)"
        results.append(CheckResult(number, tag, bool(ok), detail, dt))
    return results


def render_report(results: list, seed: int, fmt: str = "text") -> str:
    if fmt == "jsonl":
        lines = [json.dumps({"check": r.number, "tag": r.tag, "passed": r.passed, "detail": r.detail}, sort_keys=True)
                 for r in results]
        lines.append(json.dumps({"seed": seed, "passed": sum(r.passed for r in results), "total": len(results)},
                                sort_keys=True))
        return "\n".join(lines) + "\n"
    lines = [f"hausdorff-lab verify seed={seed}"]
    lines += [r.line() for r in results]
    lines.append(f"summary: {sum(r.passed for r in results)}/{len(results)} passed")
    return "\n".join(lines) + "\n"
