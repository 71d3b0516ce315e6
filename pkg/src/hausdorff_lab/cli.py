"""Command-line front end: ``hausdorff-lab <command> [options]``.

Exit codes: 0 success, 2 partial result (closure cap hit), 3 invariant
violation or failed check, 4 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import acceptance
from .fpt_ring import RingCtx
from .formal_groups import (
    fgl_additive,
    fgl_check_axioms,
    fgl_heisenberg,
    fgl_multiplicative,
    parse_fgl,
)
from .graded_lie import (
    borel_subalgebra,
    check_lie_invariants,
    congruence_family,
    density_trace,
    dump_lie,
    is_perfect,
    is_simple_bruteforce,
    isolated_bound_check,
    lie_from_spec,
    parse_lie,
    subalgebra_family,
)
from .hausdorff import abelian_trace, dump_abelian_spec, parse_abelian_spec, realize_dimension
from .matrix_groups import (
    DEFAULT_CAP,
    GroupSpec,
    InvariantError,
    borel_dimension,
    dimension_trace,
    normalize_family,
    parse_subgroup_spec,
    spectrum_sample,
)
from .traces import fmt_fraction

EXIT_OK, EXIT_CAP, EXIT_INVARIANT, EXIT_INPUT = 0, 2, 3, 4


class InputError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _records(rows: list, fmt: str) -> str:
    """rows: list of dicts with consistent keys."""
    if not rows:
        return ""
    if fmt == "jsonl":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    keys = list(rows[0])
    return ",".join(keys) + "\n" + "".join(",".join(str(r[k]) for k in keys) + "\n" for r in rows)


def _q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# commands


def cmd_borel(args) -> int:
    if args.family:
        if args.n is None:
            raise InputError("--n is required with --family")
        cases = [(normalize_family(args.family), args.n)]
    else:
        cases = [(f, n) for f, n, _ in acceptance.BOREL_TABLE]
    rows = []
    for family, n in cases:
        spec = GroupSpec(family, n, RingCtx(args.p or 3, 2))
        dB, dG, q = borel_dimension(spec)
        rows.append({"family": spec.label(), "n": n, "dim_B": dB, "dim_G": dG, "ratio": _q(q),
                     "decimal": f"{float(q):.6f}"})
    _emit(_records(rows, args.format), args.out)
    return EXIT_OK


def cmd_hdim(args) -> int:
    if not args.spec:
        raise InputError("--spec <path> is required")
    text = Path(args.spec).read_text()
    head = text.lstrip().split(None, 1)[0] if text.strip() else ""
    if head == "abelian":
        spec = parse_abelian_spec(text)
        trace = abelian_trace(spec, args.mmax or 20)
    elif head == "group":
        spec, gens = parse_subgroup_spec(text)
        m_max = args.mmax or spec.ctx.k
        trace = dimension_trace(spec, gens, m_max, cap=args.cap, method=args.method)
    else:
        raise InputError("spec file must start with 'group' or 'abelian'")
    _emit(trace.render(args.format), args.out)
    if trace.flagged:
        print("closure cap reached; ratios are lower bounds", file=sys.stderr)
        return EXIT_CAP
    return EXIT_OK


def cmd_realize(args) -> int:
    if args.theta is None:
        raise InputError("--theta is required")
    n_max = args.mmax or 100
    spec = realize_dimension(args.theta)
    trace = abelian_trace(spec, n_max)
    spec_text = dump_abelian_spec(spec)
    if args.out:
        Path(args.out).write_text(trace.render(args.format))
        sys.stdout.write(spec_text)
    else:
        sys.stdout.write(spec_text + "\n" + trace.render(args.format))
    last = trace.rows[-1].ratio
    if abs(last - args.theta) > Fraction(1, n_max):
        print(f"final ratio {fmt_fraction(last)} not within 1/{n_max} of theta", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_lie(args) -> int:
    if args.spec:
        L = parse_lie(Path(args.spec).read_text())
    else:
        if not args.family or args.n is None or args.p is None:
            raise InputError("lie needs --spec or --family, --n and --p")
        L = lie_from_spec(args.family, args.n, args.p)
    if args.dump:
        _emit(dump_lie(L), args.out)
        return EXIT_OK
    D = args.D or 30
    report = {"family": L.family, "n": L.n, "p": L.p, "d": L.d}
    violations = check_lie_invariants(L)
    report["invariant_violations"] = violations
    if violations:
        _emit(_lie_render(report, args.format), args.out)
        return EXIT_INVARIANT
    report["perfect"] = is_perfect(L)
    res = is_simple_bruteforce(L)
    report["simplicity"] = res.status
    report["simplicity_classes_checked"] = res.classes_checked
    report["simplicity_note"] = res.note
    if res.witness is not None:
        report["witness"] = list(res.witness)
        report["witness_ideal_dim"] = res.ideal.rank
    bound = 1 - Fraction(1, L.d)
    families = {}
    for q in (2, 3, 5):
        families[f"congruence q={q}"] = density_trace(congruence_family(L, q, D)).rows[-1].ratio
    if L.basis is not None:
        B = borel_subalgebra(L)
        families["Borel"] = density_trace(subalgebra_family(L, B, D)).rows[-1].ratio
    report["densities_at_D"] = {k: _q(v) for k, v in families.items()}
    report["D"] = D
    report["bound"] = _q(bound)
    rep = isolated_bound_check(L, args.count if args.count is not None else 20, args.seed, D)
    report["bound_proxy"] = rep.proxy
    report["bound_checked"] = len(rep.checked)
    report["bound_excluded"] = len(rep.excluded)
    report["bound_violations"] = rep.violations
    _emit(_lie_render(report, args.format), args.out)
    return EXIT_OK if rep.passed else EXIT_INVARIANT


def _lie_render(report: dict, fmt: str) -> str:
    if fmt == "jsonl":
        return json.dumps(report, sort_keys=True) + "\n"
    return "".join(f"{k}: {v}\n" for k, v in report.items())


def cmd_verify(args) -> int:
    results = acceptance.run_checks(args.seed, args.filter)
    if args.spec:
        L = parse_lie(Path(args.spec).read_text())
        bad = check_lie_invariants(L)
        results.append(acceptance.CheckResult(0, "lie-dump", not bad, "; ".join(bad) or "structure constants consistent"))
    fmt = "jsonl" if args.format == "jsonl" else "text"
    _emit(acceptance.render_report(results, args.seed, fmt), args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def cmd_spectrum(args) -> int:
    if not args.family or args.n is None or args.p is None:
        raise InputError("spectrum needs --family, --n and --p")
    m = args.mmax or 3
    spec = GroupSpec(normalize_family(args.family), args.n, RingCtx(args.p, args.k or m))
    ratios, flagged = spectrum_sample(spec, m, args.count or 10, args.seed, cap=args.cap, method=args.method)
    rows = [{"sample": i, "level": m, "ratio": _q(q), "decimal": f"{float(q):.6f}"} for i, q in enumerate(ratios)]
    _emit(_records(rows, args.format), args.out)
    return EXIT_CAP if flagged else EXIT_OK


_LAWS = {"additive": fgl_additive, "multiplicative": fgl_multiplicative, "heisenberg": fgl_heisenberg}


def cmd_fgl(args) -> int:
    if args.spec:
        F = parse_fgl(Path(args.spec).read_text())
    else:
        law = args.family or "additive"
        if law not in _LAWS:
            raise InputError(f"unknown law {law!r}; choose from {sorted(_LAWS)}")
        F = _LAWS[law](D=args.D or 8, p=args.p or 2)
    rep = fgl_check_axioms(F)
    lines = [f"law: {F.name or 'custom'} d={F.d} D={F.D} p={F.p}",
             f"checked through degree {rep.checked_mod_degree}"]
    lines += [f"violation: {v}" for v in rep.violations]
    lines.append("axioms: " + ("pass" if rep.passed else "fail"))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if rep.passed else EXIT_INVARIANT


COMMANDS = {
    "borel": (cmd_borel, "Borel dimension ratios"),
    "hdim": (cmd_hdim, "dimension trace of a subgroup spec file"),
    "realize": (cmd_realize, "abelian subgroup of a given dimension"),
    "lie": (cmd_lie, "Lie algebra report: simplicity, densities, bound"),
    "verify": (cmd_verify, "run the acceptance suite"),
    "spectrum": (cmd_spectrum, "level-m ratios of random finitely generated subgroups"),
    "fgl": (cmd_fgl, "check formal group law axioms"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family")
    common.add_argument("--n", type=int)
    common.add_argument("--p", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--mmax", type=int)
    common.add_argument("--D", type=int)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--count", type=int)
    common.add_argument("--theta", type=_fraction)
    common.add_argument("--spec", "--fgl", dest="spec", help="input file (subgroup, abelian, lie or fgl)")
    common.add_argument("--out")
    common.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    common.add_argument("--filter")
    common.add_argument("--method", choices=("bfs", "pc"), default="bfs")
    common.add_argument("--dump", action="store_true", help="lie: write the algebra dump instead of a report")
    parser = argparse.ArgumentParser(prog="hausdorff-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    fn = COMMANDS[args.command][0]
    try:
        return fn(args)
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (InputError, ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
