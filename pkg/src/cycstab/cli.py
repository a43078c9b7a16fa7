"""Command-line front end: enumerate, classify, dualize, construct families,
measure degree growth, verify against the bundled reference data.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 node budget
exhausted.  All output is deterministic for a fixed command line and seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources

from . import birational, closed_forms, enumeration, patterns
from .cyclotomic import gauss_sum_checks
from .patterns import Pattern, PatternError, SignedPattern, StabilityClass


EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _data_path(name: str):
    return resources.files("cycstab.data").joinpath(name)


def _klass_code(rep) -> str:
    signed = isinstance(rep.subject, SignedPattern)
    base = "P" if rep.klass is StabilityClass.PRODUCT_STABLE else "IP"
    return base + ("S" if signed else "")


def _report_json(rep) -> dict:
    return {
        "bracket": rep.subject.bracket(),
        "q": rep.subject.q,
        "colors": rep.subject.r,
        "class": rep.klass.value,
        "dual_bracket": rep.dual.bracket() if rep.dual else None,
        "witness": list(rep.witness) if rep.witness else None,
    }


# ---------------------------------------------------------------------------
# subcommands


def _cmd_enumerate(args) -> int:
    modes = ["product", "inverse"] if args.mode == "all" else [args.mode]
    signed_opts = [False, True] if args.signed == "all" else [args.signed == "yes"]
    rows = []
    complete = True
    for signed in signed_opts:
        mode = "inverse" if args.mode == "all" else args.mode
        cfg = enumeration.SearchConfig(
            q=args.q,
            signed=signed,
            mode=mode,
            atom_source="admissible" if args.atoms == "admissible" else "all",
            max_nodes=args.max_nodes,
        )
        result = enumeration.enumerate_stable(cfg)
        complete &= result.complete
        for rep in result.stable:
            if args.mode == "product" and rep.klass is not StabilityClass.PRODUCT_STABLE:
                continue
            rows.append(rep)
    rows.sort(key=lambda r: (isinstance(r.subject, SignedPattern), r.subject.r, r.subject.bracket()))
    if args.format == "json":
        payload = [
            {"bracket": r.subject.bracket(), "class": _klass_code(r), "dual_bracket": r.dual.bracket()}
            for r in rows
        ]
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        counts = {"P": 0, "PS": 0, "IP": 0, "IPS": 0}
        lines = []
        for r in rows:
            code = _klass_code(r)
            counts[code] += 1
            lines.append(f"{code:4} {r.subject.bracket()} -> {r.dual.bracket()}")
        lines.append(
            f"counts: P={counts['P']} PS={counts['PS']} IP={counts['IP']} IPS={counts['IPS']} "
            f"total={sum(counts.values())}"
        )
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if complete else EXIT_BUDGET


def _parse_subject(q: int, bracket: str):
    subject = patterns.parse_bracket(bracket)
    if subject.q != q:
        raise PatternError(f"bracket has {subject.q} entries, --q is {q}")
    return subject


def _cmd_classify(args) -> int:
    subject = _parse_subject(args.q, args.pattern)
    rep = patterns.classify(subject)
    sys.stdout.write(json.dumps(_report_json(rep), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_dual(args) -> int:
    subject = _parse_subject(args.q, args.pattern)
    rep = patterns.classify(subject)
    if rep.dual is None:
        sys.stdout.write("unstable: no dual\n")
        return EXIT_VERIFY_FAILED
    sys.stdout.write(rep.dual.bracket() + "\n")
    return EXIT_OK


def _cmd_families(args) -> int:
    fam = args.family.lower()
    out: list[dict] = []
    if fam in ("p1", "p2", "p3", "q1", "q2", "q3"):
        for spec, subject in closed_forms.six_families(args.q):
            if spec.family_id.lower() != fam:
                continue
            rep = patterns.classify(subject)
            out.append(_report_json(rep) | {"family": spec.family_id})
    elif fam == "qr":
        data = closed_forms.quadratic_residue_pattern(args.q)
        rep = patterns.classify(data.pattern)
        out.append(_report_json(rep) | {"family": "QR"})
    elif fam == "prime":
        census = closed_forms.prime_pattern_census(args.q)
        for pat in census.constructed:
            out.append(_report_json(patterns.classify(pat)) | {"family": "prime"})
    elif fam == "prime-square":
        p = args.p
        if p is None or p * p != args.q:
            raise PatternError("prime-square needs --p with p^2 = q")
        for pat in closed_forms.prime_square_patterns(p):
            out.append(_report_json(patterns.classify(pat)) | {"family": "prime-square"})
    elif fam == "two-primes":
        if args.p1 is None or args.p2 is None or args.p1 * args.p2 != args.q:
            raise PatternError("two-primes needs --p1 and --p2 with p1*p2 = q")
        pat = closed_forms.two_prime_pattern(args.p1, args.p2)
        out.append(_report_json(patterns.classify(pat)) | {"family": "two-primes"})
    elif fam == "monocolor":
        for sol in closed_forms.monocolor_search(args.q):
            rep = patterns.classify(sol)
            out.append(_report_json(rep) | {"family": "monocolor"})
    else:
        raise PatternError(f"unknown family {args.family!r}")
    sys.stdout.write(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_complexity(args) -> int:
    subject = _parse_subject(args.q, args.pattern)
    seq = birational.degree_sequence(
        subject,
        args.iters,
        seed=args.seed,
        prime_bits=args.prime_bits,
        half_steps=args.half_steps,
    )
    if len(seq.degrees) >= 6:
        birational.fit_recurrence(seq)
    sys.stdout.write(seq.to_json() + "\n")
    return EXIT_OK


def _cmd_census(args) -> int:
    census = closed_forms.prime_pattern_census(args.q)
    payload = {
        "q": census.q,
        "constructed_count": census.constructed_count,
        "formula_value": census.formula_value,
        "enumerated_count": census.enumerated_count,
        "formula_minus_enumerated": census.discrepancy,
        "note": "the divisor-count formula double-counts the standard Potts pattern",
    }
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify suites


def _check(lines: list[str], name: str, ok: bool, detail: str = "") -> bool:
    tag = "PASS" if ok else "FAIL"
    lines.append(f"{tag} {name}" + (f": {detail}" if detail else ""))
    return ok


def _load_table_counts():
    t1, t2 = {}, {}
    with open(_data_path("table_counts.txt"), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            f = line.split()
            if f[0] == "T1":
                t1[int(f[1])] = tuple(int(x) for x in f[2:])
            else:
                t2[int(f[1])] = int(f[2])
    return t1, t2


def _suite_tables(lines: list[str], deep: bool) -> bool:
    t1, t2 = _load_table_counts()
    ok = True
    for q, expect in sorted(t1.items()):
        counts, _ = enumeration.classify_all(q)
        got = (
            counts["p_pattern"],
            counts["p_signed"],
            counts["ip_pattern"],
            counts["ip_signed"],
            counts["total"],
        )
        ok &= _check(lines, f"counts q={q}", got == expect, f"got {got}, reference {expect}")
    qmax = 20 if deep else 16
    for q, expect in sorted(t2.items()):
        if q > qmax or q in t1:
            continue
        got = enumeration.count_product_stable(q)
        ok &= _check(lines, f"product-stable count q={q}", got == expect, f"got {got}, reference {expect}")
    return ok


def _suite_q8(lines: list[str]) -> bool:
    golden = enumeration.load_golden(_data_path("q8_stable.txt"))
    _, reps = enumeration.classify_all(8)
    produced = {r.subject.bracket(): r.dual.bracket() for r in reps}
    diff = enumeration.golden_diff(produced, golden)
    return _check(
        lines,
        "q=8 listing with dual pairings",
        diff.empty,
        f"{len(produced)}/57 entries; " + diff.summary(),
    )


def _suite_q25(lines: list[str]) -> bool:
    golden = set(enumeration.load_golden(_data_path("q25_product_stable.txt")))
    constructed = {p.bracket() for p in closed_forms.prime_square_patterns(5)}
    ok = _check(
        lines,
        "q=25 constructed = reference listing",
        constructed == golden,
        f"{len(constructed)} constructed vs {len(golden)} reference",
    )
    enum_count = enumeration.count_product_stable(25)
    ok &= _check(lines, "q=25 enumerated count", enum_count == 13, f"got {enum_count}")
    return ok


def _suite_monocolor(lines: list[str]) -> bool:
    ok = True
    hits = []
    for q in range(1, 21):
        sols = closed_forms.monocolor_search(q)
        if sols:
            hits.append(q)
    ok &= _check(lines, "monocolor solutions exactly at q in {1, 4}", hits == [1, 4], f"found at {hits}")
    sols4 = [s.bracket() for s in closed_forms.monocolor_search(4)]
    ok &= _check(
        lines,
        "q=4 monocolor contains [a,-a,-a,-a]",
        "[a,-a,-a,-a]" in sols4,
        f"solutions: {sols4}",
    )
    return ok


def _suite_families(lines: list[str]) -> bool:
    ok = True
    for q in (4, 6, 8, 10, 12):
        entries = dict(
            (spec.family_id, subject) for spec, subject in closed_forms.six_families(q)
        )
        verdicts = {fid: patterns.classify(s) for fid, s in entries.items()}
        good = all(
            verdicts[f].klass is StabilityClass.PRODUCT_STABLE for f in ("P1", "P2", "P3")
        ) and all(verdicts[f].stable for f in ("Q1", "Q2", "Q3"))
        pairing = all(
            verdicts[f"P{i}"].dual.bracket() == entries[f"Q{i}"].bracket()
            and verdicts[f"Q{i}"].dual.bracket() == entries[f"P{i}"].bracket()
            for i in (1, 2, 3)
        )
        ok &= _check(lines, f"six families at q={q}", good and pairing)
    return ok


def _suite_gauss(lines: list[str]) -> bool:
    ok = True
    for q in (3, 4, 5, 7, 8, 13):
        ok &= _check(lines, f"gauss sum q={q}", gauss_sum_checks(q))
    return ok


def _suite_invariant(lines: list[str]) -> bool:
    import random

    ok = True
    for q in (5, 13):
        pat = closed_forms.quadratic_residue_pattern(q).pattern
        rng = random.Random(1000 + q)
        checked = 0
        good = True
        while checked < 10:
            vals = [Fraction(rng.randint(1, 60)) for _ in range(3)]
            try:
                pt = birational.ColorPoint.make(pat, vals)
                u, v = vals[1] / vals[0], vals[2] / vals[0]
                before = birational.delta_invariant(u, v, q)
                img = birational.apply_K(pt)
                after = birational.delta_invariant(
                    img.values[1] / img.values[0], img.values[2] / img.values[0], q
                )
            except (
                ZeroDivisionError,
                birational.SingularMatrix,
                birational.PatternViolation,
                birational.ZeroColorValue,
            ):
                continue
            checked += 1
            good &= before == after
        ok &= _check(lines, f"invariant preserved under K at q={q}", good, "10 random points")
    return ok


def _cmd_verify(args) -> int:
    suites = {
        "tables": lambda lines: _suite_tables(lines, args.deep),
        "q8": _suite_q8,
        "q25": _suite_q25,
        "monocolor": _suite_monocolor,
        "families": _suite_families,
        "gauss": _suite_gauss,
        "invariant": _suite_invariant,
    }
    names = list(suites) if args.suite == "all" else [args.suite]
    lines: list[str] = []
    all_ok = True
    for name in names:
        all_ok &= suites[name](lines)
    sys.stdout.write("\n".join(lines) + "\n")
    sys.stdout.write(("OK" if all_ok else "FAILED") + "\n")
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cycstab",
        description="Stable patterns of cyclic matrices: enumeration, duality, degree growth.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("enumerate", help="enumerate stable (signed-)patterns")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--signed", choices=["yes", "no", "all"], default="all")
    p.add_argument("--mode", choices=["product", "inverse", "all"], default="all")
    p.add_argument("--atoms", choices=["all", "admissible"], default="admissible")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.add_argument("--out", default=None)
    p.add_argument("--max-nodes", type=int, default=200_000_000)
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("classify", help="classify one bracket pattern")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--pattern", required=True)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("dual", help="print the Fourier-dual bracket")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--pattern", required=True)
    p.set_defaults(func=_cmd_dual)

    p = sub.add_parser("families", help="construct closed-form families")
    p.add_argument(
        "--family",
        required=True,
        choices=["p1", "p2", "p3", "q1", "q2", "q3", "qr", "prime", "prime-square", "two-primes", "monocolor"],
    )
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--p1", type=int, default=None)
    p.add_argument("--p2", type=int, default=None)
    p.set_defaults(func=_cmd_families)

    p = sub.add_parser("complexity", help="degree growth of K on a pattern")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--prime-bits", type=int, default=20)
    p.add_argument("--half-steps", action="store_true")
    p.set_defaults(func=_cmd_complexity)

    p = sub.add_parser("verify", help="check computations against bundled reference data")
    p.add_argument(
        "--suite",
        default="all",
        choices=["tables", "q8", "q25", "monocolor", "families", "gauss", "invariant", "all"],
    )
    p.add_argument("--deep", action="store_true", help="extend table checks to q=20")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("census", help="prime pattern census: constructed/formula/enumerated")
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=_cmd_census)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except enumeration.BudgetExhausted:
        sys.stderr.write("error: node budget exhausted\n")
        return EXIT_BUDGET
    except (PatternError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
