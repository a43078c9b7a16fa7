"""The K-map: exact evaluation, invariants, degree growth, family data."""

from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest

from conftest import invert_cyclic_first_column
from cycstab.birational import (
    ColorPoint,
    NoCompositionMatches,
    PatternViolation,
    SingularMatrix,
    ZeroColorValue,
    apply_I,
    apply_J,
    apply_K,
    apply_K_inverse,
    degree_sequence,
    delta_invariant,
    family_map_data,
    fit_recurrence,
    known_complexity,
    proj_eq,
)
from cycstab.closed_forms import quadratic_residue_pattern, six_families
from cycstab.patterns import Pattern, parse_bracket


def _fams(q):
    return dict((s.family_id, subj) for s, subj in six_families(q))


def test_apply_J():
    full = parse_bracket("[a,b,c]")
    pt = ColorPoint.make(full, [2, 3, 5])
    assert apply_J(pt).values == (15, 10, 6)
    assert proj_eq(apply_J(apply_J(pt)), pt)
    ones = ColorPoint.make(full, [1, 1, 1])
    assert proj_eq(apply_J(ones), ones)
    two = ColorPoint.make(parse_bracket("[a,b]"), [2, 3])
    assert apply_J(two).values == (3, 2)
    with pytest.raises(ZeroColorValue):
        apply_J(ColorPoint.make(full, [1, 0, 2]))


def test_apply_I_examples():
    # the identity matrix point is self-inverse on the all-distinct pattern
    full = parse_bracket("[a,b,c,d]")
    idp = ColorPoint.make(full, [1, 0, 0, 0])
    assert proj_eq(apply_I(idp), idp)
    # q=4 monocolor: M^2 = 4 Id, so I fixes every point
    mono = parse_bracket("[a,-a,-a,-a]")
    for a in (1, 3, -2):
        pt = ColorPoint.make(mono, [a])
        assert proj_eq(apply_I(pt), pt)
    # q=3 standard Potts against the independent dense inversion oracle
    potts = parse_bracket("[a,b,b]")
    pt = ColorPoint.make(potts, [3, 1])
    got = apply_I(pt)
    oracle = invert_cyclic_first_column([Fraction(3), Fraction(1), Fraction(1)])
    assert got.values[0] / got.values[1] == oracle[0] / oracle[1]


def test_apply_I_errors():
    potts = parse_bracket("[a,b,b]")
    with pytest.raises(SingularMatrix):
        apply_I(ColorPoint.make(potts, [1, 1]))  # the all-ones matrix
    unstable = parse_bracket("[a,b,a,a]")
    violations = 0
    rng = random.Random(3)
    for _ in range(10):
        pt = ColorPoint.make(unstable, [rng.randint(1, 99), rng.randint(1, 99)])
        try:
            apply_I(pt)
        except PatternViolation:
            violations += 1
        except SingularMatrix:
            pass
    assert violations > 0  # instability witnessed


def test_apply_K_basics():
    mono = parse_bracket("[a,-a,-a,-a]")
    pt = ColorPoint.make(mono, [1])
    assert proj_eq(apply_K(pt), pt)
    # K^-1 K = id on the q=6 two-color family
    q1 = _fams(6)["Q1"]
    rng = random.Random(5)
    checked = 0
    while checked < 20:
        pt = ColorPoint.make(q1, [rng.randint(1, 60), rng.randint(1, 60)])
        try:
            assert proj_eq(apply_K_inverse(apply_K(pt)), pt)
        except (SingularMatrix, PatternViolation, ZeroColorValue):
            continue
        checked += 1


def test_apply_K_projective_invariance():
    qr = quadratic_residue_pattern(5).pattern
    rng = random.Random(9)
    checked = 0
    while checked < 20:
        vals = [Fraction(rng.randint(1, 40)) for _ in range(3)]
        c = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        try:
            a = apply_K(ColorPoint.make(qr, vals))
            b = apply_K(ColorPoint.make(qr, [v * c for v in vals]))
        except (SingularMatrix, PatternViolation, ZeroColorValue):
            continue
        assert proj_eq(a, b)
        checked += 1


def test_closure_on_stable_subjects_q8():
    from cycstab.enumeration import classify_all

    rng = random.Random(17)
    _, reps = classify_all(8)
    for rep in reps[::5]:  # a spread of stable subjects
        subj = rep.subject
        tried = 0
        while tried < 5:
            vals = [Fraction(rng.randint(1, 50)) for _ in range(subj.r)]
            try:
                apply_K(ColorPoint.make(subj, vals))
            except (SingularMatrix, ZeroColorValue):
                continue
            # PatternViolation would propagate and fail the test
            tried += 1


def test_delta_invariant_values():
    assert delta_invariant(3, 3, 5) == 0
    pt = ColorPoint.make(quadratic_residue_pattern(5).pattern, [1, 2, 3])
    before = delta_invariant(Fraction(2), Fraction(3), 5)
    img = apply_K(pt)
    after = delta_invariant(img.values[1] / img.values[0], img.values[2] / img.values[0], 5)
    assert before == after
    with pytest.raises(ZeroDivisionError):
        delta_invariant(1, -1, 5)  # u + v = 0 pole


def test_delta_invariance_random_q5_q13():
    for q in (5, 13):
        pat = quadratic_residue_pattern(q).pattern
        rng = random.Random(100 + q)
        checked = 0
        while checked < 10:
            vals = [Fraction(rng.randint(1, 60)) for _ in range(3)]
            try:
                pt = ColorPoint.make(pat, vals)
                u, v = vals[1] / vals[0], vals[2] / vals[0]
                before = delta_invariant(u, v, q)
                img = apply_K(pt)
                after = delta_invariant(
                    img.values[1] / img.values[0], img.values[2] / img.values[0], q
                )
            except (ZeroDivisionError, SingularMatrix, PatternViolation, ZeroColorValue):
                continue
            assert before == after
            checked += 1


def test_known_complexity():
    assert abs(known_complexity(5) - (7 + 45**0.5) / 2) < 1e-12
    assert known_complexity(4) == 1.0
    assert abs(known_complexity(7, symmetric=True) - (7 + 45**0.5) / 2) < 1e-12


def test_degree_sequence_linear_family():
    seq = fit_recurrence(degree_sequence(_fams(6)["P1"], 8, seed=3))
    assert seq.degrees == [1] * 9
    assert seq.delta == 1.0
    assert seq.genfun == ([1], [1, -1])  # 1/(1-x)


def test_degree_sequence_p2_q6():
    seq = fit_recurrence(degree_sequence(_fams(6)["P2"], 9, seed=3))
    assert seq.degrees[:5] == [1, 4, 10, 22, 46]
    assert seq.delta == 2.0
    assert seq.genfun[1] == [1, -3, 2]  # (1-x)(1-2x)


def test_degree_sequence_full_cyclic_q4_polynomial_growth():
    full4 = Pattern.make(4, [{k} for k in range(4)])
    seq = fit_recurrence(degree_sequence(full4, 10, seed=3))
    assert seq.delta is not None and seq.delta <= 1 + 1e-9


def test_degree_sequence_dual_primes_recorded():
    seq = degree_sequence(_fams(6)["Q1"], 6, seed=2)
    p1, p2 = seq.primes
    assert p1 != p2 and p1 % 6 == 1 and p2 % 6 == 1
    payload = json.loads(seq.to_json())
    assert payload["degrees"] == seq.degrees
    assert payload["primes"] == [p1, p2]


def test_fit_recurrence_needs_data():
    seq = degree_sequence(_fams(6)["P1"], 3, seed=3)
    with pytest.raises(ValueError):
        fit_recurrence(seq)


def test_half_step_degrees_interleave():
    qr7 = quadratic_residue_pattern(7).pattern
    seq = fit_recurrence(degree_sequence(qr7, 5, seed=3, half_steps=True))
    assert seq.degrees == [1, 2, 4, 7, 12, 20, 33, 54, 88, 143, 232]
    whole = degree_sequence(qr7, 5, seed=3)
    assert whole.degrees == [1, 4, 12, 33, 88, 232]  # every other entry


def test_family_map_data():
    for q in (6, 8):
        for fid in ("P1", "Q1", "P2", "Q2"):
            data = family_map_data(fid, q)
            assert data.composition_rule == "I o J"
    d = family_map_data("P1", 10)
    assert d.collineation == ((1, 1), (1, 1 - 10))
    with pytest.raises(Exception):
        family_map_data("P3", 8)  # no recorded data for P3/Q3


def test_family_inverse_maps_match_exact_inverse():
    rng = random.Random(7)
    for q in (6, 8):
        fams = _fams(q)
        for fid in ("P1", "Q1", "P2", "Q2"):
            data = family_map_data(fid, q)
            subj = fams[fid]
            checked = 0
            while checked < 5:
                vals = [Fraction(rng.randint(1, 30)) for _ in range(subj.r)]
                try:
                    exact = apply_I(ColorPoint.make(subj, vals)).values
                except (SingularMatrix, PatternViolation):
                    continue
                got = data.inverse_map(list(vals))
                ratio = None
                same = True
                for a, b in zip(exact, got):
                    if a == 0 and b == 0:
                        continue
                    if a == 0 or b == 0:
                        same = False
                        break
                    r2 = Fraction(a) / Fraction(b)
                    if ratio is None:
                        ratio = r2
                    elif r2 != ratio:
                        same = False
                        break
                assert same, (fid, q, vals)
                checked += 1
