"""Pattern model, bracket grammar, admissible/convenient sets, classifiers."""

from __future__ import annotations

import random
from math import gcd

import pytest

from conftest import all_subjects, oracle_inverse_stable, oracle_product_stable
from cycstab.patterns import (
    AllEqualPattern,
    GenericallySingular,
    Pattern,
    PatternError,
    SignedPattern,
    StabilityClass,
    admissible_sets,
    classify,
    fourier_class_partition,
    is_admissible,
    is_convenient,
    is_convenient_by_powers,
    is_inverse_stable,
    is_product_stable,
    is_product_stable_signed,
    multiply_pattern,
    parse_bracket,
    subgroups_of_units,
)


# ---------------------------------------------------------------------------
# brackets and canonical forms


def test_bracket_roundtrip():
    for text in (
        "[a,b,c,b,d,b,e,b]",
        "[a,b,-b,b,-b,b,-b,b]",
        "[a,-a,-a,-a]",
        "[a,b,c,d,a,-d,c,-b]",
    ):
        assert parse_bracket(text).bracket() == text


def test_bracket_canonicalizes_foreign_lettering():
    # same partition, different letters and swapped signs
    assert parse_bracket("[z,x,x,x]").bracket() == "[a,b,b,b]"
    assert parse_bracket("[a,-c,c,-c]").bracket() == "[a,b,-b,b]"
    sp = parse_bracket("[-b,a,b,a]")  # minus on the first occurrence flips the class
    assert sp.bracket() == "[a,b,-a,b]"


def test_pattern_validation():
    with pytest.raises(PatternError):
        Pattern.make(4, [{0, 1}, {1, 2, 3}])
    with pytest.raises(PatternError):
        Pattern.make(4, [{0, 1}])
    with pytest.raises(PatternError):
        SignedPattern.make(4, [({0}, {0}), ({1, 2, 3}, set())])


def test_multiply_pattern():
    p9 = parse_bracket("[a,b,c,d,e,b,f,d]")
    assert multiply_pattern(1, p9) == p9
    assert multiply_pattern(3, p9).bracket() == p9.bracket()
    # negation fixes every stable subject
    for text in ("[a,b,c,b,d,b,e,b]", "[a,b,-b,b,-b,b,-b,b]", "[a,a,a,a,b,a,a,a]"):
        subj = parse_bracket(text)
        assert multiply_pattern(subj.q - 1, subj).bracket() == text
    with pytest.raises(PatternError):
        multiply_pattern(2, p9)


# ---------------------------------------------------------------------------
# subgroups and admissible sets


def test_subgroups_of_units_counts():
    assert len(subgroups_of_units(2)) == 1
    assert len(subgroups_of_units(25)) == 6
    # Z_8^* is the Klein four-group: 1 + 3 + 1 subgroups
    subs8 = subgroups_of_units(8)
    assert len(subs8) == 5
    assert frozenset({1}) in subs8 and frozenset({1, 3, 5, 7}) in subs8


def test_subgroups_of_25_match_known_chain():
    subs = {frozenset(s) for s in subgroups_of_units(25)}
    assert frozenset({1, 6, 11, 16, 21}) in subs
    assert frozenset({1, 7, 18, 24}) in subs
    assert frozenset({1, 24}) in subs


def _admissible_oracle(q: int, e: frozenset[int]) -> bool:
    """Definition check: per divisor stratum, a coset of a unit subgroup."""
    if not e:
        return False
    for d in sorted({gcd(k, q) for k in e}):
        part = sorted(k // d for k in e if gcd(k, q) == d)
        n = q // d
        if n == 1:
            continue
        if any(gcd(x, n) != 1 for x in part):
            return False
        inv = pow(part[0], -1, n)
        h = {(inv * x) % n for x in part}
        if 1 not in h or any((a * b) % n not in h for a in h for b in h):
            return False
    return True


def test_admissible_sets_q4_brute_force():
    listed = set(admissible_sets(4))
    brute = {
        frozenset(s)
        for s in (
            {k for k in range(4) if mask >> k & 1} for mask in range(1, 16)
        )
        if _admissible_oracle(4, frozenset(s))
    }
    assert listed == brute
    assert len(listed) == 15


def test_admissible_examples():
    assert is_admissible(8, {0, 4})
    for q in (3, 5, 8, 12):
        assert is_admissible(q, {0})
    assert not is_admissible(8, {1, 3, 5})  # not a coset of a unit subgroup

    # cross-check membership against the generated list for q = 8
    listed = set(admissible_sets(8))
    for mask in range(1, 1 << 8):
        s = frozenset(k for k in range(8) if mask >> k & 1)
        assert (s in listed) == _admissible_oracle(8, s)


# ---------------------------------------------------------------------------
# convenient sets


def test_convenient_matches_power_oracle_on_single_sets():
    for q in (4, 5, 6, 8):
        for mask in range(1, 1 << q):
            e = frozenset(k for k in range(q) if mask >> k & 1)
            assert is_convenient(q, [e]) == is_convenient_by_powers(q, e), (q, sorted(e))


def test_convenient_examples():
    assert is_convenient(4, [{0}])
    # singleton constancy is vacuous: {1} alone is convenient (the power
    # oracle agrees; it is a class of the all-distinct stable pattern)
    assert is_convenient(8, [{1}])
    assert is_convenient_by_powers(8, {1})
    # a set containing 0 properly can never begin a stable pattern
    assert not is_convenient(8, [{0, 1}])
    with pytest.raises(PatternError):
        is_convenient(8, [{1, 2}, {2, 3}])


def test_stable_pattern_classes_are_convenient():
    # every class of every product-stable q=8 pattern is convenient
    for text in ("[a,b,c,d,e,b,f,d]", "[a,b,c,b,d,b,c,b]", "[a,b,b,b,b,b,b,b]",
                 "[a,b,c,d,e,d,c,b]", "[a,b,c,d,e,f,g,h]", "[a,b,c,b,d,e,c,e]",
                 "[a,b,c,b,d,b,e,b]", "[a,b,c,d,e,b,c,d]", "[a,b,c,b,c,b,c,b]",
                 "[a,b,b,b,c,b,b,b]"):
        subj = parse_bracket(text)
        for cls in subj.classes:
            assert is_convenient(subj.q, [cls]), (text, sorted(cls))
        assert is_convenient(subj.q, subj.classes)


def test_inverse_only_class_need_not_be_convenient():
    # the big class of [a,a,a,a,b,a,a,a] is not convenient although the
    # pattern is inverse-stable: convenience filtering applies to product
    # searches only
    assert not is_convenient(8, [frozenset(range(8)) - {4}])
    assert classify(parse_bracket("[a,a,a,a,b,a,a,a]")).stable


# ---------------------------------------------------------------------------
# classifiers


def test_classifier_appendix_pairs():
    cases = [
        ("[a,b,c,b,d,b,e,b]", StabilityClass.PRODUCT_STABLE, "[a,b,c,d,e,b,c,d]"),
        ("[a,b,c,d,e,f,g,h]", StabilityClass.PRODUCT_STABLE, "[a,b,c,d,e,f,g,h]"),
        ("[a,a,a,a,b,a,a,a]", StabilityClass.INVERSE_STABLE_ONLY, "[a,b,-b,b,-b,b,-b,b]"),
        ("[a,b,-b,b,-b,b,-b,b]", StabilityClass.PRODUCT_STABLE, "[a,a,a,a,b,a,a,a]"),
        ("[a,b,c,-b,a,-b,c,b]", StabilityClass.INVERSE_STABLE_ONLY, "[a,b,c,-b,a,-b,c,b]"),
        ("[a,b,c,d,a,-d,c,-b]", StabilityClass.INVERSE_STABLE_ONLY, "[a,b,c,b,a,-b,d,-b]"),
    ]
    for text, klass, dual in cases:
        rep = classify(parse_bracket(text))
        assert rep.klass is klass, text
        assert rep.dual.bracket() == dual, text


def test_classifier_examples_beyond_q8():
    assert is_inverse_stable(parse_bracket("[a,a,a,b,a,a]")).stable
    rep = is_inverse_stable(parse_bracket("[a,b,b,b,b,b,b,b]"))
    assert rep.klass is StabilityClass.PRODUCT_STABLE  # product implies inverse
    mono = parse_bracket("[a,-a,-a,-a]")
    assert classify(mono).klass is StabilityClass.INVERSE_STABLE_ONLY


def test_classifier_errors():
    with pytest.raises(AllEqualPattern):
        is_product_stable(Pattern.make(3, [{0, 1, 2}]))
    with pytest.raises(GenericallySingular):
        classify(parse_bracket("[a,b,a,b]"))
    with pytest.raises(PatternError):
        is_product_stable(parse_bracket("[a,-a,-a,-a]"))
    with pytest.raises(PatternError):
        is_product_stable_signed(parse_bracket("[a,b,b,b]"))


def test_unstable_report_has_witness():
    rep = classify(parse_bracket("[b,a,b,b]"))  # shifted Potts: not stable
    assert rep.klass is StabilityClass.UNSTABLE
    assert rep.dual is None
    k, el = rep.witness
    assert 0 <= k < 4 and 0 <= el < 4 and k != el


def test_classifier_against_definition_oracles_q5():
    count = 0
    for subj in all_subjects(5):
        try:
            rep = classify(subj)
            fast = (rep.klass is StabilityClass.PRODUCT_STABLE, rep.stable)
        except AllEqualPattern:
            continue
        except GenericallySingular:
            fast = (False, False)
        assert fast == (oracle_product_stable(subj), oracle_inverse_stable(subj)), subj.bracket()
        count += 1
    assert count == 256


def test_fourier_class_partition_shapes():
    # [a,b,b,b,b,b,b,b] groups Fourier indices as {0} and the rest
    fc = fourier_class_partition(parse_bracket("[a,b,b,b,b,b,b,b]"))
    assert set(fc.classes) == {frozenset({0}), frozenset(range(1, 8))}
    assert not any(fc.zero)
    # all-distinct pattern separates every index
    fc = fourier_class_partition(parse_bracket("[a,b,c,d,e]"))
    assert all(len(c) == 1 for c in fc.classes)
    # signed subject 7 groups into the support partition of its dual 36
    fc = fourier_class_partition(parse_bracket("[a,b,c,d,a,-d,c,-b]"))
    supports = {p | m for p, m in fc.classes}
    assert supports == {
        frozenset({0, 4}),
        frozenset({1, 3, 5, 7}),
        frozenset({2}),
        frozenset({6}),
    }


def test_product_stable_patterns_have_singleton_zero_class():
    # holds for product-stable subjects; inverse-only pattern 17 violates it
    for subj in all_subjects(6):
        try:
            rep = classify(subj)
        except (AllEqualPattern, GenericallySingular):
            continue
        if rep.klass is StabilityClass.PRODUCT_STABLE and isinstance(subj, Pattern):
            assert frozenset({0}) in subj.classes
    p17 = parse_bracket("[a,b,a,b,c,b,a,b]")
    assert classify(p17).stable
    assert frozenset({0}) not in p17.classes
