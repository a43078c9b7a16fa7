"""Patterns and signed-patterns of cyclic q x q matrices, and their stability.

A pattern partitions Z_q (the first row of a cyclic matrix) into color
classes; a signed-pattern additionally splits each class into a plus and a
minus part.  Stability under matrix product and under matrix inversion is
decided exactly by grouping Fourier coordinates: the pattern's spanning
vectors are transformed with the unnormalized DFT and two coordinates are
equivalent when every spanning vector takes equal (product case) or
equal-up-to-one-global-sign (inverse case) values there.  The pattern is
stable precisely when the number of equivalence classes equals the number of
colors, and the classes themselves form the Fourier-dual pattern.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .cyclotomic import (
    CycEl,
    divisors,
    euler_phi,
    omega_int_table,
    units_mod,
)


class PatternError(ValueError):
    """Invalid pattern construction or classification precondition."""


class AllEqualPattern(PatternError):
    """The single-color pattern (all entries equal) is excluded from classification."""


class GenericallySingular(PatternError):
    """Every member matrix has an identically zero Fourier eigenvalue."""


class StabilityClass(Enum):
    PRODUCT_STABLE = "ProductStable"
    INVERSE_STABLE_ONLY = "InverseStableOnly"
    UNSTABLE = "Unstable"


# ---------------------------------------------------------------------------
# color names for the bracket notation


def color_name(i: int) -> str:
    if i < 26:
        return chr(ord("a") + i)
    i -= 26
    return chr(ord("a") + i // 26) + chr(ord("a") + i % 26)


# ---------------------------------------------------------------------------
# subjects


@dataclass(frozen=True)
class Pattern:
    """Partition of Z_q into color classes, classes ordered by minimal element."""

    q: int
    classes: tuple[frozenset[int], ...]

    @staticmethod
    def make(q: int, classes) -> "Pattern":
        cls = [frozenset(c) for c in classes]
        seen: set[int] = set()
        for c in cls:
            if not c:
                raise PatternError("empty class")
            if c & seen:
                raise PatternError("classes overlap")
            seen |= c
        if seen != set(range(q)):
            raise PatternError("classes must cover Z_q")
        cls.sort(key=min)
        return Pattern(q, tuple(cls))

    @property
    def r(self) -> int:
        return len(self.classes)

    def color_of(self, k: int) -> int:
        for i, c in enumerate(self.classes):
            if k in c:
                return i
        raise KeyError(k)

    def bracket(self) -> str:
        color = {}
        for i, c in enumerate(self.classes):
            for k in c:
                color[k] = i
        return "[" + ",".join(color_name(color[k]) for k in range(self.q)) + "]"

    def __str__(self) -> str:
        return self.bracket()


@dataclass(frozen=True)
class SignedPattern:
    """Partition of Z_q into classes split as (plus, minus) parts.

    Canonical form: within a class the part containing the smallest element
    is the plus part, and classes are ordered by the minimal element of their
    support.  A class may have an empty minus part.
    """

    q: int
    classes: tuple[tuple[frozenset[int], frozenset[int]], ...]

    @staticmethod
    def make(q: int, classes) -> "SignedPattern":
        norm = []
        seen: set[int] = set()
        for plus, minus in classes:
            p, m = frozenset(plus), frozenset(minus)
            if not (p | m):
                raise PatternError("empty class")
            if p & m:
                raise PatternError("plus and minus parts overlap")
            if (p | m) & seen:
                raise PatternError("classes overlap")
            seen |= p | m
            if not p or (m and min(m) < min(p)):
                p, m = m, p
            norm.append((p, m))
        if seen != set(range(q)):
            raise PatternError("classes must cover Z_q")
        norm.sort(key=lambda pm: min(pm[0] | pm[1]))
        return SignedPattern(q, tuple(norm))

    @property
    def r(self) -> int:
        return len(self.classes)

    @property
    def has_signs(self) -> bool:
        return any(m for _, m in self.classes)

    def supports(self) -> tuple[frozenset[int], ...]:
        return tuple(p | m for p, m in self.classes)

    def unsigned(self) -> Pattern:
        return Pattern.make(self.q, self.supports())

    def bracket(self) -> str:
        tok = {}
        for i, (p, m) in enumerate(self.classes):
            for k in p:
                tok[k] = color_name(i)
            for k in m:
                tok[k] = "-" + color_name(i)
        return "[" + ",".join(tok[k] for k in range(self.q)) + "]"

    def __str__(self) -> str:
        return self.bracket()


Subject = Pattern | SignedPattern


def parse_bracket(text: str) -> Subject:
    """Parse bracket notation; returns a Pattern unless a minus sign occurs."""
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise PatternError(f"not a bracket expression: {text!r}")
    tokens = [t.strip() for t in s[1:-1].split(",")]
    if tokens == [""]:
        raise PatternError("empty bracket")
    q = len(tokens)
    plus: dict[str, set[int]] = {}
    minus: dict[str, set[int]] = {}
    order: list[str] = []
    signed = False
    for k, t in enumerate(tokens):
        neg = t.startswith("-")
        if neg:
            t = t[1:]
            signed = True
        if not t.isalpha() or not t.islower():
            raise PatternError(f"bad color token {tokens[k]!r}")
        if t not in plus:
            plus[t] = set()
            minus[t] = set()
            order.append(t)
        (minus if neg else plus)[t].add(k)
    if signed:
        return SignedPattern.make(q, [(plus[t], minus[t]) for t in order])
    return Pattern.make(q, [plus[t] for t in order])


def multiply_pattern(a: int, subject: Subject) -> Subject:
    """Map every class E to aE (units only); signs follow their elements."""
    q = subject.q
    if gcd(a, q) != 1:
        raise PatternError(f"{a} is not a unit modulo {q}")
    if isinstance(subject, Pattern):
        return Pattern.make(q, [{(a * k) % q for k in c} for c in subject.classes])
    return SignedPattern.make(
        q,
        [
            ({(a * k) % q for k in p}, {(a * k) % q for k in m})
            for p, m in subject.classes
        ],
    )


# ---------------------------------------------------------------------------
# fast exact Fourier data (integer coordinate tuples, cached per subset)


@lru_cache(maxsize=None)
def _zero_coord(q: int) -> tuple[int, ...]:
    return (0,) * euler_phi(q)


_subset_hat_cache: dict[tuple[int, int], tuple[tuple[int, ...], ...]] = {}


def subset_hat(q: int, mask: int) -> tuple[tuple[int, ...], ...]:
    """DFT of the 0/1 indicator of the subset encoded by mask, as coordinate tuples."""
    key = (q, mask)
    cached = _subset_hat_cache.get(key)
    if cached is not None:
        return cached
    rows = omega_int_table(q)
    phi = euler_phi(q)
    elems = [k for k in range(q) if mask >> k & 1]
    out = []
    for m in range(q):
        acc = [0] * phi
        for e in elems:
            row = rows[(e * m) % q]
            for t in range(phi):
                acc[t] += row[t]
        out.append(tuple(acc))
    result = tuple(out)
    _subset_hat_cache[key] = result
    return result


def mask_of(items) -> int:
    m = 0
    for k in items:
        m |= 1 << k
    return m


def _tuple_neg(t: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-x for x in t)


def _sign_normalize(t: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    """Canonical representative of {t, -t}: first nonzero coordinate positive."""
    for x in t:
        if x > 0:
            return t, 1
        if x < 0:
            return _tuple_neg(t), -1
    return t, 1


def spanning_hat_vectors(subject: Subject) -> list[tuple[tuple[int, ...], ...]]:
    """DFT of each class's spanning vector: chi(E) or chi(E+) - chi(E-)."""
    q = subject.q
    if isinstance(subject, Pattern):
        return [subset_hat(q, mask_of(c)) for c in subject.classes]
    out = []
    for p, m in subject.classes:
        hp = subset_hat(q, mask_of(p))
        hm = subset_hat(q, mask_of(m))
        out.append(
            tuple(tuple(a - b for a, b in zip(hp[k], hm[k])) for k in range(q))
        )
    return out


# ---------------------------------------------------------------------------
# Fourier coordinate grouping


@dataclass(frozen=True)
class FourierClasses:
    """Maximal grouping of Fourier indices by the subject's spanning vectors.

    For the unsigned grouping each class is a frozenset; for the signed
    grouping each class is a (plus, minus) pair relative to the class
    representative.  zero[i] is True when every spanning vector vanishes on
    class i.
    """

    q: int
    signed: bool
    classes: tuple
    zero: tuple[bool, ...]


def _group_unsigned(q, hats):
    groups: dict[tuple, list[int]] = {}
    for m in range(q):
        profile = tuple(h[m] for h in hats)
        groups.setdefault(profile, []).append(m)
    ordered = sorted(groups.items(), key=lambda kv: kv[1][0])
    zero_profile = tuple(_zero_coord(q) for _ in hats)
    classes = tuple(frozenset(idx) for _, idx in ordered)
    zero = tuple(profile == zero_profile for profile, _ in ordered)
    return classes, zero


def _group_signed(q, hats):
    groups: dict[tuple, dict[int, int]] = {}
    for m in range(q):
        profile = tuple(h[m] for h in hats)
        flat = tuple(x for part in profile for x in part)
        norm, sign = _sign_normalize(flat)
        groups.setdefault(norm, {})[m] = sign
    ordered = sorted(groups.items(), key=lambda kv: min(kv[1]))
    zero_flat = tuple(x for _ in hats for x in _zero_coord(q))
    classes = []
    zero = []
    for norm, signs in ordered:
        rep_sign = signs[min(signs)]
        plus = frozenset(m for m, s in signs.items() if s == rep_sign)
        minus = frozenset(m for m, s in signs.items() if s != rep_sign)
        classes.append((plus, minus))
        zero.append(norm == zero_flat)
    return tuple(classes), tuple(zero)


def fourier_class_partition(subject: Subject) -> FourierClasses:
    """Group Fourier indices by equality (Pattern) or equality up to one sign
    (SignedPattern) of all spanning vectors, with per-class vanishing flags."""
    hats = spanning_hat_vectors(subject)
    if isinstance(subject, Pattern):
        classes, zero = _group_unsigned(subject.q, hats)
        return FourierClasses(subject.q, False, classes, zero)
    classes, zero = _group_signed(subject.q, hats)
    return FourierClasses(subject.q, True, classes, zero)


# ---------------------------------------------------------------------------
# stability classification


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the stability test for one subject.

    dual is the Fourier-side pattern: unsigned for a product-stable subject,
    signed for an inverse-stable-only subject, absent when unstable.  witness
    holds two Fourier indices from distinct equivalence classes in excess of
    the color count when the subject is unstable.
    """

    subject: Subject
    klass: StabilityClass
    dual: Subject | None
    witness: tuple[int, int] | None
    unsigned_classes: int
    signed_classes: int

    @property
    def stable(self) -> bool:
        return self.klass is not StabilityClass.UNSTABLE


def classify(subject: Subject) -> StabilityReport:
    """Full stability classification via Fourier coordinate grouping."""
    q, r = subject.q, subject.r
    if isinstance(subject, Pattern) and r == 1:
        raise AllEqualPattern("the all-equal pattern is excluded")
    hats = spanning_hat_vectors(subject)
    zero = _zero_coord(q)
    for m in range(q):
        if all(h[m] == zero for h in hats):
            raise GenericallySingular(
                f"every member matrix has Fourier eigenvalue 0 at index {m}"
            )
    u_classes, _ = _group_unsigned(q, hats)
    s_classes, _ = _group_signed(q, hats)
    su, ss = len(u_classes), len(s_classes)
    if su == r:
        dual: Subject | None = Pattern.make(q, u_classes)
        klass = StabilityClass.PRODUCT_STABLE
        witness = None
    elif ss == r:
        dual = SignedPattern.make(q, s_classes)
        klass = StabilityClass.INVERSE_STABLE_ONLY
        witness = None
    else:
        dual = None
        klass = StabilityClass.UNSTABLE
        reps = sorted(min(p | m) for p, m in s_classes)
        witness = (reps[r - 1], reps[r]) if len(reps) > r else (reps[0], reps[-1])
    return StabilityReport(subject, klass, dual, witness, su, ss)


def _report_for(subject: Subject) -> StabilityReport:
    return classify(subject)


def is_product_stable(p: Pattern) -> StabilityReport:
    """Product stability of a pattern: exactly r Fourier equality classes."""
    if not isinstance(p, Pattern):
        raise PatternError("expected an unsigned Pattern")
    return _report_for(p)


def is_inverse_stable(p: Pattern) -> StabilityReport:
    """Inverse stability of a pattern: exactly r signed Fourier classes."""
    if not isinstance(p, Pattern):
        raise PatternError("expected an unsigned Pattern")
    return _report_for(p)


def is_product_stable_signed(s: SignedPattern) -> StabilityReport:
    if not isinstance(s, SignedPattern):
        raise PatternError("expected a SignedPattern")
    return _report_for(s)


def is_inverse_stable_signed(s: SignedPattern) -> StabilityReport:
    if not isinstance(s, SignedPattern):
        raise PatternError("expected a SignedPattern")
    return _report_for(s)


def signed_dual(subject: Subject) -> SignedPattern:
    """The inverse-side dual (always defined for stable subjects)."""
    hats = spanning_hat_vectors(subject)
    s_classes, _ = _group_signed(subject.q, hats)
    return SignedPattern.make(subject.q, s_classes)


# ---------------------------------------------------------------------------
# subgroups of unit groups and admissible sets


@lru_cache(maxsize=None)
def subgroups_of_units(n: int) -> tuple[frozenset[int], ...]:
    """All subgroups of Z_n^*, by closure-driven lattice enumeration."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return (frozenset({0}),)
    units = units_mod(n)

    def closure(gens: frozenset[int]) -> frozenset[int]:
        out = {1}
        frontier = set(gens) | {1}
        while frontier:
            g = frontier.pop()
            for h in list(out):
                prod = (g * h) % n
                if prod not in out:
                    out.add(prod)
                    frontier.add(prod)
            out.add(g)
        return frozenset(out)

    found = {frozenset({1})}
    frontier = [frozenset({1})]
    while frontier:
        h = frontier.pop()
        for g in units:
            if g not in h:
                bigger = closure(h | {g})
                if bigger not in found:
                    found.add(bigger)
                    frontier.append(bigger)
    return tuple(sorted(found, key=lambda s: (len(s), sorted(s))))


@lru_cache(maxsize=None)
def stratum_components(q: int) -> dict[int, tuple[frozenset[int], ...]]:
    """For each divisor d of q, the candidate class pieces inside
    Z(q, d) = {k : gcd(k, q) = d}: the sets d * (coset of a subgroup of Z_{q/d}^*)."""
    out: dict[int, tuple[frozenset[int], ...]] = {}
    for d in divisors(q):
        n = q // d
        if n == 1:
            out[d] = (frozenset({0}),)
            continue
        comps: set[frozenset[int]] = set()
        for h in subgroups_of_units(n):
            for i in units_mod(n):
                comps.add(frozenset((d * ((i * g) % n)) % q for g in h))
        out[d] = tuple(sorted(comps, key=lambda s: (min(s), len(s), sorted(s))))
    return out


def is_admissible(q: int, e) -> bool:
    """Membership test against the divisor-stratified coset structure."""
    elems = set(e)
    if not elems:
        return False
    comps = stratum_components(q)
    for d in divisors(q):
        part = frozenset(k for k in elems if gcd(k, q) == d)
        if part and part not in comps[d]:
            return False
    return True


def admissible_sets(q: int) -> list[frozenset[int]]:
    """Every nonempty disjoint union of at most one component per divisor stratum."""
    comps = stratum_components(q)
    sets: list[frozenset[int]] = [frozenset()]
    for d in divisors(q):
        sets = [s | c for s in sets for c in (frozenset(),) + comps[d]]
    out = [s for s in sets if s]
    out.sort(key=lambda s: (min(s), len(s), sorted(s)))
    return out


# ---------------------------------------------------------------------------
# convenient collections


def _meet_classes(q: int, hats) -> list[list[int]]:
    groups: dict[tuple, list[int]] = {}
    for m in range(q):
        groups.setdefault(tuple(h[m] for h in hats), []).append(m)
    return sorted(groups.values(), key=lambda idx: idx[0])


def is_convenient(q: int, sets) -> bool:
    """Decide whether a family of disjoint subsets of Z_q can begin a stable
    pattern: every convolution monomial of the indicators must be constant on
    each of the subsets.

    Decided without any degree bound: for each class A of the intersection of
    the value partitions of the transformed indicators, the vector
    i -> sum_{m in A} w^(-im) must be constant on every input subset.
    """
    fam = [frozenset(s) for s in sets]
    seen: set[int] = set()
    for s in fam:
        if s & seen:
            raise PatternError("input sets overlap")
        seen |= s
    if not fam:
        return True
    hats = [subset_hat(q, mask_of(s)) for s in fam]
    for a_class in _meet_classes(q, hats):
        ha = subset_hat(q, mask_of(a_class))
        for s in fam:
            it = iter(s)
            ref = ha[(-next(it)) % q]
            if any(ha[(-i) % q] != ref for i in it):
                return False
    return True


def is_convenient_by_powers(q: int, e) -> bool:
    """Cross-validating oracle for a single set: direct convolution powers.

    Checks chi(E)^(conv n) for 0 <= n <= q-1 (the Cayley-Hamilton bound) for
    constancy on E.
    """
    elems = sorted(set(e))
    vec = [0] * q
    vec[0] = 1  # n = 0 convention: the convolution identity
    for n in range(q):
        ref = vec[elems[0]]
        if any(vec[i] != ref for i in elems[1:]):
            return False
        nxt = [0] * q
        for i, vi in enumerate(vec):
            if vi:
                for j in elems:
                    nxt[(i + j) % q] += vi
        vec = nxt
    return True
