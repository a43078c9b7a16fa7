"""Shared definition-level oracles, independent of the Fourier classifier.

Product stability is checked by exact convolution-closure of the spanning
vectors plus existence of an invertible member; inverse stability by exact
rational inversion of random members and span membership of the result.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from cycstab.cyclotomic import convolution
from cycstab.patterns import Pattern, SignedPattern


def spanning_direct(subject):
    q = subject.q
    vecs = []
    if isinstance(subject, Pattern):
        for c in subject.classes:
            vecs.append([1 if k in c else 0 for k in range(q)])
    else:
        for p, m in subject.classes:
            vecs.append([1 if k in p else (-1 if k in m else 0) for k in range(q)])
    return vecs


def in_span(vecs, target) -> bool:
    rows = [
        [Fraction(v[j]) for v in vecs] + [Fraction(target[j])]
        for j in range(len(target))
    ]
    n, m = len(rows), len(vecs)
    piv = 0
    for col in range(m):
        sel = next((r for r in range(piv, n) if rows[r][col] != 0), None)
        if sel is None:
            continue
        rows[piv], rows[sel] = rows[sel], rows[piv]
        pivot = rows[piv][col]
        for r in range(n):
            if r != piv and rows[r][col] != 0:
                f = rows[r][col] / pivot
                for c2 in range(col, m + 1):
                    rows[r][c2] -= f * rows[piv][c2]
        piv += 1
    return all(rows[r][m] == 0 for r in range(piv, n))


def invert_cyclic_first_column(v):
    """Exact inverse of Cy(v), first column; None when singular."""
    q = len(v)
    m = [
        [Fraction(v[(i - j) % q]) for j in range(q)] + [Fraction(1 if i == 0 else 0)]
        for i in range(q)
    ]
    for col in range(q):
        sel = next((r for r in range(col, q) if m[r][col] != 0), None)
        if sel is None:
            return None
        m[col], m[sel] = m[sel], m[col]
        piv = m[col][col]
        for r in range(q):
            if r != col and m[r][col] != 0:
                f = m[r][col] / piv
                for c in range(col, q + 1):
                    m[r][c] -= f * m[col][c]
    return [m[i][q] / m[i][i] for i in range(q)]


def oracle_product_stable(subject) -> bool:
    """Convolution closure of the span plus an invertible member."""
    vecs = spanning_direct(subject)
    for i in range(len(vecs)):
        for j in range(i, len(vecs)):
            if not in_span(vecs, convolution(vecs[i], vecs[j])):
                return False
    primes = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)
    vals = [Fraction(p) for p in primes[: len(vecs)]]
    member = [
        sum(vals[i] * vecs[i][k] for i in range(len(vecs))) for k in range(subject.q)
    ]
    return invert_cyclic_first_column(member) is not None


def oracle_inverse_stable(subject, trials: int = 3, seed: int = 11) -> bool:
    """Exact inversion of random members must stay inside the span."""
    rng = random.Random(seed)
    vecs = spanning_direct(subject)
    any_invertible = False
    for _ in range(trials):
        vals = [Fraction(rng.randint(2, 10**6)) for _ in vecs]
        member = [
            sum(vals[i] * vecs[i][k] for i in range(len(vecs)))
            for k in range(subject.q)
        ]
        inv = invert_cyclic_first_column(member)
        if inv is None:
            continue
        any_invertible = True
        if not in_span(vecs, inv):
            return False
    return any_invertible


def all_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in all_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def signed_variants(part):
    """All per-class (plus, minus) splits, the class minimum kept positive."""
    per_class = []
    for cls in part:
        cls = sorted(cls)
        head, tail = cls[0], cls[1:]
        opts = []
        for bits in itertools.product((0, 1), repeat=len(tail)):
            plus = {head} | {t for t, b in zip(tail, bits) if not b}
            minus = {t for t, b in zip(tail, bits) if b}
            opts.append((frozenset(plus), frozenset(minus)))
        per_class.append(opts)
    for combo in itertools.product(*per_class):
        yield list(combo)


def all_subjects(q: int):
    """Every pattern and properly signed signed-pattern on Z_q."""
    for part in all_partitions(range(q)):
        for combo in signed_variants(part):
            if any(m for _, m in combo):
                yield SignedPattern.make(q, combo)
            else:
                yield Pattern.make(q, [p for p, _ in combo])
