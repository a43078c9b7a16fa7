"""The birational map K = I o J on pattern-restricted color spaces.

J is the entrywise (Hadamard) inverse and I the matrix inverse; on the color
space of a stable pattern both act projectively.  Exact evaluation goes
through rational linear algebra on the full q x q cyclic matrix, so a
PatternViolation doubles as an instability witness independent of the Fourier
classifier.

Degree growth is measured semi-numerically: K is iterated on a random line
A + t*B with coordinates kept as univariate polynomials over a prime field
F_p with p = 1 (mod q), dividing out the common polynomial gcd after each
step and recording the maximal coordinate degree.  Runs are repeated modulo a
second prime and must agree.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable

import numpy as np

from .patterns import Pattern, PatternError, SignedPattern, Subject


class SingularMatrix(ValueError):
    """The evaluated pattern member is not invertible."""


class PatternViolation(ValueError):
    """The inverse does not respect the subject's (signed) pattern."""


class ZeroColorValue(ValueError):
    """J is undefined when a color value vanishes."""


class UnluckyPrime(RuntimeError):
    """Degree sequences computed modulo two primes disagreed."""


class SingularLine(RuntimeError):
    """The random line hit the indeterminacy locus of the iteration."""


class NoCompositionMatches(RuntimeError):
    """No candidate composition of the recorded family data reproduces K."""


# ---------------------------------------------------------------------------
# color points


def _signed_vector(subject: Subject) -> list[int]:
    """Entry k is +-(1 + color index) by class membership, sign from the part."""
    out = [0] * subject.q
    if isinstance(subject, Pattern):
        for i, c in enumerate(subject.classes):
            for k in c:
                out[k] = i + 1
    else:
        for i, (p, m) in enumerate(subject.classes):
            for k in p:
                out[k] = i + 1
            for k in m:
                out[k] = -(i + 1)
    return out


@dataclass(frozen=True)
class ColorPoint:
    """Projective point with one exact rational coordinate per color."""

    subject: Subject
    values: tuple[Fraction, ...]

    @staticmethod
    def make(subject: Subject, values) -> "ColorPoint":
        vals = tuple(Fraction(v) for v in values)
        if len(vals) != subject.r:
            raise ValueError(f"expected {subject.r} color values, got {len(vals)}")
        if all(v == 0 for v in vals):
            raise ValueError("projective point cannot be all zero")
        return ColorPoint(subject, vals)

    def normalized(self) -> "ColorPoint":
        """Scale to coprime integers with the first nonzero value positive."""
        from math import lcm

        den = 1
        for v in self.values:
            den = lcm(den, v.denominator)
        ints = [int(v * den) for v in self.values]
        g = 0
        for x in ints:
            g = gcd(g, abs(x))
        ints = [x // g for x in ints]
        lead = next(x for x in ints if x)
        if lead < 0:
            ints = [-x for x in ints]
        return ColorPoint(self.subject, tuple(Fraction(x) for x in ints))

    def row_vector(self) -> list[Fraction]:
        """The first row of the cyclic matrix this point represents."""
        sv = _signed_vector(self.subject)
        return [
            Fraction(0) if s == 0 else (self.values[abs(s) - 1] if s > 0 else -self.values[abs(s) - 1])
            for s in sv
        ]


def proj_eq(a: ColorPoint, b: ColorPoint) -> bool:
    if a.subject != b.subject:
        return False
    return a.normalized().values == b.normalized().values


def apply_J(p: ColorPoint) -> ColorPoint:
    """Hadamard inverse on colors: x_i -> 1/x_i, projectively."""
    if any(v == 0 for v in p.values):
        raise ZeroColorValue("J undefined: zero color value")
    return ColorPoint.make(p.subject, [1 / v for v in p.values]).normalized()


def _solve_cyclic_first_column(v: list[Fraction]) -> list[Fraction] | None:
    """Solve Cy(v) w = e_0 by exact Gaussian elimination; None when singular."""
    q = len(v)
    m = [[v[(i - j) % q] for j in range(q)] + [Fraction(1 if i == 0 else 0)] for i in range(q)]
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


def apply_I(p: ColorPoint) -> ColorPoint:
    """Matrix inverse read back off the color space.

    The defining vector of Cy(v)^-1 must take one value per class (with the
    class sign for signed subjects); otherwise PatternViolation is raised,
    which doubles as an instability witness for the subject.
    """
    v = p.row_vector()
    w = _solve_cyclic_first_column(v)
    if w is None:
        raise SingularMatrix("pattern member is singular")
    sv = _signed_vector(p.subject)
    out: list[Fraction | None] = [None] * p.subject.r
    for k in range(p.subject.q):
        s = sv[k]
        if s == 0:
            if w[k] != 0:
                raise PatternViolation(f"inverse nonzero outside the pattern at {k}")
            continue
        val = w[k] if s > 0 else -w[k]
        i = abs(s) - 1
        if out[i] is None:
            out[i] = val
        elif out[i] != val:
            raise PatternViolation(f"inverse breaks class {i} at index {k}")
    return ColorPoint.make(p.subject, out).normalized()


def apply_K(p: ColorPoint) -> ColorPoint:
    """K = I o J."""
    return apply_I(apply_J(p))


def apply_K_inverse(p: ColorPoint) -> ColorPoint:
    """K^-1 = J o I."""
    return apply_J(apply_I(p))


# ---------------------------------------------------------------------------
# the quadratic-residue invariant


def delta_invariant(u, v, q: int) -> Fraction:
    """The K-invariant of the quadratic-residue family in the inhomogeneous
    chart (u, v) = (y/x, z/x)."""
    u, v = Fraction(u), Fraction(v)
    d1 = (2 * u * v - u - v) * (u + v - 2)
    d2 = u + v
    if d1 == 0 or d2 == 0:
        raise ZeroDivisionError("pole of the invariant")
    return (u - v) ** 2 / d1 * (q + 2 * (u * v - u - v + 1) / d2)


def known_complexity(q: int, symmetric: bool = False) -> float:
    """Largest root of x^2 + (2 - (m-2)^2) x + 1 with m = q, or m - 1 = floor(q/2)
    for the symmetric variant."""
    if q < 3:
        raise ValueError("q must be >= 3")
    if symmetric:
        p = q // 2 + 1
        a = (p - 1) ** 2 - 2
    else:
        a = (q - 2) ** 2 - 2
    disc = a * a - 4
    if disc < 0:
        raise ValueError("complex roots")
    return (a + disc**0.5) / 2


# ---------------------------------------------------------------------------
# modular polynomial arithmetic (dense numpy arrays, lowest degree first)


def _trim(a: np.ndarray) -> np.ndarray:
    nz = np.nonzero(a)[0]
    if len(nz) == 0:
        return a[:0]
    return a[: nz[-1] + 1]


def _pmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        return a[:0]
    return np.convolve(a, b) % p


def _pmod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    b = _trim(b)
    if len(b) == 0:
        raise ZeroDivisionError
    a = _trim(a).copy()
    db = len(b) - 1
    if db == 0:
        return a[:0]
    inv_lead = pow(int(b[-1]), -1, p)
    da = len(a) - 1
    for shift in range(da - db, -1, -1):
        factor = (int(a[shift + db]) * inv_lead) % p
        if factor:
            seg = a[shift : shift + db]
            seg -= (factor * b[:db]) % p
            seg %= p
    d = min(da, db - 1)
    while d >= 0 and a[d] == 0:
        d -= 1
    return a[: d + 1]


def _pgcd(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    a, b = _trim(a).copy(), _trim(b).copy()
    if len(a) < len(b):
        a, b = b, a
    while len(b):
        a, b = b, _pmod(a, b, p)
    if len(a):
        a = (a * pow(int(a[-1]), -1, p)) % p
    return a


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for sp in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _find_primes(q: int, bits: int, count: int) -> list[int]:
    """Primes p = 1 (mod q) just below 2^bits."""
    out = []
    m = (1 << bits) // q
    while len(out) < count and m > 1:
        p = m * q + 1
        if _is_probable_prime(p):
            out.append(p)
        m -= 1
    if len(out) < count:
        raise ValueError(f"not enough primes = 1 mod {q} below 2^{bits}")
    return out


def _primitive_qth_root(p: int, q: int) -> int:
    prime_factors = set()
    m = q
    d = 2
    while d * d <= m:
        if m % d == 0:
            prime_factors.add(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        prime_factors.add(m)
    rng = random.Random(0xC0FFEE ^ p)
    while True:
        x = rng.randrange(2, p - 1)
        z = pow(x, (p - 1) // q, p)
        if z != 1 and all(pow(z, q // f, p) != 1 for f in prime_factors):
            return z


# ---------------------------------------------------------------------------
# degree sequences


@dataclass
class DegreeSequence:
    """Iterate degrees of K on a random line, plus the fitted recurrence.

    recurrence holds d_n = sum_j coeffs[j] * d_(n-1-j) on indices >= start;
    genfun is (numerator, denominator) as integer coefficient lists, low
    degree first; delta is the growth rate (largest real root magnitude of
    the recurrence's characteristic polynomial).
    """

    subject_bracket: str
    q: int
    seed: int
    primes: tuple[int, int]
    degrees: list[int]
    recurrence: list[Fraction] | None = None
    recurrence_start: int | None = None
    delta: float | None = None
    genfun: tuple[list[int], list[int]] | None = None
    ratios: list[float] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "subject_bracket": self.subject_bracket,
                "q": self.q,
                "seed": self.seed,
                "primes": list(self.primes),
                "degrees": self.degrees,
                "recurrence": [str(c) for c in self.recurrence] if self.recurrence else None,
                "recurrence_start": self.recurrence_start,
                "delta": self.delta,
                "genfun": [self.genfun[0], self.genfun[1]] if self.genfun else None,
            },
            sort_keys=True,
        )


class _ModularLine:
    """One K-iteration run modulo a fixed prime."""

    def __init__(self, subject: Subject, p: int, seed: int):
        self.subject = subject
        self.q = subject.q
        self.p = p
        zeta = _primitive_qth_root(p, self.q)
        q = self.q
        sv = _signed_vector(subject)
        # hat coefficients: vhat_m = sum_i c[m][i] * x_i with c in F_p
        self.c = [[0] * subject.r for _ in range(q)]
        for m in range(q):
            for k in range(q):
                s = sv[k]
                w = pow(zeta, (k * m) % q, p)
                i = abs(s) - 1
                if s > 0:
                    self.c[m][i] = (self.c[m][i] + w) % p
                elif s < 0:
                    self.c[m][i] = (self.c[m][i] - w) % p
        # inverse transform data per class representative
        self.inv_q = pow(q, -1, p)
        self.rep = []
        for cls in (
            subject.classes
            if isinstance(subject, Pattern)
            else [pm[0] | pm[1] for pm in subject.classes]
        ):
            self.rep.append(min(cls))
        self.rep_sign = []
        for i, k in enumerate(self.rep):
            self.rep_sign.append(1 if sv[k] > 0 else -1)
        self.zeta = zeta
        self.sv = sv
        rng = random.Random(seed)
        self.coords = [
            np.array([rng.randrange(1, p), rng.randrange(1, p)], dtype=np.int64)
            for _ in range(subject.r)
        ]

    def _reduce(self, polys: list[np.ndarray]) -> list[np.ndarray]:
        p = self.p
        polys = [_trim(t) for t in polys]
        if any(len(t) == 0 for t in polys):
            raise SingularLine("a coordinate vanished")
        if len(polys) > 1:
            # gcd with one random-ish combination instead of a full chain;
            # verified by exact division, falling back to the chain if the
            # combination happened to share extra factors with polys[0]
            size = max(len(t) for t in polys[1:])
            combo = np.zeros(size, dtype=np.int64)
            for mult, poly in zip((1, 5, 17, 31, 101, 257, 1031, 4099), polys[1:]):
                combo[: len(poly)] = (combo[: len(poly)] + mult * poly) % p
            g = _pgcd(polys[0], combo, p)
            if len(g) > 1:
                quos = [_try_div(poly, g, p) for poly in polys]
                if all(quo is not None for quo in quos):
                    return quos
        g = polys[0]
        for poly in polys[1:]:
            if len(g) == 1:
                break
            g = _pgcd(g, poly, p)
        if len(g) == 0:
            raise SingularLine("all coordinates vanished")
        if len(g) > 1:
            polys = [_exact_div(poly, g, p) for poly in polys]
        return polys

    def step(self, record_half: bool = False) -> list[int]:
        p, q, r = self.p, self.q, self.subject.r
        x = self.coords
        if any(len(_trim(c)) == 0 for c in x):
            raise SingularLine("zero coordinate before J")
        # J: x_i -> prod_{j != i} x_j  (prefix/suffix products)
        pref = [np.array([1], dtype=np.int64)] * (r + 1)
        for i in range(r):
            pref[i + 1] = _pmul(pref[i], x[i], p)
        suf = [np.array([1], dtype=np.int64)] * (r + 1)
        for i in range(r - 1, -1, -1):
            suf[i] = _pmul(suf[i + 1], x[i], p)
        y = [_pmul(pref[i], suf[i + 1], p) for i in range(r)]
        degrees: list[int] = []
        if record_half:
            # the paper-style generator count: J is its own reduction step
            y = self._reduce(y)
            degrees.append(max(len(t) - 1 for t in y))
        # I on Cy(v(y)): vhat_m = sum_i c[m][i] y_i;  what_m = prod_{m' != m} vhat_m'
        vhat = []
        for m in range(q):
            acc = np.zeros(max(len(t) for t in y), dtype=np.int64)
            for i in range(r):
                ci = self.c[m][i]
                if ci:
                    acc[: len(y[i])] = (acc[: len(y[i])] + ci * y[i]) % p
            acc = _trim(acc)
            if len(acc) == 0:
                raise SingularLine("identically singular on the line")
            vhat.append(acc)
        prefv = [np.array([1], dtype=np.int64)] * (q + 1)
        for m in range(q):
            prefv[m + 1] = _pmul(prefv[m], vhat[m], p)
        sufv = [np.array([1], dtype=np.int64)] * (q + 1)
        for m in range(q - 1, -1, -1):
            sufv[m] = _pmul(sufv[m + 1], vhat[m], p)
        what = [_pmul(prefv[m], sufv[m + 1], p) for m in range(q)]
        # class values: z_i = (1/q) sum_m zeta^(-rep_i m) what_m, sign-adjusted
        size = max(len(t) for t in what)

        def w_at(k: int) -> np.ndarray:
            acc = np.zeros(size, dtype=np.int64)
            for m in range(q):
                w = pow(self.zeta, (-k * m) % q, p)
                acc[: len(what[m])] = (acc[: len(what[m])] + w * what[m]) % p
            return (acc * self.inv_q) % p

        z = []
        for i in range(r):
            acc = (w_at(self.rep[i]) * (self.rep_sign[i] % p)) % p
            acc = _trim(acc)
            if len(acc) == 0:
                raise SingularLine("zero class value after I")
            z.append(acc)
        if size <= 2048:
            # symbolic sanity: the inverse defining vector respects the pattern
            for k in range(q):
                s = self.sv[k]
                got = w_at(k)
                want = np.zeros(size, dtype=np.int64)
                if s > 0:
                    want[: len(z[s - 1])] = z[s - 1]
                elif s < 0:
                    want[: len(z[-s - 1])] = (-z[-s - 1]) % p
                if not np.array_equal(got, want):
                    raise SingularLine(f"inverse violates the pattern at index {k}")
        z = self._reduce(z)
        self.coords = z
        degrees.append(max(len(t) - 1 for t in z))
        return degrees


def _try_div(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """Quotient a / b over F_p, or None when the division is not exact."""
    a, b = _trim(a).copy(), _trim(b)
    if len(b) == 0:
        raise ZeroDivisionError
    if len(a) == 0:
        return a
    db = len(b) - 1
    if len(a) - 1 < db:
        return None
    if db == 0:
        return (a * pow(int(b[0]), -1, p)) % p
    out = np.zeros(len(a) - db, dtype=np.int64)
    inv_lead = pow(int(b[-1]), -1, p)
    for shift in range(len(a) - db - 1, -1, -1):
        factor = (int(a[shift + db]) * inv_lead) % p
        out[shift] = factor
        if factor:
            seg = a[shift : shift + db]
            seg -= (factor * b[:db]) % p
            seg %= p
    if np.any(a[:db]):
        return None
    return out


def _exact_div(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Exact polynomial division a / b over F_p."""
    out = _try_div(a, b, p)
    if out is None:
        raise ArithmeticError("division was not exact")
    return out


def degree_sequence(
    subject: Subject,
    n_max: int,
    seed: int = 1,
    prime_bits: int = 20,
    max_retries: int = 3,
    half_steps: bool = False,
) -> DegreeSequence:
    """Iterate K on a random line over two prime fields and record degrees.

    Degrees computed modulo the two primes must agree; disagreement retries
    with fresh primes, a singular line retries with a fresh seed.

    With half_steps=True the degree after each involution (J, then I) is
    recorded separately, so the sequence counts generator applications; the
    default counts whole K steps.
    """
    attempt = 0
    cur_seed = seed
    skip = 0
    while True:
        primes = _find_primes(subject.q, prime_bits, 2 + skip)[skip:]
        try:
            runs = []
            for p in primes:
                line = _ModularLine(subject, p, cur_seed)
                degs: list[int] = []
                for _ in range(n_max):
                    degs.extend(line.step(record_half=half_steps))
                runs.append(degs)
            if runs[0] != runs[1]:
                raise UnluckyPrime(f"degree disagreement: {runs[0]} vs {runs[1]}")
            return DegreeSequence(
                subject_bracket=subject.bracket(),
                q=subject.q,
                seed=cur_seed,
                primes=(primes[0], primes[1]),
                degrees=[1] + runs[0],  # d_0 = 1: the line itself
            )
        except UnluckyPrime:
            attempt += 1
            skip += 2
            if attempt >= max_retries:
                raise
        except SingularLine:
            attempt += 1
            cur_seed += 1
            if attempt >= max_retries:
                raise


# ---------------------------------------------------------------------------
# recurrence fitting


def _solve_rational(rows: list[list[Fraction]]) -> list[Fraction] | None:
    """Solve a square system given as [A | b] rows; None when singular."""
    n = len(rows)
    m = n + 1
    a = [row[:] for row in rows]
    for col in range(n):
        sel = next((r for r in range(col, n) if a[r][col] != 0), None)
        if sel is None:
            return None
        a[col], a[sel] = a[sel], a[col]
        piv = a[col][col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col] / piv
                for c in range(col, m):
                    a[r][c] -= f * a[col][c]
    return [a[i][n] / a[i][i] for i in range(n)]


def fit_recurrence(seq: DegreeSequence) -> DegreeSequence:
    """Find the minimal linear recurrence valid on a suffix of the degrees.

    Fills in recurrence, generating function (numerator, denominator over Z)
    and the growth rate delta; flags polynomial growth via delta = 1.
    """
    d = seq.degrees
    n = len(d)
    if n < 6:
        raise ValueError("need at least 6 degree terms")
    seq.ratios = [d[i + 1] / d[i] if d[i] else float("nan") for i in range(n - 1)]
    best = None
    for order in range(1, (n - 1) // 2 + 1):
        # the recurrence must verify on enough instances beyond the fit window
        min_instances = max(order + 2, 3)
        for start in range(0, n - order - min_instances + 1):
            rows = [
                [Fraction(d[start + i + j]) for j in range(order)]
                + [Fraction(d[start + i + order])]
                for i in range(order)
            ]
            coeffs = _solve_rational(rows)
            if coeffs is None:
                continue
            ok = all(
                sum(coeffs[j] * d[i + j] for j in range(order)) == d[i + order]
                for i in range(start, n - order)
            )
            if ok:
                best = (order, start, coeffs)
                break
        if best:
            break
    if best is None:
        seq.recurrence = None
        seq.delta = None
        seq.genfun = None
        return seq
    order, start, coeffs = best
    # recurrence as d_m = sum_j rec[j] d_(m-1-j)
    rec = list(reversed(coeffs))
    seq.recurrence = rec
    seq.recurrence_start = start
    # characteristic polynomial x^order - rec[0] x^(order-1) - ... - rec[-1];
    # rational roots are split off exactly (np.roots is unreliable at
    # multiple roots), the rest goes to the numeric solver
    char = [Fraction(1)] + [-c for c in rec]
    rational_roots: list[Fraction] = []

    def _deflate(poly: list[Fraction], root: Fraction) -> list[Fraction] | None:
        out = [poly[0]]
        for c in poly[1:]:
            out.append(c + out[-1] * root)
        if out[-1] != 0:
            return None
        return out[:-1]

    def _small_divisors(x: int) -> list[int]:
        x = abs(x)
        if x == 0 or x > 10_000:
            return []
        from .cyclotomic import divisors as _divs

        return _divs(x)

    changed = True
    while len(char) > 1 and changed:
        changed = False
        if char[-1] == 0:
            rational_roots.append(Fraction(0))
            char = char[:-1]
            changed = True
            continue
        nums = _small_divisors(char[-1].numerator * char[0].denominator)
        dens = _small_divisors(char[0].numerator * char[-1].denominator)
        cands = sorted(
            {Fraction(s * pn, pd) for pn in nums for pd in dens for s in (1, -1)},
            key=abs,
            reverse=True,
        )
        for cand in cands:
            deflated = _deflate(char, cand)
            if deflated is not None:
                rational_roots.append(cand)
                char = deflated
                changed = True
                break
    mags = [abs(float(r)) for r in rational_roots]
    if len(char) > 1:
        roots = np.roots([float(c) for c in char])
        real = [abs(z.real) for z in roots if abs(z.imag) < 1e-9]
        mags.extend(real if real else [abs(z) for z in roots])
    seq.delta = max(mags) if mags else None
    # generating function: denominator Q(x) = 1 - rec[0] x - ... ; numerator from data
    den_f = [Fraction(1)] + [-c for c in rec]
    lcm_den = 1
    for c in den_f:
        lcm_den = lcm_den * c.denominator // gcd(lcm_den, c.denominator)
    den = [int(c * lcm_den) for c in den_f]
    num_len = start + order
    num = []
    for i in range(max(num_len, 1)):
        acc = 0
        for j, qc in enumerate(den):
            if 0 <= i - j < n:
                acc += qc * d[i - j]
        num.append(acc)
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    seq.genfun = (num, den)
    return seq


# ---------------------------------------------------------------------------
# six-family collineation and inverse data


@dataclass(frozen=True)
class FamilyMapData:
    family_id: str
    q: int
    collineation: tuple[tuple[Fraction, ...], ...]
    inverse_map: Callable
    inverse_label: str
    composition_rule: str


def _family_constructors():
    from .closed_forms import six_families

    return six_families


def _mat(rows) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def _mat_apply(m, vec):
    return [sum(m[i][j] * vec[j] for j in range(len(vec))) for i in range(len(m))]


def _mat_inv(m):
    n = len(m)
    a = [list(row) + [Fraction(1 if i == j else 0) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        sel = next((r for r in range(col, n) if a[r][col] != 0), None)
        if sel is None:
            return None
        a[col], a[sel] = a[sel], a[col]
        piv = a[col][col]
        a[col] = [x / piv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def family_map_data(family_id: str, q: int) -> FamilyMapData:
    """The recorded collineation C and inverse map I of a family, plus the
    empirically validated composition expressing K on the family's colors.

    Candidate compositions are tested projectively against direct evaluation
    of K on random rational points; NoCompositionMatches is raised when none
    agrees (never masked).
    """
    if q % 2 or q < 4:
        raise PatternError("families require even q >= 4")
    eps = 1 if (q // 2) % 2 == 0 else -1
    fid = family_id.upper()
    if fid == "P1":
        c = _mat([[1, 1], [1, 1 - q]])
        # printed second component references an out-of-range variable; the
        # exact inverse of the family matrix gives (x0 + (2-q) x1, -x1)
        def inv(x):
            return [x[0] + (2 - q) * x[1], -x[1]]

        label = "(x0 + (2-q) x1, -x1)"
    elif fid == "Q1":
        c = _mat([[1, 1], [1, eps]])
        def inv(x):
            return [-x[0], (q - 2) * x[0] + x[1]]

        label = "(-x0, (q-2) x0 + x1)"
    elif fid == "P2":
        c = _mat(
            [
                [1, 2, 1],
                [Fraction(1 + eps, 2), Fraction(1 - eps, 2), -1],
                [1, -(q - 2), 1],
            ]
        )
        def inv(x):
            x0, x1, x2 = x
            return [
                x0 * x0 - (q - 2) * x1 * x1 - (q - 4) * x0 * x1 + eps * x0 * x2,
                -(x0 - eps * x2) * x1,
                -eps * x2 * x2 + eps * (q - 2) * x1 * x1 + (q - 4) * x2 * x1 - x0 * x2,
            ]

        label = "quadratic (printed form)"
    elif fid == "Q2":
        h = q // 2
        if eps == 1:
            c = _mat([[h - 1, h, 1], [1, 0, -1], [h - 1, -h, 1]])
            def inv(x):
                x0, x1, x2 = x
                return [
                    (2 * q - 4) * x0 * x0 - 2 * q * x1 * x1 + 4 * x0 * x2,
                    -4 * (x0 - x2) * x1,
                    -(q - 2) * (q - 4) * x0 * x0
                    + q * (q - 2) * x1 * x1
                    - 4 * x2 * x2
                    - 4 * (q - 3) * x0 * x2,
                ]

            label = "quadratic (printed even form)"
        else:
            c = _mat([[h, h - 1, 1], [0, 1, -1], [h, -h + 1, -1]])
            def inv(x):
                x0, x1, x2 = x
                return [
                    4 * (x1 - x2) * x0,
                    2 * q * x0 * x0 + (4 - 2 * q) * x1 * x1 - 4 * x1 * x2,
                    -q * (q - 2) * x0 * x0
                    + (q - 2) * (q - 4) * x1 * x1
                    + 4 * x2 * x2
                    + 4 * (q - 3) * x1 * x2,
                ]

            label = "quadratic (printed odd form)"
    else:
        raise PatternError(f"no recorded map data for family {family_id!r}")

    subject = dict(
        (spec.family_id, subj) for spec, subj in _family_constructors()(q)
    )[fid]
    c_inv = _mat_inv(c)  # None when the printed collineation is singular

    def jmap(x):
        prod = Fraction(1)
        for v in x:
            prod *= v
        return [prod / v for v in x]

    candidates = {
        "I o J": lambda x: inv(jmap(x)),
        "J o I": lambda x: jmap(inv(x)),
        "I": lambda x: inv(list(x)),
        "I o C": lambda x: inv(_mat_apply(c, x)),
        "C o I": lambda x: _mat_apply(c, inv(x)),
        "J o C o I": lambda x: jmap(_mat_apply(c, inv(x))),
        "I o C o J": lambda x: inv(_mat_apply(c, jmap(x))),
        "C o I o J": lambda x: _mat_apply(c, inv(jmap(x))),
        "J o I o C": lambda x: jmap(inv(_mat_apply(c, x))),
    }
    if c_inv is not None:
        candidates.update(
            {
                "I o C^-1": lambda x: inv(_mat_apply(c_inv, x)),
                "C^-1 o I": lambda x: _mat_apply(c_inv, inv(x)),
                "C^-1 o I o C": lambda x: _mat_apply(c_inv, inv(_mat_apply(c, x))),
                "C o I o C^-1": lambda x: _mat_apply(c, inv(_mat_apply(c_inv, x))),
                "J o I o C^-1": lambda x: jmap(inv(_mat_apply(c_inv, x))),
                "J o C^-1 o I": lambda x: jmap(_mat_apply(c_inv, inv(x))),
                "I o C^-1 o J": lambda x: inv(_mat_apply(c_inv, jmap(x))),
                "C^-1 o I o J": lambda x: _mat_apply(c_inv, inv(jmap(x))),
            }
        )

    rng = random.Random(20_000 + q)
    points = []
    tries = 0
    while len(points) < 20:
        tries += 1
        if tries > 1000:
            raise SingularLine("could not sample 20 regular points")
        vals = [Fraction(rng.randint(1, 40)) for _ in range(subject.r)]
        try:
            pt = ColorPoint.make(subject, vals)
            target = apply_K(pt)
        except (ZeroColorValue, SingularMatrix, PatternViolation, ZeroDivisionError):
            continue
        points.append((pt, target))

    def proj_same(a_vals, b_vals) -> bool:
        cross = None
        for x, y in zip(a_vals, b_vals):
            if x == 0 and y == 0:
                continue
            if x == 0 or y == 0:
                return False
            ratio = Fraction(x) / Fraction(y)
            if cross is None:
                cross = ratio
            elif ratio != cross:
                return False
        return cross is not None

    for name, fn in candidates.items():
        try:
            if all(proj_same(fn(list(pt.values)), list(tg.values)) for pt, tg in points):
                return FamilyMapData(fid, q, c, inv, label, name)
        except (ZeroDivisionError, ValueError):
            continue
    raise NoCompositionMatches(
        f"no candidate composition of C and I reproduces K for {fid} at q={q}"
    )
