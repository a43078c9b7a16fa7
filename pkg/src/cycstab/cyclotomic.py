"""Exact arithmetic in the cyclotomic field Q(w) with w = exp(2*pi*i/q).

Elements are kept in canonical form: coordinates with respect to the basis
1, w, ..., w^(phi(q)-1) after reduction modulo the q-th cyclotomic polynomial.
Equality of two values is then componentwise comparison, which is the
primitive every stability test in this package reduces to.

Also provides the unnormalized discrete Fourier transform U = (w^(ij)) of
rational vectors, the cyclic convolution product, and quadratic Gauss sums.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from math import gcd


# ---------------------------------------------------------------------------
# small arithmetic helpers shared across the package


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of n >= 1 as {prime: exponent}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    factors: dict[int, int] = {}
    m = n
    d = 2
    while d * d <= m:
        while m % d == 0:
            factors[d] = factors.get(d, 0) + 1
            m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        factors[m] = factors.get(m, 0) + 1
    return factors


def divisors(n: int) -> list[int]:
    """Sorted list of positive divisors of n."""
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    phi = 1
    for p, e in factorize(n).items():
        phi *= (p - 1) * p ** (e - 1)
    return phi


def units_mod(n: int) -> tuple[int, ...]:
    """The unit group of Z_n as a sorted tuple (Z_1 is the trivial group {0})."""
    if n == 1:
        return (0,)
    return tuple(k for k in range(n) if gcd(k, n) == 1)


# ---------------------------------------------------------------------------
# integer polynomials (dense, lowest degree first)


class IntPoly:
    """Dense polynomial over Z; the zero polynomial has an empty coefficient list."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = list(coeffs)
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        return isinstance(other, IntPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other: "IntPoly") -> "IntPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return IntPoly(out)

    def __neg__(self) -> "IntPoly":
        return IntPoly([-c for c in self.coeffs])

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        return self + (-other)

    def __mul__(self, other: "IntPoly") -> "IntPoly":
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return IntPoly()
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return IntPoly(out)

    def divmod_monic(self, other: "IntPoly") -> tuple["IntPoly", "IntPoly"]:
        """Long division by a monic divisor; stays in Z[X]."""
        if other.is_zero() or other.coeffs[-1] != 1:
            raise ValueError("divisor must be monic")
        rem = list(self.coeffs)
        dq = len(other.coeffs) - 1
        if dq == 0:
            return IntPoly(rem), IntPoly()
        if len(rem) <= dq:
            return IntPoly(), IntPoly(rem)
        quo = [0] * (len(rem) - dq)
        for i in range(len(rem) - dq - 1, -1, -1):
            c = rem[i + dq]
            if c:
                quo[i] = c
                for j, bj in enumerate(other.coeffs):
                    rem[i + j] -= c * bj
        return IntPoly(quo), IntPoly(rem)

    def __repr__(self) -> str:
        if self.is_zero():
            return "IntPoly(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if i == 0 else (f"{c}*X^{i}" if c != 1 else f"X^{i}"))
        return "IntPoly(" + " + ".join(terms) + ")"


def x_power_minus_one(n: int) -> IntPoly:
    return IntPoly([-1] + [0] * (n - 1) + [1])


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> IntPoly:
    """The n-th cyclotomic polynomial, by iterated exact division of X^n - 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return IntPoly([-1, 1])
    poly = x_power_minus_one(n)
    for d in divisors(n)[:-1]:
        quo, rem = poly.divmod_monic(cyclotomic_poly(d))
        if not rem.is_zero():
            raise AssertionError("cyclotomic division left a remainder")
        poly = quo
    return poly


# ---------------------------------------------------------------------------
# canonical reduction tables


@lru_cache(maxsize=None)
def _power_rows(q: int) -> tuple[tuple[int, ...], ...]:
    """Row j is the canonical integer coordinate vector of w^j, for j < max(q, 2*phi-1)."""
    phi = euler_phi(q)
    top = tuple(-c for c in cyclotomic_poly(q).coeffs[:phi])  # X^phi mod Phi_q
    rows = []
    for j in range(max(q, 2 * phi - 1)):
        if j < phi:
            rows.append(tuple(1 if i == j else 0 for i in range(phi)))
        else:
            prev = rows[j - 1]
            carry = prev[phi - 1]
            shifted = [0] + list(prev[: phi - 1])
            if carry:
                for i in range(phi):
                    shifted[i] += carry * top[i]
            rows.append(tuple(shifted))
    return tuple(rows)


@lru_cache(maxsize=None)
def omega_int_table(q: int) -> tuple[tuple[int, ...], ...]:
    """Canonical integer coordinates of w^0, ..., w^(q-1)."""
    return _power_rows(q)[:q]


# ---------------------------------------------------------------------------
# field elements


class CycEl:
    """An element of Q(w_q) in canonical coordinates modulo Phi_q."""

    __slots__ = ("q", "coeffs")

    def __init__(self, q: int, coeffs):
        phi = euler_phi(q)
        cs = tuple(Fraction(c) for c in coeffs)
        if len(cs) != phi:
            raise ValueError(f"expected {phi} coordinates for modulus {q}, got {len(cs)}")
        self.q = q
        self.coeffs = cs

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, q: int) -> "CycEl":
        return cls(q, [0] * euler_phi(q))

    @classmethod
    def one(cls, q: int) -> "CycEl":
        return cls.from_rational(q, 1)

    @classmethod
    def from_rational(cls, q: int, value) -> "CycEl":
        coeffs = [Fraction(value)] + [Fraction(0)] * (euler_phi(q) - 1)
        return cls(q, coeffs)

    @classmethod
    def from_poly_coeffs(cls, q: int, coeffs) -> "CycEl":
        """Canonical image of sum_j coeffs[j] * w^j for arbitrary degree."""
        phi = euler_phi(q)
        out = [Fraction(0)] * phi
        rows = _power_rows(q)
        for j, c in enumerate(coeffs):
            c = Fraction(c)
            if not c:
                continue
            jj = j
            if jj >= len(rows):
                jj = jj % q
            row = rows[jj]
            for i in range(phi):
                if row[i]:
                    out[i] += c * row[i]
        return cls(q, out)

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "CycEl") -> None:
        if self.q != other.q:
            raise ValueError(f"modulus mismatch: {self.q} != {other.q}")

    def __add__(self, other: "CycEl") -> "CycEl":
        self._check(other)
        return CycEl(self.q, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "CycEl") -> "CycEl":
        self._check(other)
        return CycEl(self.q, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "CycEl":
        return CycEl(self.q, [-a for a in self.coeffs])

    def scale(self, factor) -> "CycEl":
        f = Fraction(factor)
        return CycEl(self.q, [a * f for a in self.coeffs])

    def __mul__(self, other: "CycEl") -> "CycEl":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        phi = len(a)
        conv = [Fraction(0)] * (2 * phi - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        conv[i + j] += ai * bj
        return CycEl.from_poly_coeffs(self.q, conv)

    def __pow__(self, n: int) -> "CycEl":
        if n < 0:
            raise ValueError("negative powers not supported")
        result = CycEl.one(self.q)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CycEl) and self.q == other.q and self.coeffs == other.coeffs
        )

    def __hash__(self) -> int:
        return hash((self.q, self.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def galois(self, a: int) -> "CycEl":
        """Image under w -> w^a (a invertible mod q gives a field automorphism)."""
        acc = [Fraction(0)] * self.q
        for j, c in enumerate(self.coeffs):
            if c:
                acc[(a * j) % self.q] += c
        return CycEl.from_poly_coeffs(self.q, acc)

    def complex_value(self) -> complex:
        w = cmath.exp(2j * cmath.pi / self.q)
        return sum(float(c) * w**j for j, c in enumerate(self.coeffs))

    def __repr__(self) -> str:
        return f"CycEl(q={self.q}, {[str(c) for c in self.coeffs]})"


def root_power(q: int, k: int) -> CycEl:
    """Canonical representative of w^k."""
    rows = _power_rows(q)
    return CycEl(q, rows[k % q])


# ---------------------------------------------------------------------------
# Fourier transform, convolution, Gauss sums


def fourier(v) -> list[CycEl]:
    """Unnormalized DFT: entry j is sum_i v[i] * w^(ij)."""
    q = len(v)
    rows = omega_int_table(q)
    phi = euler_phi(q)
    out = []
    for j in range(q):
        acc = [Fraction(0)] * phi
        for i, vi in enumerate(v):
            if vi:
                f = Fraction(vi)
                row = rows[(i * j) % q]
                for t in range(phi):
                    if row[t]:
                        acc[t] += f * row[t]
        out.append(CycEl(q, acc))
    return out


def fourier_inverse(vhat: list[CycEl]) -> list[CycEl]:
    """Inverse of :func:`fourier`; entry i is (1/q) sum_j vhat[j] * w^(-ij)."""
    q = len(vhat)
    out = []
    inv_q = Fraction(1, q)
    for i in range(q):
        acc = CycEl.zero(q)
        for j, vj in enumerate(vhat):
            acc = acc + vj * root_power(q, (-i * j) % q)
        out.append(acc.scale(inv_q))
    return out


def convolution(u, v) -> list[Fraction]:
    """Cyclic convolution (u * v)_i = sum_j u_j v_(i-j); Cy(u)Cy(v) = Cy(u conv v)."""
    if len(u) != len(v):
        raise ValueError("vectors must have equal length")
    q = len(u)
    out = [Fraction(0)] * q
    for i in range(q):
        acc = Fraction(0)
        for j in range(q):
            uj = u[j]
            if uj:
                acc += Fraction(uj) * Fraction(v[(i - j) % q])
        out[i] = acc
    return out


def gauss_sum(q: int) -> CycEl:
    """The quadratic Gauss sum G = sum_j w^(j^2)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    acc = [0] * q
    for j in range(q):
        acc[(j * j) % q] += 1
    return CycEl.from_poly_coeffs(q, acc)


def gauss_sum_checks(q: int, tol: float = 1e-9) -> bool:
    """Verify G^2 exactly and the sign of G numerically, split on q mod 4.

    G^2 must equal q, -q, 0, or 2q*i (for q = 1, 3, 2, 0 mod 4 respectively,
    with i realized as w^(q/4) in the last case), and the floating point value
    of G must match the closed form within tol.
    """
    g = gauss_sum(q)
    g2 = g * g
    r = q % 4
    if r == 1:
        exact_ok = g2 == CycEl.from_rational(q, q)
        expected = complex(q**0.5, 0.0)
    elif r == 3:
        exact_ok = g2 == CycEl.from_rational(q, -q)
        expected = complex(0.0, q**0.5)
    elif r == 2:
        exact_ok = g.is_zero()
        expected = complex(0.0, 0.0)
    else:
        exact_ok = g2 == root_power(q, q // 4).scale(2 * q)
        expected = complex(q**0.5, q**0.5)
    return exact_ok and abs(g.complex_value() - expected) < tol
