"""Exact integer/rational primitives and local symbols over Q.

Places are primes (int) or ``INF`` for the real place.  Rational inputs are
accepted anywhere a nonzero number is expected; they are handled through
``Fraction`` so nothing is ever rounded.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math

import sympy

INF = math.inf


def _as_fraction(a):
    f = Fraction(a)
    if f == 0:
        raise ValueError("expected a nonzero rational")
    return f


def valuation(n, p, allow_zero=False):
    """Exponent of the prime ``p`` in ``n`` (integer or rational).

    ``n = 0`` has infinite valuation: returned as ``INF`` when ``allow_zero``
    is set, otherwise a ValueError.
    """
    f = Fraction(n)
    if f == 0:
        if allow_zero:
            return INF
        raise ValueError("valuation of 0 is infinite")
    num, den = abs(f.numerator), f.denominator
    e = 0
    while num % p == 0:
        num //= p
        e += 1
    while den % p == 0:
        den //= p
        e -= 1
    return e


def unit_part(a, p):
    """``a / p^v(a)`` as a Fraction."""
    f = _as_fraction(a)
    return f / Fraction(p) ** valuation(f, p)


def is_squarefree(n):
    if n == 0:
        raise ValueError("is_squarefree(0) is undefined")
    return all(e == 1 for e in factor(abs(n)).values())


@lru_cache(maxsize=4096)
def _factor_cached(n):
    return tuple(sorted(sympy.factorint(n).items()))


def factor(n):
    """Prime factorisation of a positive integer as a dict."""
    n = int(n)
    if n <= 0:
        raise ValueError("factor expects a positive integer")
    return dict(_factor_cached(n))


def prime_divisors(n):
    """Sorted primes dividing the nonzero rational ``n`` (numerator or denominator)."""
    f = _as_fraction(n)
    ps = set(factor(abs(f.numerator))) | set(factor(f.denominator))
    return sorted(ps)


def is_prime(p):
    return sympy.isprime(int(p))


def legendre_symbol(a, p):
    """Legendre symbol (a/p) for an odd prime p, by Euler's criterion."""
    if p == 2:
        raise ValueError("legendre_symbol needs an odd prime")
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


@lru_cache(maxsize=None)
def smallest_nonresidue(p):
    for u in range(2, p):
        if legendre_symbol(u, p) == -1:
            return u
    raise ValueError(f"no nonresidue mod {p}")


def _split(a, p):
    """(valuation, odd integer unit representative) of a nonzero rational at p."""
    f = _as_fraction(a)
    v = valuation(f, p)
    u = f / Fraction(p) ** v
    # u has no p in numerator/denominator; num*den is in the same square class.
    return v, u.numerator * u.denominator


def hilbert_symbol(a, b, place):
    """Hilbert symbol (a, b) at a prime or at INF."""
    a = _as_fraction(a)
    b = _as_fraction(b)
    if place == INF:
        return -1 if (a < 0 and b < 0) else 1
    p = int(place)
    alpha, u = _split(a, p)
    beta, v = _split(b, p)
    if p == 2:
        eps = lambda x: ((x - 1) // 2) % 2
        omega = lambda x: ((x * x - 1) // 8) % 2
        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    e = (alpha * beta * ((p - 1) // 2)) % 2
    s = -1 if e else 1
    if beta % 2:
        s *= legendre_symbol(u, p)
    if alpha % 2:
        s *= legendre_symbol(v, p)
    return s


@dataclass(frozen=True)
class SquareClass:
    """An element of Q_v^* / (Q_v^*)^2 with a canonical representative.

    Odd p: one of 1, u, p, u*p with u the least positive nonresidue.
    p = 2: one of +-1, +-2, +-5, +-10.  INF: +-1.
    """

    prime: object
    representative: int

    def __mul__(self, other):
        if self.prime != other.prime:
            raise ValueError("square classes at different places")
        return square_class(self.representative * other.representative, self.prime)

    def bits(self):
        """Coordinates in the F_2-vector space Q_v^*/(Q_v^*)^2."""
        r = self.representative
        if self.prime == INF:
            return (int(r < 0),)
        p = self.prime
        v = valuation(r, p) % 2
        u = r // p**v if v else r
        if p == 2:
            u8 = u % 8
            return (int(u8 in (3, 7)), int(u8 in (3, 5)), v)
        return (int(legendre_symbol(u, p) == -1), v)

    def is_square(self):
        return self.representative == 1


def square_class(a, place):
    """Canonical square class of a nonzero rational at ``place``."""
    f = _as_fraction(a)
    if place == INF:
        return SquareClass(INF, 1 if f > 0 else -1)
    p = int(place)
    v, u = _split(f, p)
    if p == 2:
        rep = {1: 1, 7: -1, 5: 5, 3: -5}[u % 8]
        return SquareClass(2, rep * (2 if v % 2 else 1))
    rep = 1 if legendre_symbol(u, p) == 1 else smallest_nonresidue(p)
    return SquareClass(p, rep * (p if v % 2 else 1))


def square_class_from_bits(bits, place):
    if place == INF:
        return SquareClass(INF, -1 if bits[0] else 1)
    p = place
    if p == 2:
        unit = {(0, 0): 1, (1, 0): -1, (0, 1): 5, (1, 1): -5}[(bits[0], bits[1])]
        return SquareClass(2, unit * (2 if bits[2] else 1))
    unit = smallest_nonresidue(p) if bits[0] else 1
    return SquareClass(p, unit * (p if bits[1] else 1))


def square_class_group(place):
    """All elements of Q_v^*/(Q_v^*)^2 in a fixed order."""
    if place == INF:
        return [SquareClass(INF, 1), SquareClass(INF, -1)]
    if place == 2:
        return [SquareClass(2, r) for r in (1, -1, 5, -5, 2, -2, 10, -10)]
    u = smallest_nonresidue(place)
    return [SquareClass(place, r) for r in (1, u, place, u * place)]


def is_local_square(a, place):
    return square_class(a, place).is_square()
