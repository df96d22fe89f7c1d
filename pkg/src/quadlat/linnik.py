"""Sums of three squares, binary form classes and the complement-form map."""

from dataclasses import dataclass
from itertools import permutations, product
from math import gcd, isqrt

from . import intmat
from .arith import is_squarefree
from .lattice import complement_basis, identity_lattice, span


@dataclass(frozen=True, order=True)
class BinaryFormClass:
    a: int
    b: int
    c: int

    @property
    def disc(self):
        return self.b * self.b - 4 * self.a * self.c

    def __post_init__(self):
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c) or (b < 0 and (abs(b) == a or a == c)):
            raise ValueError(f"({a},{b},{c}) is not reduced")


def reduce_binary(a, b, c):
    """Reduced form equivalent to ax^2 + bxy + cy^2 under SL_2(Z)."""
    a, b, c = int(a), int(b), int(c)
    if b * b - 4 * a * c >= 0 or a <= 0:
        raise ValueError("form is not positive definite")
    while True:
        if abs(b) > a:
            # translate b into (-a, a]
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
            continue
        if a > c:
            a, b, c = c, -b, a
            continue
        break
    if b < 0 and (-b == a or a == c):
        b = -b
    return BinaryFormClass(a, b, c)


def reduced_forms(D, primitive=True):
    """All reduced forms of discriminant D < 0."""
    if D >= 0 or D % 4 not in (0, 1):
        raise ValueError("need D < 0 with D = 0, 1 mod 4")
    out = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (b < 0 and a == c):
                continue
            if primitive and gcd(gcd(a, b), c) != 1:
                continue
            out.append(BinaryFormClass(a, b, c))
        a += 1
    return sorted(out)


def class_number(D):
    return len(reduced_forms(D))


def sphere_solutions(d):
    """Primitive (x, y, z) with x^2 + y^2 + z^2 = d, sorted."""
    if d < 1:
        raise ValueError("d must be positive")
    out = []
    r = isqrt(d)
    for x in range(-r, r + 1):
        rx = d - x * x
        ry = isqrt(rx)
        for y in range(-ry, ry + 1):
            zz = rx - y * y
            z = isqrt(zz)
            if z * z != zz:
                continue
            for zz_ in ((z, -z) if z else (0,)):
                if gcd(gcd(x, y), zz_) == 1:
                    out.append((x, y, zz_))
    return sorted(out)


def complement_class(s, d):
    """Reduced class of the form on s-perp in Z^3; its discriminant is -4d."""
    x, y, z = (int(t) for t in s)
    if x * x + y * y + z * z != d or gcd(gcd(x, y), z) != 1:
        raise ValueError("s must be a primitive solution of x^2+y^2+z^2 = d")
    I3 = identity_lattice(3)
    K = complement_basis(I3, span(I3, (x, y, z)))
    # orient (s, u, w) positively so that rotations of s give the same class
    if intmat.det([[x, K[0][0], K[0][1]], [y, K[1][0], K[1][1]], [z, K[2][0], K[2][1]]]) < 0:
        K = [[r[1], r[0]] for r in K]
    (B11, B12), (_, B22) = I3.transform(K).gram
    # Euclidean norm on s-perp: Q(u) = ax^2 + bxy + cy^2 with B = [[2a, b], [b, 2c]]
    f = reduce_binary(B11 // 2, B12, B22 // 2)
    assert f.disc == -4 * d, "complement discriminant must be -4d"
    return f


def so3_signed_permutations():
    """The 24 signed permutation matrices of determinant 1."""
    mats = []
    for perm in permutations(range(3)):
        for signs in product((1, -1), repeat=3):
            M = [[0] * 3 for _ in range(3)]
            for i, j in enumerate(perm):
                M[i][j] = signs[i]
            if intmat.det(M) == 1:
                mats.append(M)
    return mats


def gauss_check(d_max):
    """Rows (d, count, 12 h(-4d), equal) for squarefree d = 1 mod 4, 5 <= d <= d_max.

    d = 1 is returned separately: six unit vectors against 12 h(-4) = 12.
    """
    rows = []
    for d in range(5, d_max + 1, 4):
        if not is_squarefree(d):
            continue
        cnt = len(sphere_solutions(d))
        h12 = 12 * class_number(-4 * d)
        rows.append((d, cnt, h12, cnt == h12))
    exception = (1, len(sphere_solutions(1)), 12 * class_number(-4), False)
    return rows, exception
