from math import gcd, isqrt

import pytest
from hypothesis import given, settings, strategies as st

from quadlat.arith import is_squarefree
from quadlat.linnik import (
    BinaryFormClass,
    class_number,
    complement_class,
    gauss_check,
    reduce_binary,
    reduced_forms,
    so3_signed_permutations,
    sphere_solutions,
)


def brute_class_number(D):
    """Count reduced primitive forms by scanning every (a, b, c) in the reduced box."""
    n = 0
    for a in range(1, isqrt(-D) + 1):
        for b in range(-a, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or gcd(gcd(a, b), c) != 1:
                continue
            if b < 0 and (-b == a or a == c):
                continue
            n += 1
    return n


def test_reduce_examples():
    assert reduce_binary(1, 0, 1) == BinaryFormClass(1, 0, 1)
    assert reduce_binary(1, 2, 2) == BinaryFormClass(1, 0, 1)
    assert reduce_binary(2, 2, 3) == BinaryFormClass(2, 2, 3)
    with pytest.raises(ValueError):
        reduce_binary(1, 3, 1)


@given(st.integers(1, 30), st.integers(-30, 30), st.integers(1, 30), st.integers(-5, 5), st.integers(-5, 5))
def test_reduction_is_canonical(a, b, c, s, t):
    if b * b - 4 * a * c >= 0:
        return
    f = reduce_binary(a, b, c)
    assert abs(f.b) <= f.a <= f.c
    assert f.disc == b * b - 4 * a * c
    # x -> x + s y, then swap: same class
    a2, b2, c2 = a, b + 2 * a * s, a * s * s + b * s + c
    assert reduce_binary(c2, -b2, a2) == f
    a3, b3, c3 = a, b + 2 * a * t, a * t * t + b * t + c
    assert reduce_binary(a3, b3, c3) == f


def test_class_number_anchors():
    assert class_number(-3) == 1
    assert class_number(-4) == 1
    assert class_number(-8) == 1
    assert class_number(-20) == 2
    assert class_number(-52) == 2
    assert reduced_forms(-20) == [BinaryFormClass(1, 0, 5), BinaryFormClass(2, 2, 3)]


@pytest.mark.parametrize("D", [-D for D in range(3, 400) if D % 4 in (0, 3)])
def test_class_number_matches_scan(D):
    assert class_number(D) == brute_class_number(D)


def test_sphere_examples():
    assert len(sphere_solutions(1)) == 6
    assert len(sphere_solutions(5)) == 24
    assert sphere_solutions(7) == []
    for x, y, z in sphere_solutions(26):
        assert x * x + y * y + z * z == 26 and gcd(gcd(x, y), z) == 1


def test_complement_examples():
    assert complement_class((1, 0, 0), 1) == BinaryFormClass(1, 0, 1)
    assert complement_class((2, 1, 0), 5) == BinaryFormClass(1, 0, 5)


@given(st.integers(1, 400))
@settings(max_examples=40)
def test_complement_disc_and_rotation_invariance(d):
    rots = so3_signed_permutations()
    for s in sphere_solutions(d)[:6]:
        f = complement_class(s, d)
        assert f.disc == -4 * d
        for R in rots:
            t = tuple(sum(R[i][j] * s[j] for j in range(3)) for i in range(3))
            assert complement_class(t, d) == f


def test_gauss_check_small():
    rows, (d1, c1, h1, ok1) = gauss_check(60)
    assert [r[0] for r in rows] == [d for d in range(5, 61, 4) if is_squarefree(d)]
    assert rows[0] == (5, 24, 24, True)
    assert next(r for r in rows if r[0] == 13) == (13, 24, 24, True)
    assert all(r[3] for r in rows)
    assert (d1, c1, h1, ok1) == (1, 6, 12, False)
