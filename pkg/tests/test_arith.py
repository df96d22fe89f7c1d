from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from _oracles import brute_hilbert
from quadlat.arith import (
    INF,
    factor,
    hilbert_symbol,
    is_squarefree,
    legendre_symbol,
    square_class,
    square_class_from_bits,
    square_class_group,
    valuation,
)

nonzero = st.integers(-400, 400).filter(bool)
PRIMES = [2, 3, 5, 7, 11, 13]


def test_valuation_basics():
    assert valuation(48, 2) == 4
    assert valuation(Fraction(9, 4), 2) == -2
    assert valuation(0, 3, allow_zero=True) == INF
    with pytest.raises(ValueError):
        valuation(0, 3)


def test_squarefree_and_factor():
    assert factor(360) == {2: 3, 3: 2, 5: 1}
    assert is_squarefree(30) and not is_squarefree(12)
    with pytest.raises(ValueError):
        is_squarefree(0)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_hilbert_matches_brute_force(p):
    vals = [-15, -10, -7, -6, -5, -3, -2, -1, 1, 2, 3, 5, 6, 7, 10, 14, 15, 21, 35]
    for a in vals:
        for b in vals:
            assert hilbert_symbol(a, b, p) == brute_hilbert(a, b, p), (a, b, p)


def test_hilbert_known_values():
    assert hilbert_symbol(-1, -1, 2) == -1
    assert hilbert_symbol(-1, -1, INF) == -1
    assert hilbert_symbol(2, 3, 3) == -1
    assert hilbert_symbol(Fraction(1, 4), 7, 7) == 1


@given(nonzero, nonzero)
def test_hilbert_product_formula(a, b):
    places = {2} | set(factor(abs(a))) | set(factor(abs(b)))
    s = hilbert_symbol(a, b, INF)
    for p in places:
        s *= hilbert_symbol(a, b, p)
    assert s == 1


@given(nonzero, nonzero, nonzero, st.sampled_from(PRIMES))
def test_hilbert_bimultiplicative(a, b, c, p):
    assert hilbert_symbol(a, b * c, p) == hilbert_symbol(a, b, p) * hilbert_symbol(a, c, p)
    assert hilbert_symbol(a, b, p) == hilbert_symbol(b, a, p)
    assert hilbert_symbol(a, -a, p) == 1


@given(nonzero, st.sampled_from(PRIMES + [INF]))
def test_square_class_roundtrip(a, place):
    c = square_class(a, place)
    assert square_class_from_bits(c.bits(), place) == c
    assert square_class(a * 49 * 16, place) == c
    assert c in square_class_group(place)


@pytest.mark.parametrize("place,size", [(2, 8), (3, 4), (13, 4), (INF, 2)])
def test_square_class_group_size(place, size):
    group = square_class_group(place)
    assert len(set(group)) == size
    assert len({g.bits() for g in group}) == size


@given(st.integers(1, 200), st.sampled_from([3, 5, 7, 11]))
def test_legendre_euler(a, p):
    assert legendre_symbol(a, p) % p == pow(a, (p - 1) // 2, p) % p
