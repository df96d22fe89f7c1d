from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from _corpus import random_lattice, random_unimodular, rng_for
from quadlat.arith import is_squarefree
from quadlat.genus import enumerate_genus, is_isometric
from quadlat.lattice import (
    QuadraticLattice,
    binary_lattice,
    diagonal_lattice,
    e8_lattice,
    identity_lattice,
    short_vector_norms,
)
from quadlat.represent import (
    Embedding,
    enumerate_embeddings,
    is_primitive,
    primitive_representation_count,
    primitive_representation_numbers,
    representation_count,
    representation_numbers,
    represented_by_every_class,
    weighted_counts,
)

E8_AUT = 696729600
I9_AUT = 2**9 * 362880


def gram_of(e):
    M, B = e.matrix, e.target.gram_list()
    n, m = len(M), len(M[0])
    return [[sum(M[k][i] * B[k][l] * M[l][j] for k in range(n) for l in range(n)) for j in range(m)] for i in range(m)]


def test_embedding_examples():
    I3 = identity_lattice(3)
    assert len(enumerate_embeddings(diagonal_lattice([1]), I3)) == 6
    assert len(enumerate_embeddings(identity_lattice(2), identity_lattice(2))) == 8
    emb = enumerate_embeddings(diagonal_lattice([3]), I3)
    assert sorted(tuple(abs(r[0]) for r in e.matrix) for e in emb) == [(1, 1, 1)] * 8
    assert len(enumerate_embeddings(QuadraticLattice([]), I3)) == 1


def test_embedding_rejects_bad_matrix():
    with pytest.raises(ValueError):
        Embedding(diagonal_lattice([2]), identity_lattice(2), [[1], [0]])


def test_primitivity_examples():
    I2 = identity_lattice(2)
    assert not is_primitive(Embedding(diagonal_lattice([4]), I2, [[2], [0]]))
    assert is_primitive(Embedding(I2, I2, [[1, 0], [0, 1]]))
    assert is_primitive(Embedding(diagonal_lattice([5]), I2, [[1], [2]]))


def test_count_examples():
    I3 = identity_lattice(3)
    assert representation_count(diagonal_lattice([5]), I3) == 24
    assert primitive_representation_count(diagonal_lattice([5]), I3) == 24
    assert representation_count(diagonal_lattice([1]), e8_lattice()) == 0
    assert representation_count(QuadraticLattice([]), I3) == 1
    # 9 = 3^2 picks up the imprimitive (3,0,0) family
    assert representation_count(diagonal_lattice([9]), I3) == 30
    assert primitive_representation_count(diagonal_lattice([9]), I3) == 24


@given(st.integers(0, 10**6))
@settings(max_examples=30)
def test_embeddings_are_isometric_and_match_counts(seed):
    rng = rng_for(seed)
    L = random_lattice(rng, rng.choice([2, 3, 4]), scales=[1, 1, 2, 3], definite=True)
    Ls = random_lattice(rng, rng.choice([1, 2]), scales=[1, 2, 3], definite=True)
    emb = enumerate_embeddings(Ls, L)
    for e in emb:
        assert gram_of(e) == Ls.gram_list()
    assert len(emb) == representation_count(Ls, L)
    prim = sum(1 for e in emb if is_primitive(e.matrix))
    assert prim == primitive_representation_count(Ls, L)
    if is_squarefree(Ls.discriminant()):
        assert prim == len(emb)
    # isometric replacement of either side keeps the count
    L2 = L.transform(random_unimodular(rng, L.rank))
    Ls2 = Ls.transform(random_unimodular(rng, Ls.rank))
    assert is_isometric(L, L2) is not None
    assert representation_count(Ls2, L2) == len(emb)


@given(st.integers(1, 40), st.integers(0, 10**6))
@settings(max_examples=30)
def test_rank_one_matches_short_vectors(d, seed):
    rng = rng_for(seed)
    L = random_lattice(rng, rng.choice([2, 3, 4]), scales=[1, 1, 2, 3], definite=True)
    _, norms = short_vector_norms(L, d)
    assert representation_count(diagonal_lattice([d]), L) == int((norms == d).sum())


def test_frame_counting_matches_direct():
    L = identity_lattice(9)
    r = representation_numbers(L, 8)
    for d in range(1, 9):
        _, norms = short_vector_norms(L, d)
        assert r[d] == int((norms == d).sum())
    assert representation_numbers(e8_lattice(), 4) == [1, 0, 240, 0, 2160]
    L = random_lattice(rng_for(5), 4, scales=[1, 2, 3], definite=True)
    r = representation_numbers(L, 25)
    _, norms = short_vector_norms(L, 25)
    assert r[1:] == [int((norms == d).sum()) for d in range(1, 26)]


def test_primitive_numbers_by_filtering():
    L = identity_lattice(4)
    prim = primitive_representation_numbers(L, 40)
    for d in range(1, 41):
        emb = enumerate_embeddings(diagonal_lattice([d]), L)
        assert prim[d] == sum(1 for e in emb if is_primitive(e.matrix))


def test_every_class_examples(i9_record):
    ok, counts = represented_by_every_class(diagonal_lattice([1]), i9_record)
    assert ok and sorted(counts.values()) == [2, 18]
    assert represented_by_every_class(diagonal_lattice([2]), i9_record)[0]
    assert not represented_by_every_class(identity_lattice(10), i9_record)[0]


def test_weighted_counts(i9_record):
    rt, counts, g = weighted_counts(diagonal_lattice([1]), i9_record)
    assert rt == Fraction(18, I9_AUT) + Fraction(2, 2 * E8_AUT)
    assert g == Fraction(1, I9_AUT) + Fraction(1, 2 * E8_AUT)
    rec = enumerate_genus(identity_lattice(3))
    rt, counts, g = weighted_counts(diagonal_lattice([5]), rec)
    assert rt / g == 24 == counts[0]
