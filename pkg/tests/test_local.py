import pytest
from hypothesis import given, strategies as st

from _corpus import random_lattice, random_pair, random_unimodular, rng_for
from quadlat._config import INCONCLUSIVE
from quadlat.arith import INF, prime_divisors, square_class, square_class_group, valuation
from quadlat.lattice import (
    binary_lattice,
    diagonal_lattice,
    direct_sum,
    e8_lattice,
    hyperbolic_plane,
    identity_lattice,
)
from quadlat.local import (
    hasse_invariant,
    is_isotropic_local,
    isotropic_by_splitting,
    jordan_decompose,
    lifting_oracle_embeds,
    local_isometric,
    locally_representable,
    oracle_precision,
    representable_at_infinity,
    spinor_norm_image,
)

nonzero = st.integers(-50, 50).filter(bool)
places = st.sampled_from([2, 3, 5, 7, 11, INF])


def blocks(L, p):
    return [(b.scale, b.rank, b.unit_det_class.representative) for b in jordan_decompose(L, p).blocks]


def test_jordan_examples():
    assert blocks(identity_lattice(3), 3) == [(0, 3, 1)]
    assert blocks(diagonal_lattice([1, 3]), 3) == [(0, 1, 1), (1, 1, 1)]
    assert blocks(hyperbolic_plane(), 5) == [(0, 2, square_class(-1, 5).representative)]


@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5, 7]))
def test_jordan_scale_sum_is_disc_valuation(seed, p):
    # odd p splits B/2, p = 2 splits B; both conventions give v_p(det B)
    rng = rng_for(seed)
    L = random_lattice(rng, rng.choice([1, 2, 3, 4]))
    sym = jordan_decompose(L, p)
    assert sym.rank == L.rank
    scales = [b.scale for b in sym.blocks]
    assert scales == sorted(set(scales))
    assert sum(b.scale * b.rank for b in sym.blocks) == valuation(L.discriminant(), p)


@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5, 7]))
def test_local_isometry_basis_invariant(seed, p):
    rng = rng_for(seed)
    L = random_lattice(rng, rng.choice([1, 2, 3, 4]))
    assert local_isometric(L, L.transform(random_unimodular(rng, L.rank)), p)


def test_local_isometric_examples():
    I9, E = identity_lattice(9), direct_sum(e8_lattice(), identity_lattice(1))
    for p in (2, 3, 5, 7, INF):
        assert local_isometric(I9, E, p)
    assert not local_isometric(identity_lattice(2), diagonal_lattice([1, 2]), 2)
    with pytest.raises(ValueError):
        local_isometric(identity_lattice(2), identity_lattice(3), 3)


def test_oracle_examples():
    I3 = identity_lattice(3)
    assert lifting_oracle_embeds(I3, I3, 2) is True
    assert lifting_oracle_embeds(diagonal_lattice([7]), I3, 2) is False
    assert lifting_oracle_embeds(diagonal_lattice([5]), I3, 2) is True
    assert lifting_oracle_embeds(binary_lattice(1, 1, 1), binary_lattice(1, 1, 1), 3) is True
    assert oracle_precision(diagonal_lattice([5]), I3, 2) == 2 * 5 + 3  # v_2(2 * 8 * 10) = 5


def test_oracle_budget_is_inconclusive():
    L1 = random_lattice(rng_for(7), 4)
    res = lifting_oracle_embeds(L1.transform(random_unimodular(rng_for(8), 4)), L1, 2, budget=1)
    assert res is INCONCLUSIVE
    with pytest.raises(TypeError):
        bool(res)


def test_locally_representable_examples():
    I3 = identity_lattice(3)
    for d in (1, 2, 3, 5, 6, 10, 11):
        for p in (3, 5, 7, 11, 13):
            if (2 * d) % p:
                assert locally_representable(diagonal_lattice([d]), I3, p) is True
    assert locally_representable(diagonal_lattice([7]), I3, 2) is False
    assert locally_representable(I3, I3, 2) is True
    assert locally_representable(identity_lattice(4), I3, 3) is False


@pytest.mark.parametrize("seed", [11, 12, 13])
def test_symbols_agree_with_oracle(seed):
    rng = rng_for(seed)
    for _ in range(6):
        L1, L2 = random_pair(rng)
        for p in prime_divisors(2 * L1.discriminant() * L2.discriminant()):
            a, b = lifting_oracle_embeds(L1, L2, p), lifting_oracle_embeds(L2, L1, p)
            assert a is not INCONCLUSIVE and b is not INCONCLUSIVE
            assert (a and b) == local_isometric(L1, L2, p), (L1, L2, p)


def test_representable_at_infinity():
    assert representable_at_infinity(identity_lattice(2), identity_lattice(9))
    assert not representable_at_infinity(identity_lattice(10), identity_lattice(9))
    assert not representable_at_infinity(hyperbolic_plane(), identity_lattice(9))


def test_isotropy_examples():
    assert is_isotropic_local([1, 1], 5)
    assert not is_isotropic_local([1, 1], 3)
    assert not is_isotropic_local([1, 1, 1], INF)
    assert is_isotropic_local([1, -1], INF)
    assert is_isotropic_local([1, 2, 3, 5, 7], 3)
    with pytest.raises(ValueError):
        is_isotropic_local([1, 0, 2], 3)


@given(st.lists(nonzero, min_size=5, max_size=7), st.sampled_from([2, 3, 5, 7]))
def test_five_variables_always_isotropic(ds, p):
    assert is_isotropic_local(ds, p)
    assert isotropic_by_splitting(ds, p)


@given(st.lists(nonzero, min_size=1, max_size=4), nonzero, places)
def test_isotropy_scaling_invariant(ds, c, place):
    assert is_isotropic_local(ds, place) == is_isotropic_local([c * d for d in ds], place)


@given(st.lists(nonzero, min_size=1, max_size=5), places, st.randoms())
def test_hasse_permutation_invariant(ds, place, rnd):
    perm = list(ds)
    rnd.shuffle(perm)
    assert hasse_invariant(ds, place) == hasse_invariant(perm, place)


def test_hasse_examples():
    assert hasse_invariant([1, 1], 2) == 1
    assert hasse_invariant([-1, -1], 2) == -1
    assert hasse_invariant([1, 7], 7) == 1


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_spinor_norm_examples(p):
    full = frozenset(square_class_group(p))
    assert spinor_norm_image([1, 1, 1], p) == full
    assert spinor_norm_image([1, -1], p) == full
    assert spinor_norm_image([1], p) == frozenset([square_class(1, p)])
    with pytest.raises(ValueError):
        spinor_norm_image([1, 1, 1], 2)
