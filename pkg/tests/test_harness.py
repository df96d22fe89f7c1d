import pytest

from quadlat._config import INCONCLUSIVE
from quadlat.arith import is_squarefree, prime_divisors
from quadlat.genus import enumerate_genus
from quadlat.harness import (
    asymptotic_ratio_report,
    auxiliary_prime,
    candidates,
    form_discriminant,
    good_flags,
    hsia_check,
    local_global_experiment,
    local_test_suite,
)
from quadlat.lattice import QuadraticLattice, binary_lattice, diagonal_lattice, identity_lattice
from quadlat.local import lifting_oracle_embeds, local_places


def test_local_suite_examples():
    I3 = identity_lattice(3)
    assert local_test_suite(diagonal_lattice([5]), I3)[0] is True
    ok, detail = local_test_suite(diagonal_lattice([7]), I3)
    assert ok is False and detail[2] is False
    assert local_test_suite(diagonal_lattice([1]), identity_lattice(9))[0] is True
    assert local_test_suite(QuadraticLattice([]), I3)[0] is True


@pytest.mark.parametrize("L", [identity_lattice(3), identity_lattice(4), binary_lattice(1, 1, 2)])
def test_skipped_primes_really_are_fine(L):
    # away from 2 disc(L) disc(L') the oracle must agree that nothing can fail
    for d in [d for d in range(1, 40) if is_squarefree(d)]:
        X = diagonal_lattice([d])
        for p in (3, 5, 7, 11, 13):
            if p not in local_places(X, L):
                assert lifting_oracle_embeds(X, L, p) is True, (d, p)


def test_form_discriminant():
    assert form_discriminant(diagonal_lattice([6])) == 6
    assert form_discriminant(binary_lattice(1, 1, 2)) == 7


def test_auxiliary_prime_and_flags():
    assert auxiliary_prime(identity_lattice(9)) == 3
    assert auxiliary_prime(diagonal_lattice([3, 5])) == 7
    assert good_flags(diagonal_lattice([9]), identity_lattice(9)) == (True, False)
    assert good_flags(diagonal_lattice([6]), identity_lattice(9)) == (True, True)
    assert good_flags(identity_lattice(3), identity_lattice(9))[0] is False


def test_candidates():
    assert [X.gram[0][0] // 2 for X in candidates(1, 12)] == [1, 2, 3, 5, 6, 7, 10, 11]
    binaries = candidates(2, 3)
    discs = [X.discriminant() for X in binaries]
    assert discs == sorted(discs) and all(is_squarefree(D) for D in discs)
    with pytest.raises(ValueError):
        candidates(3, 5)


def test_hsia_examples(i9_record):
    for d in (1, 2, 3, 5, 6, 7, 10, 11, 13, 14, 15):
        assert hsia_check(diagonal_lattice([d]), i9_record) is not None
    assert hsia_check(QuadraticLattice([]), i9_record) == 0
    rec3 = enumerate_genus(identity_lattice(3))
    with pytest.raises(ValueError):
        hsia_check(diagonal_lattice([7]), rec3)


def test_experiment_i9(i9_record):
    rep = local_global_experiment(identity_lattice(9), 1, 200, record=i9_record)
    again = local_global_experiment(identity_lattice(9), 1, 200, record=i9_record)
    assert rep.to_csv() == again.to_csv()
    assert rep.red_flags == [] and rep.inconclusive == []
    assert rep.classes == [0, 1]
    for row in rep.rows:
        d = row.disc // 2
        if row.all_classes_represented:
            assert all(c >= 1 for c in row.per_class_counts)
            assert hsia_check(diagonal_lattice([d]), i9_record) is not None
    # rows filtered by the local tests never enter the exception set
    listed = {r.candidate_id for r in rep.rows}
    assert set(rep.exceptions) <= listed
    assert all(r.minimum <= rep.threshold for r in rep.rows if not r.all_classes_represented)
    header = rep.to_csv().splitlines()[0]
    assert header == ",".join(rep.FIELDS)


def test_experiment_single_class():
    L = identity_lattice(8)
    rec = enumerate_genus(L)
    rep = local_global_experiment(L, 1, 200, record=rec)
    for row in rep.rows:
        d = row.disc // 2
        assert row.all_classes_represented == (hsia_check(diagonal_lattice([d]), rec) is not None)


def test_experiment_rank_three_flagged(i9_record):
    cands = [identity_lattice(3), diagonal_lattice([1, 1, 2]), diagonal_lattice([1, 2, 3])]
    rep = local_global_experiment(identity_lattice(9), 3, 0, record=i9_record, cands=cands)
    assert rep.rows and all(r.good_flags[0] is False for r in rep.rows)


def test_experiment_rejects_bad_input():
    with pytest.raises(ValueError):
        local_global_experiment(QuadraticLattice([[0, 1], [1, 0]]), 1, 10)


def test_ratio_report():
    L = identity_lattice(3)
    table = asymptotic_ratio_report(L, 1, 100)
    assert table and all(row[4] == 1 and row[5] == 1 == row[6] for row in table)
    assert asymptotic_ratio_report(L, 1, 100, cands=[]) == []


def test_inconclusive_marker_is_distinct():
    assert INCONCLUSIVE is not False and INCONCLUSIVE is not True
