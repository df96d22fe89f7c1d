"""Desk-scale local-global experiments and their CSV reports."""

from dataclasses import dataclass, field
from fractions import Fraction
import csv
import io

from ._config import INCONCLUSIVE, BudgetExceeded
from .arith import is_prime, is_squarefree, prime_divisors, valuation
from .genus import enumerate_genus, is_isometric
from .lattice import QuadraticLattice, diagonal_lattice, minimum
from .linnik import reduced_forms
from .local import local_places, locally_representable, representable_at_infinity
from .represent import (
    primitive_representation_count,
    primitive_representation_numbers,
    representation_count,
    representation_numbers,
)

GOOD_CODIM = 7


def form_discriminant(Ls):
    """det(B) / 2 for odd rank, det(B) for even rank: d for (d), |b^2 - 4ac| for binaries."""
    D = Ls.discriminant()
    return D // 2 if Ls.rank % 2 else D


def local_test_suite(Ls, L):
    """(verdict, {place: result}) over infinity and every p | 2 disc(L) disc(L')."""
    detail = {"inf": representable_at_infinity(Ls, L)}
    if Ls.rank == 0:
        return True, detail
    for p in local_places(Ls, L):
        detail[p] = locally_representable(Ls, L, p)
    vals = list(detail.values())
    if any(v is False for v in vals):
        return False, detail
    if any(v is INCONCLUSIVE for v in vals):
        return INCONCLUSIVE, detail
    return True, detail


def auxiliary_prime(L):
    """Smallest odd prime not dividing disc(L)."""
    p = 3
    while not is_prime(p) or L.discriminant() % p == 0:
        p += 2
    return p


def good_flags(Ls, L, w=None):
    """(codim >= 7, v_w(disc) <= 1) for the image of Ls in L."""
    w = auxiliary_prime(L) if w is None else w
    codim = L.rank - Ls.rank
    val = valuation(Ls.discriminant(), w) if Ls.rank else 0
    return codim >= GOOD_CODIM, val <= 1


def _spinor_block(record, L):
    blocks = record.spinor_partition or [list(range(len(record.classes)))]
    for i, K in enumerate(record.classes):
        if is_isometric(K, L) is not None:
            return next(b for b in blocks if i in b)
    raise ValueError("lattice not found in its own genus record")


def hsia_check(Ls, record):
    """Index of a class with a primitive representation of Ls, or None (red flag)."""
    if not record.complete:
        raise ValueError("genus record is incomplete")
    if Ls.rank == 0:
        return 0
    base = record.classes[0]
    ok, _ = local_test_suite(Ls, base)
    if ok is not True:
        raise ValueError("Ls is not everywhere locally representable")
    if not is_squarefree(form_discriminant(Ls)):
        raise ValueError("discriminant of Ls is not squarefree")
    for i, K in enumerate(record.classes):
        if primitive_representation_count(Ls, K) > 0:
            return i
    return None


# --------------------------------------------------------------- candidates


def _gram_id(Ls):
    return ";".join(" ".join(str(x) for x in row) for row in Ls.gram)


def candidates(m, bound):
    """Built-in candidate lattices in canonical order (disc, then Gram).

    m = 1: (d) for squarefree d <= bound.  m = 2: reduced binary forms with
    squarefree |b^2 - 4ac| and a <= c <= bound.
    """
    out = []
    if m == 1:
        out = [diagonal_lattice([d]) for d in range(1, bound + 1) if is_squarefree(d)]
    elif m == 2:
        for D in range(3, 4 * bound * bound + 1):
            if D % 4 not in (0, 3) or not is_squarefree(D):
                continue
            for f in reduced_forms(-D):
                if f.c <= bound:
                    out.append(QuadraticLattice([[2 * f.a, f.b], [f.b, 2 * f.c]]))
    else:
        raise ValueError("built-in candidates exist only for m = 1, 2")
    return sorted(out, key=lambda X: (X.discriminant(), X.gram))


# ------------------------------------------------------------------ reports


@dataclass
class ExperimentRow:
    candidate_id: str
    disc: int
    minimum: int
    locally_representable: str
    per_class_counts: tuple
    all_classes_represented: bool
    good_flags: tuple


@dataclass
class ExperimentReport:
    rows: list
    classes: list  # indices of the spinor block that was tested
    exceptions: list = field(default_factory=list)
    threshold: int = 0
    inconclusive: list = field(default_factory=list)
    filtered: int = 0
    red_flags: list = field(default_factory=list)

    FIELDS = (
        "candidate_id",
        "disc",
        "minimum",
        "locally_representable",
        "per_class_counts",
        "all_classes_represented",
        "good_flags",
    )

    def to_csv(self, fh=None):
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.FIELDS)
        for r in self.rows:
            w.writerow(
                [
                    r.candidate_id,
                    r.disc,
                    r.minimum,
                    r.locally_representable,
                    " ".join(map(str, r.per_class_counts)),
                    str(r.all_classes_represented).lower(),
                    "codim:%s val:%s" % tuple(str(x).lower() for x in r.good_flags),
                ]
            )
        return buf.getvalue() if fh is None else None


def _place_summary(detail):
    def fmt(v):
        return "?" if v is INCONCLUSIVE else ("T" if v else "F")

    return " ".join(f"{k}:{fmt(v)}" for k, v in detail.items())


def _passing_candidates(L, cands):
    passed, inconclusive, filtered = [], [], 0
    for X in cands:
        ok, detail = local_test_suite(X, L)
        if ok is True:
            passed.append((X, detail))
        elif ok is INCONCLUSIVE:
            inconclusive.append(_gram_id(X))
        else:
            filtered += 1
    return passed, inconclusive, filtered


def _counter(record, idx, cands, primitive):
    """Per-class count function, vectorised over d for rank-one candidates."""
    if cands and all(X.rank == 1 for X in cands):
        dmax = max(X.gram[0][0] // 2 for X in cands)
        fn = primitive_representation_numbers if primitive else representation_numbers
        tables = {i: fn(record.classes[i], dmax) for i in idx}
        return lambda X, i: tables[i][X.gram[0][0] // 2]
    fn = primitive_representation_count if primitive else representation_count
    return lambda X, i: fn(X, record.classes[i])


def local_global_experiment(L, m, bound, record=None, cands=None):
    if not L.is_positive_definite():
        raise ValueError("lattice must be positive definite")
    record = record or enumerate_genus(L)
    if not record.complete:
        raise ValueError("genus record is incomplete")
    idx = _spinor_block(record, L)
    cands = candidates(m, bound) if cands is None else cands
    passed, inconclusive, filtered = _passing_candidates(L, cands)
    count = _counter(record, idx, [X for X, _ in passed], primitive=True)
    w = auxiliary_prime(L)
    rows, exceptions, red = [], [], []
    for X, detail in passed:
        cid = _gram_id(X)
        try:
            counts = tuple(count(X, i) for i in idx)
        except BudgetExceeded:
            inconclusive.append(cid)
            continue
        allrep = all(c > 0 for c in counts)
        rows.append(ExperimentRow(cid, X.discriminant(), minimum(X), _place_summary(detail), counts, allrep, good_flags(X, L, w)))
        if not allrep:
            exceptions.append(cid)
            # a squarefree candidate missed by the whole spinor block contradicts Hsia
            if is_squarefree(form_discriminant(X)) and not any(counts):
                red.append(cid)
    threshold = max((r.minimum for r in rows if not r.all_classes_represented), default=0)
    return ExperimentReport(rows, idx, exceptions, threshold, inconclusive, filtered, red)


def asymptotic_ratio_report(L, m, bound, record=None, cands=None):
    """Rows (lo, hi, class, n, mean, min, max) of r * g / r~ over dyadic minimum ranges."""
    record = record or enumerate_genus(L)
    if not record.complete:
        raise ValueError("genus record is incomplete")
    idx = _spinor_block(record, L)
    cands = candidates(m, bound) if cands is None else cands
    passed, _, _ = _passing_candidates(L, cands)
    count = _counter(record, idx, [X for X, _ in passed], primitive=False)
    g = sum((Fraction(1, record.aut_orders[i]) for i in idx), Fraction(0))
    buckets = {}
    for X, _ in passed:
        rs = {i: count(X, i) for i in idx}
        rt = sum((Fraction(rs[i], record.aut_orders[i]) for i in idx), Fraction(0))
        if rt == 0:
            continue
        k = minimum(X).bit_length() - 1
        for i in idx:
            buckets.setdefault((k, i), []).append(rs[i] * g / rt)
    table = []
    for (k, i), vals in sorted(buckets.items()):
        mean = sum(vals, Fraction(0)) / len(vals)
        table.append((2**k, 2 ** (k + 1), i, len(vals), mean, min(vals), max(vals)))
    return table
