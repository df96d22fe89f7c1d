"""Genus enumeration by Kneser neighbours, isometries, automorphisms, spinor genera.

All searches run the shared backtracking kernel on the pairing matrix
P = S B S^T of a short-vector set S; every matrix that comes back is checked
exactly before it is used.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import csv
import os

import numpy as np

from . import intmat
from ._config import BudgetExceeded, search_budget
from ._kernels import active_backend
from .arith import is_prime, prime_divisors, square_class, smallest_nonresidue
from .lattice import (
    QuadraticLattice,
    lll_reduce,
    minimum,
    norm_histogram,
    read_gram,
    short_vector_norms,
    write_gram,
)
from .local import _echelon_insert, jordan_basis, jordan_decompose, local_isometric

LINE_TABLE_LIMIT = 2_000_000
SAMPLED_LINES = 400
MAX_PAIRING_VECTORS = 8_000  # the pairing matrix is N x N int64

# ------------------------------------------------------------ search helpers


def _pairings(L, S):
    B = L.gram_array()
    if S.shape[0] == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if S.shape[0] > MAX_PAIRING_VECTORS:
        raise BudgetExceeded(f"{S.shape[0]} vectors exceed the pairing limit {MAX_PAIRING_VECTORS}")
    if int(np.abs(S).max()) ** 2 * int(np.abs(B).sum()) >= 2**62:
        raise OverflowError("pairing matrix would overflow int64")
    return S @ B @ S.T


def _search(P, cand_lists, target, stop_after=0, max_store=1, budget=None):
    """Run the backtracking kernel; returns (solutions, count)."""
    m = len(cand_lists)
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64), 1
    off = np.zeros(m + 1, dtype=np.int64)
    for j, c in enumerate(cand_lists):
        off[j + 1] = off[j] + len(c)
    cand = np.concatenate([np.asarray(c, dtype=np.int64) for c in cand_lists]) if off[-1] else np.zeros(0, np.int64)
    budget = search_budget() if budget is None else budget
    sols, nsol, nodes, status = active_backend().backtrack(
        P, cand, off, np.asarray(target, dtype=np.int64), max_store, stop_after, budget
    )
    if status == 2:
        raise BudgetExceeded(f"backtracking exceeded {budget} nodes")
    return sols[: min(nsol, max_store)], int(nsol)


def _vector_index(S):
    return {tuple(int(x) for x in row): i for i, row in enumerate(S)}


def _check_isometry(T, B1, B2):
    TT = intmat.transpose(T)
    if intmat.matmul(TT, intmat.matmul(B1, T)) != [list(r) for r in B2]:
        raise AssertionError("backtracking returned a non-isometry")


# ---------------------------------------------------------------- isometry


def _invariants(L):
    m = minimum(L)
    return (L.rank, L.discriminant(), m, norm_histogram(L, m + 1))


def is_isometric(L1, L2):
    """Integer T with T^T B1 T = B2, or None."""
    if L1.rank != L2.rank:
        raise ValueError("rank mismatch")
    for L in (L1, L2):
        if not L.is_positive_definite():
            raise ValueError("lattices must be positive definite")
    n = L1.rank
    if n == 0:
        return []
    if L1.discriminant() != L2.discriminant() or _invariants(L1) != _invariants(L2):
        return None
    red2, U2 = lll_reduce(L2)
    G2 = red2.gram_list()
    norms = [G2[j][j] // 2 for j in range(n)]
    S, Snorm = short_vector_norms(L1, max(norms))
    P = _pairings(L1, S)
    cands = [np.flatnonzero(Snorm == q) for q in norms]
    order = sorted(range(n), key=lambda j: (len(cands[j]), j))
    target = [[G2[a][b] for b in order] for a in order]
    sols, nsol = _search(P, [cands[j] for j in order], target, stop_after=1)
    if nsol == 0:
        return None
    Tp = [[0] * n for _ in range(n)]
    for k, j in enumerate(order):
        v = S[sols[0][k]]
        for i in range(n):
            Tp[i][j] = int(v[i])
    T = intmat.matmul(Tp, intmat.inverse_unimodular(U2))
    _check_isometry(T, L1.gram_list(), L2.gram_list())
    return T


# ------------------------------------------------------------ automorphisms


@dataclass
class AutomorphismData:
    order: int
    generators: list  # integer matrices in the lattice's own basis
    orbit_sizes: list


def automorphism_group(L, order=None):
    """|O(L)| with generators, by a stabiliser chain over basis images.

    ``order`` is the sequence in which basis vectors are pinned; the group
    order does not depend on it, which makes a second ordering a cheap
    independent check.
    """
    if not L.is_positive_definite():
        raise ValueError("lattice must be positive definite")
    n = L.rank
    if n == 0:
        return AutomorphismData(1, [], [])
    key = ("aut", tuple(order) if order is not None else None)
    if key in L._cache:
        return L._cache[key]
    red, U = lll_reduce(L)
    G = red.gram_list()
    norms = [G[j][j] // 2 for j in range(n)]
    S, Snorm = short_vector_norms(red, max(norms))
    P = _pairings(red, S)
    index = _vector_index(S)
    unit = [index[tuple(int(i == j) for i in range(n))] for j in range(n)]
    by_norm = [np.flatnonzero(Snorm == q) for q in norms]
    if order is None:
        order = sorted(range(n), key=lambda j: (len(by_norm[j]), j))
    order = list(order)
    target = [[G[a][b] for b in order] for a in order]
    St = S.T

    gens_red = []  # (matrix in reduced basis, permutation of S, level)

    def perm_of(g):
        img = (np.array(g, dtype=np.int64) @ St).T
        return np.array([index[tuple(int(x) for x in row)] for row in img], dtype=np.int64)

    def closure(start, perms):
        seen = {int(start)}
        stack = [int(start)]
        while stack:
            x = stack.pop()
            for pm in perms:
                y = int(pm[x])
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    orbit_sizes = [0] * n
    for lvl in range(n - 1, -1, -1):
        col = order[lvl]
        fixed = [unit[order[k]] for k in range(lvl)]
        cand = [c for c in by_norm[col] if all(P[c, fixed[k]] == target[k][lvl] for k in range(lvl))]
        perms = [pm for _, pm, l in gens_red if l >= lvl]
        orbit = closure(unit[col], perms)
        failed = set()
        for c in cand:
            c = int(c)
            if c in orbit or c in failed:
                continue
            lists = [[f] for f in fixed] + [[c]] + [by_norm[order[k]] for k in range(lvl + 1, n)]
            sols, nsol = _search(P, lists, target, stop_after=1)
            if nsol:
                g = [[0] * n for _ in range(n)]
                for k, j in enumerate(order):
                    v = S[sols[0][k]]
                    for i in range(n):
                        g[i][j] = int(v[i])
                _check_isometry(g, G, G)
                pm = perm_of(g)
                gens_red.append((g, pm, lvl))
                perms.append(pm)
                orbit = closure(unit[col], perms)
            else:
                failed |= closure(c, perms)
        orbit_sizes[lvl] = len(orbit)
    total = 1
    for s in orbit_sizes:
        total *= s
    Uinv = intmat.inverse_unimodular(U)
    gens = [intmat.matmul(U, intmat.matmul(g, Uinv)) for g, _, _ in gens_red]
    for g in gens:
        _check_isometry(g, L.gram_list(), L.gram_list())
    data = AutomorphismData(total, gens, orbit_sizes)
    L._cache[key] = data
    return data


def automorphism_order(L):
    return automorphism_group(L).order


# ---------------------------------------------------------------- neighbours


def _canonical_lines(n, p):
    """All vectors of F_p^n whose first nonzero entry is 1, as an int64 array."""
    chunks = []
    for k in range(n):
        free = n - k - 1
        cnt = p**free
        block = np.zeros((cnt, n), dtype=np.int64)
        block[:, k] = 1
        codes = np.arange(cnt, dtype=np.int64)
        for i in range(free):
            block[:, k + 1 + i] = codes % p
            codes //= p
        chunks.append(block)
    return np.concatenate(chunks) if chunks else np.zeros((0, n), dtype=np.int64)


def _line_code(V, p):
    powers = p ** np.arange(V.shape[1], dtype=np.int64)
    return V @ powers


def _normalise_lines(V, p):
    lead_idx = np.argmax(V != 0, axis=1)
    lead = V[np.arange(V.shape[0]), lead_idx]
    inv = np.array([0] + [pow(a, -1, p) for a in range(1, p)], dtype=np.int64)
    return (V * inv[lead][:, None]) % p


def isotropic_lines(L, p, generators=(), seed=0):
    """Isotropic lines of L/pL, one per orbit of the given automorphisms.

    Returns (lines, sampled).  When p^n exceeds LINE_TABLE_LIMIT the lines are
    a seeded random sample instead (sampled = True) and no orbit reduction
    is attempted.
    """
    n = L.rank
    B = L.gram_array()
    if p**n > LINE_TABLE_LIMIT:
        rng = np.random.default_rng(seed)
        found = {}
        tries = 0
        while len(found) < SAMPLED_LINES and tries < 200:
            tries += 1
            V = rng.integers(0, p, size=(4096, n), dtype=np.int64)
            V = V[(V != 0).any(axis=1)]
            V = _normalise_lines(V, p)
            iso = V[(((V @ B) * V).sum(axis=1) // 2) % p == 0]
            for row, code in zip(iso, _line_code(iso, p)):
                found.setdefault(int(code), row)
                if len(found) >= SAMPLED_LINES:
                    break
        lines = np.array([found[c] for c in sorted(found)], dtype=np.int64).reshape(-1, n)
        return lines, True
    V = _canonical_lines(n, p)
    lines = V[(((V @ B) * V).sum(axis=1) // 2) % p == 0]
    if not len(generators) or not len(lines):
        return lines, False
    table = np.full(p**n, -1, dtype=np.int64)
    table[_line_code(lines, p)] = np.arange(len(lines), dtype=np.int64)
    powers = p ** np.arange(n, dtype=np.int64)
    inv = np.array([0] + [pow(a, -1, p) for a in range(1, p)], dtype=np.int64)
    be = active_backend()
    ea, eb = [], []
    for g in generators:
        gm = np.array(g, dtype=np.int64) % p
        img = be.line_images(lines, gm, p, inv, powers, table)
        ea.append(np.arange(len(lines), dtype=np.int64))
        eb.append(np.asarray(img, dtype=np.int64))
    labels = be.orbit_labels(len(lines), np.concatenate(ea), np.concatenate(eb))
    reps = np.unique(labels)
    return lines[reps], False


def neighbor(L, v, p):
    """Kneser p-neighbour of L through the isotropic line spanned by v."""
    n = L.rank
    B = L.gram_list()
    v = [int(x) % p for x in v]
    Bv = [sum(B[i][j] * v[j] for j in range(n)) for i in range(n)]
    q = sum(v[i] * Bv[i] for i in range(n)) // 2
    if q % p:
        raise ValueError("vector is not isotropic mod p")
    j = next(i for i in range(n) if Bv[i] % p)
    # adjust v so that Q(v) = 0 mod p^2
    t = (-(q // p) * pow(Bv[j], -1, p)) % p
    v[j] += p * t
    Bv = [sum(B[i][k] * v[k] for k in range(n)) for i in range(n)]
    assert sum(v[i] * Bv[i] for i in range(n)) // 2 % (p * p) == 0
    a = [x % p for x in Bv]
    ainv = pow(a[j], -1, p)
    gens = []  # generators of p * L_v, with L_v = {x : x^T B v = 0 mod p}
    for i in range(n):
        col = [0] * n
        if i == j:
            col[j] = p * p
        else:
            col[i] = p
            col[j] = -p * ((a[i] * ainv) % p)
        gens.append(col)
    gens.append(v)
    M = intmat.column_basis(intmat.transpose(gens))
    G = intmat.matmul(intmat.transpose(M), intmat.matmul(B, M))
    N = QuadraticLattice([[x // (p * p) for x in row] for row in G])
    return lll_reduce(N)[0]


def _check_valid_prime(L, p):
    if p == 2 or not is_prime(p) or L.discriminant() % p == 0:
        raise ValueError("p must be an odd prime not dividing disc(L)")


def p_neighbors(L, p, orbit_reps=False):
    """Kneser p-neighbours of L, one per isotropic line (or per Aut-orbit)."""
    _check_valid_prime(L, p)
    if L.rank < 2:
        return []
    gens = automorphism_group(L).generators if orbit_reps else ()
    lines, _ = isotropic_lines(L, p, gens)
    out = []
    for v in lines:
        N = neighbor(L, v, p)
        for q in prime_divisors(2 * L.discriminant()):
            assert local_isometric(N, L, q), "neighbour left the genus"
        out.append(N)
    return out


def valid_primes(L, count, start=3):
    out = []
    p = start
    while len(out) < count:
        if is_prime(p) and p != 2 and L.discriminant() % p:
            out.append(p)
        p += 1
    return out


# ------------------------------------------------------------ spinor data


def _bits_at(c):
    return list(c.bits())


def spinor_places(L):
    return prime_divisors(2 * L.discriminant())


def _theta_generators(L, q):
    """Square classes at q whose pairwise products generate theta(O+(L_q))."""
    if q != 2:
        out = set()
        u = smallest_nonresidue(q)
        for b in jordan_decompose(L, q).blocks:
            if b.rank >= 2:
                out.add(square_class(q**b.scale, q))
                out.add(square_class(u * q**b.scale, q))
            else:
                out.add(square_class(Fraction(q) ** b.scale * b.unit_det, q))
        return out
    # p = 2: norms of symmetries of L_2 among short combinations of a Jordan basis
    vecs = []
    for _, _, vs in jordan_basis(L, 2):
        for v in vs:
            den = 1
            for x in v:
                den = den * x.denominator // np.gcd(den, x.denominator)
            vecs.append([int(x * den) for x in v])
    n = L.rank
    B = np.array(L.gram_list(), dtype=object)
    E = np.array(vecs, dtype=object)
    out = set()
    from itertools import combinations, product as iproduct

    for size in (1, 2, 3):
        for support in combinations(range(n), min(size, n)):
            for coeffs in iproduct(range(1, 8), repeat=len(support)):
                v = sum(c * E[s] for c, s in zip(coeffs, support))
                Bv = B.dot(v)
                Q = int(v.dot(Bv)) // 2
                if Q == 0:
                    continue
                g = 0
                for x in Bv:
                    g = np.gcd(g, int(x))
                if _v2(Q) <= _v2(g):
                    out.add(square_class(Q, 2))
        if size >= n:
            break
    return out


def _v2(x):
    x = abs(int(x))
    if x == 0:
        return 10**9
    return (x & -x).bit_length() - 1


def _improper_norm(L, q):
    """Norm class of one symmetry in O(L_q), or None if none was found."""
    if q != 2:
        b = jordan_decompose(L, q).blocks[0]
        return square_class(Fraction(q) ** b.scale * b.unit_det if b.rank == 1 else q**b.scale, q)
    gens = sorted(_theta_generators(L, 2), key=lambda c: c.representative)
    return gens[0] if gens else None


@dataclass
class SpinorData:
    places: list
    subgroup: dict  # echelon basis of the relation subgroup over F_2
    dim: int

    def step(self, p):
        return [b for q in self.places for b in _bits_at(square_class(p, q))]

    def reduce(self, x):
        x = [b % 2 for b in x]
        for lead, w in sorted(self.subgroup.items()):
            if x[lead]:
                x = [(a + b) % 2 for a, b in zip(x, w)]
        return tuple(x)


def spinor_data(L):
    """Relation subgroup: local thetas, positive rationals in S, improper class."""
    places = spinor_places(L)
    sizes = [3 if q == 2 else 2 for q in places]
    dim = sum(sizes)
    ech = {}

    def embed(q, c):
        x = []
        for r, sz in zip(places, sizes):
            x += _bits_at(c) if r == q else [0] * sz
        return x

    for q in places:
        gens = list(_theta_generators(L, q))
        for a in gens:
            for b in gens:
                _echelon_insert(ech, embed(q, a * b), 2)
        _echelon_insert(ech, [b for r in places for b in _bits_at(square_class(q, r))], 2)
    t = []
    for q, sz in zip(places, sizes):
        c = _improper_norm(L, q)
        t += _bits_at(c) if c is not None else [0] * sz
    _echelon_insert(ech, t, 2)
    return SpinorData(places, ech, dim)


# ------------------------------------------------------------------- genus


@dataclass
class GenusRecord:
    classes: list
    aut_orders: list
    mass: Fraction
    spinor_partition: object
    neighbor_primes_used: list
    complete: bool = True
    sampled_primes: list = field(default_factory=list)
    coordinates: object = None  # spinor coordinates per class (bit tuples)
    consistent: bool = True  # neighbour coordinates agreed on every re-discovery


def _class_sort_key(L):
    m = minimum(L)
    return (m, norm_histogram(L, m + 1), L.gram)


def enumerate_genus(L, primes=None, max_classes=500):
    """Classes in the genus of L by neighbour closure at three odd primes."""
    if not L.is_positive_definite():
        raise ValueError("lattice must be positive definite")
    if primes is None:
        primes = valid_primes(L, 3)
    for p in primes:
        _check_valid_prime(L, p)
    red = lll_reduce(L)[0]
    places = spinor_places(L)
    sd = spinor_data(L) if L.rank >= 3 else None
    zero = tuple([0] * (sd.dim if sd else 0))
    classes = [red]
    coords = [zero]
    auts = [automorphism_group(red)]
    sampled = set()
    complete = True
    consistent = True
    queue = [0]
    try:
        while queue:
            i = queue.pop(0)
            C = classes[i]
            if C.rank < 2:
                break
            for p in primes:
                lines, was_sampled = isotropic_lines(C, p, auts[i].generators, seed=p)
                if was_sampled:
                    sampled.add(p)
                step = sd.step(p) if sd else []
                for v in lines:
                    N = neighbor(C, v, p)
                    coord = tuple((a + b) % 2 for a, b in zip(coords[i], step)) if sd else zero
                    key = _invariants(N)
                    match = None
                    for k, K in enumerate(classes):
                        if _invariants(K) == key and is_isometric(K, N) is not None:
                            match = k
                            break
                    if match is not None:
                        if sd and sd.reduce(coords[match]) != sd.reduce(coord):
                            consistent = False
                        continue
                    for q in places:
                        assert local_isometric(N, red, q), "neighbour left the genus"
                    if len(classes) >= max_classes:
                        raise BudgetExceeded("too many classes")
                    classes.append(N)
                    coords.append(coord)
                    auts.append(automorphism_group(N))
                    queue.append(len(classes) - 1)
    except BudgetExceeded:
        complete = False
    order = sorted(range(len(classes)), key=lambda k: _class_sort_key(classes[k]))
    classes = [classes[k] for k in order]
    coords = [coords[k] for k in order]
    aut_orders = [auts[k].order for k in order]
    for K in classes:
        for q in places:
            assert local_isometric(K, red, q)
    rec = GenusRecord(
        classes=classes,
        aut_orders=aut_orders,
        mass=sum((Fraction(1, a) for a in aut_orders), Fraction(0)),
        spinor_partition=None,
        neighbor_primes_used=list(primes),
        complete=complete,
        sampled_primes=sorted(sampled),
        coordinates=coords if sd else None,
        consistent=consistent,
    )
    if sd and complete:
        rec.spinor_partition = spinor_genus_partition(rec)
    return rec


def mass(record):
    if not record.complete:
        raise ValueError("genus record is incomplete")
    return sum((Fraction(1, a) for a in record.aut_orders), Fraction(0))


def _recompute_coordinates(record):
    ref = enumerate_genus(record.classes[0], primes=record.neighbor_primes_used or None)
    sd = spinor_data(record.classes[0])
    coords = []
    for K in record.classes:
        for R, c in zip(ref.classes, ref.coordinates):
            if is_isometric(R, K) is not None:
                coords.append(c)
                break
        else:
            raise ValueError("class not reached by the neighbour walk")
    # re-base so that class 0 sits at the origin
    base = coords[0]
    return [sd.reduce([(a + b) % 2 for a, b in zip(c, base)]) for c in coords]


def spinor_genus_partition(record):
    """Blocks of class indices, one per spinor genus (rank >= 3)."""
    if not record.classes:
        raise ValueError("empty record")
    L = record.classes[0]
    if L.rank < 3:
        raise ValueError("spinor genus partition needs rank >= 3")
    if not record.complete:
        raise ValueError("genus record is incomplete")
    sd = spinor_data(L)
    coords = record.coordinates
    if coords is None or len(coords) != len(record.classes):
        coords = _recompute_coordinates(record)
    blocks = {}
    for i, c in enumerate(coords):
        blocks.setdefault(sd.reduce(c), []).append(i)
    return sorted(blocks.values())


def spinor_block_ids(record):
    ids = [None] * len(record.classes)
    for b, blk in enumerate(record.spinor_partition or []):
        for i in blk:
            ids[i] = b
    return ids


def stability_check(L, record=None, extra=2):
    """Re-run the closure with ``extra`` more primes; True when nothing new appears."""
    record = record or enumerate_genus(L)
    primes = valid_primes(L, len(record.neighbor_primes_used) + extra)
    wider = enumerate_genus(L, primes=primes)
    return len(wider.classes) == len(record.classes), wider


# ------------------------------------------------------------ serialisation


def save_genus(record, path):
    os.makedirs(path, exist_ok=True)
    for i, K in enumerate(record.classes):
        write_gram(K, os.path.join(path, f"class_{i:03d}.gram"))
    ids = spinor_block_ids(record)
    with open(os.path.join(path, "genus.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "aut_order", "minimum", "spinor_block"])
        for i, K in enumerate(record.classes):
            w.writerow([i, record.aut_orders[i], minimum(K), "" if ids[i] is None else ids[i]])
    with open(os.path.join(path, "genus.meta"), "w", newline="\n") as fh:
        fh.write("primes " + " ".join(map(str, record.neighbor_primes_used)) + "\n")
        fh.write("sampled " + " ".join(map(str, record.sampled_primes)) + "\n")
        fh.write(f"complete {int(record.complete)}\n")
        if record.coordinates is not None:
            for c in record.coordinates:
                fh.write("coord " + "".join(map(str, c)) + "\n")


def load_genus(path):
    files = sorted(f for f in os.listdir(path) if f.startswith("class_") and f.endswith(".gram"))
    classes = [read_gram(os.path.join(path, f)) for f in files]
    aut_orders, blocks = [], {}
    with open(os.path.join(path, "genus.csv"), newline="") as fh:
        for row in csv.DictReader(fh):
            aut_orders.append(int(row["aut_order"]))
            if row["spinor_block"] != "":
                blocks.setdefault(int(row["spinor_block"]), []).append(int(row["index"]))
    primes, sampled, complete, coords = [], [], True, []
    meta = os.path.join(path, "genus.meta")
    if os.path.exists(meta):
        with open(meta) as fh:
            for line in fh:
                tag, _, rest = line.strip().partition(" ")
                if tag == "primes":
                    primes = [int(x) for x in rest.split()]
                elif tag == "sampled":
                    sampled = [int(x) for x in rest.split()]
                elif tag == "complete":
                    complete = rest == "1"
                elif tag == "coord":
                    coords.append(tuple(int(ch) for ch in rest))
    return GenusRecord(
        classes=classes,
        aut_orders=aut_orders,
        mass=sum((Fraction(1, a) for a in aut_orders), Fraction(0)),
        spinor_partition=[blocks[k] for k in sorted(blocks)] if blocks else None,
        neighbor_primes_used=primes,
        complete=complete,
        sampled_primes=sampled,
        coordinates=coords or None,
    )
