"""Isometric embeddings L' -> L, representation numbers, weighted counts.

Small cases run the column-by-column backtracking search.  Representation
numbers of a single value d in a large range come from an orthogonal frame:
L is a finite union of cosets of an orthogonal sublattice, and on each coset
the count factors into one-dimensional theta sums that are convolved exactly.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations, product
from math import gamma, gcd, isqrt, lcm, pi, sqrt

import numpy as np

from . import intmat
from .arith import factor, is_squarefree
from .genus import _pairings, _search, mass
from .lattice import QuadraticLattice, lll_reduce, minimum, short_vector_norms, short_vectors

DIRECT_LIMIT = 200_000  # estimated vector count above which frame counting is used
MAX_COSETS = 100_000


@dataclass
class Embedding:
    source: QuadraticLattice
    target: QuadraticLattice
    matrix: list  # n x m, columns are images of the source basis

    def __post_init__(self):
        M = self.matrix
        if intmat.matmul(intmat.transpose(M), intmat.matmul(self.target.gram_list(), M)) != self.source.gram_list() and self.source.rank:
            raise ValueError("matrix does not realise an isometric embedding")


def _check_inputs(Ls, L):
    for X in (Ls, L):
        if X.rank and not X.is_positive_definite():
            raise ValueError("lattices must be positive definite")


def _embedding_search(Ls, L, store):
    n, m = L.rank, Ls.rank
    G = Ls.gram_list()
    norms = [G[j][j] // 2 for j in range(m)]
    order = sorted(range(m), key=lambda j: (-norms[j], j))
    S, Snorm = short_vector_norms(L, max(norms))
    keep = np.isin(Snorm, norms)
    S, Snorm = S[keep], Snorm[keep]
    if not len(S):
        return order, S, np.zeros((0, m), dtype=np.int64), 0
    if m == 1:
        hits = np.flatnonzero(Snorm == norms[0])
        return order, S, hits[:, None], len(hits)
    P = _pairings(L, S)
    cands = [np.flatnonzero(Snorm == norms[j]) for j in order]
    target = [[G[a][b] for b in order] for a in order]
    if store:
        _, total = _search(P, cands, target, max_store=1)
        sols, total = _search(P, cands, target, max_store=max(total, 1))
        return order, S, sols[:total], total
    _, total = _search(P, cands, target, max_store=1)
    return order, S, None, total


def enumerate_embeddings(Ls, L):
    """All isometric embeddings of Ls into L, in a canonical order."""
    _check_inputs(Ls, L)
    n, m = L.rank, Ls.rank
    if m == 0:
        return [Embedding(Ls, L, [[] for _ in range(n)])]
    if m > n:
        return []
    # search on a reduced source basis, then pull back: M = M_red U^-1
    red, U = lll_reduce(Ls)
    Uinv = intmat.inverse_unimodular(U)
    order, S, sols, total = _embedding_search(red, L, store=True)
    out = []
    for sol in sols:
        M = [[0] * m for _ in range(n)]
        for k, j in enumerate(order):
            for i in range(n):
                M[i][j] = int(S[sol[k]][i])
        out.append(Embedding(Ls, L, intmat.matmul(M, Uinv)))
    out.sort(key=lambda e: tuple(tuple(col) for col in intmat.transpose(e.matrix)))
    return out


def elementary_divisor_product(M):
    """Product of the elementary divisors of an n x m integer matrix of rank m."""
    m = len(M[0]) if M and M[0] else 0
    if m == 0:
        return 1
    H, _, r = intmat.column_hermite(intmat.transpose(M))
    if r != m:
        raise ValueError("columns are linearly dependent")
    d = 1
    for i in range(m):
        d *= H[i][i]
    return abs(d)


def is_primitive(e):
    """Is the image of the source saturated in the target?"""
    M = e.matrix if isinstance(e, Embedding) else e
    prim = elementary_divisor_product(M) == 1
    if isinstance(e, Embedding) and e.source.rank and is_squarefree(e.source.discriminant()):
        assert prim, "embedding of a squarefree-discriminant lattice must be primitive"
    return prim


# ----------------------------------------------------------- frame counting


def _shortest_in(L, K):
    """A shortest nonzero vector of the sublattice spanned by columns K."""
    sub = L.transform(K)
    red, U = lll_reduce(sub)
    v = short_vectors(red, minimum(red))[0]
    w = [sum(U[i][j] * int(v[j]) for j in range(len(v))) for i in range(len(U))]
    return [sum(K[i][j] * w[j] for j in range(len(w))) for i in range(len(K))]


def orthogonal_frame(L):
    """Pairwise orthogonal vectors of L, greedily shortest, spanning L over Q."""
    n = L.rank
    B = L.gram_list()
    frame = []
    while len(frame) < n:
        if frame:
            A = [[sum(f[i] * B[i][j] for i in range(n)) for j in range(n)] for f in frame]
            K = intmat.integer_kernel(A, n)
        else:
            K = intmat.identity(n)
        frame.append(_shortest_in(L, K))
    return frame


def _estimated_count(L, d):
    """Volume estimate of #{x : Q(x) <= d}."""
    n = L.rank
    detA = abs(L.discriminant()) / 2.0**n
    return pi ** (n / 2) / gamma(n / 2 + 1) * d ** (n / 2) / sqrt(detA)


def representation_numbers(L, dmax):
    """Exact r_L(d) = #{x in L : Q(x) = d} for 0 <= d <= dmax."""
    if not L.is_positive_definite():
        raise ValueError("lattice must be positive definite")
    key = ("repnum", dmax)
    if key in L._cache:
        return L._cache[key]
    n = L.rank
    if n == 0:
        out = [1] + [0] * dmax
        L._cache[key] = out
        return out
    if _estimated_count(L, dmax) * 4 > 2**62:
        raise OverflowError("counts would overflow int64")
    B = L.gram_list()
    F = orthogonal_frame(L)
    Fcols = intmat.transpose(F)
    H, _, _ = intmat.column_hermite(Fcols)
    diag = [H[i][i] for i in range(n)]
    ncos = reduce(lambda a, b: a * b, diag, 1)
    if ncos > MAX_COSETS:
        raise ValueError(f"frame index {ncos} too large")
    fn = [sum(f[i] * B[i][j] * f[j] for i in range(n) for j in range(n)) for f in F]  # B(f,f)
    # coordinates of each coset representative along the frame, mod 1
    cosets = []
    for x in product(*[range(h) for h in diag]):
        t = []
        for f, nf in zip(F, fn):
            Bxf = sum(x[i] * B[i][j] * f[j] for i in range(n) for j in range(n))
            t.append(Fraction(Bxf, nf) % 1)
        cosets.append(tuple(t))
    scale = 1
    for t in cosets:
        for ti, nf in zip(t, fn):
            q = Fraction(nf, 2)
            scale = lcm(scale, (q * ti * ti).denominator, (2 * q * ti).denominator)
    size = scale * dmax + 1
    series = {}

    def theta1(q, t):
        if (q, t) not in series:
            arr = np.zeros(size, dtype=np.int64)
            kmax = isqrt(int(dmax / q)) + 2
            for k in range(-kmax - 1, kmax + 1):
                v = q * (k + t) ** 2 * scale
                if v <= size - 1:
                    arr[int(v)] += 1
            series[(q, t)] = arr
        return series[(q, t)]

    total = np.zeros(size, dtype=np.int64)
    seen = {}
    for t in cosets:
        key_t = tuple(sorted(zip(fn, t)))
        if key_t not in seen:
            acc = None
            for nf, ti in zip(fn, t):
                s = theta1(Fraction(nf, 2), ti)
                acc = s.copy() if acc is None else np.convolve(acc, s)[:size]
            seen[key_t] = acc
        total += seen[key_t]
    rest = np.delete(total, np.arange(0, size, scale))
    assert not rest.any(), "vectors of non-integral norm"
    out = [int(x) for x in total[::scale]]
    L._cache[key] = out
    return out


def _mobius(n):
    f = factor(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def primitive_representation_numbers(L, dmax):
    """Primitive counts r*_L(d) = sum over g^2 | d of mu(g) r_L(d / g^2)."""
    r = representation_numbers(L, dmax)
    out = [0] * (dmax + 1)
    for d in range(1, dmax + 1):
        s = 0
        g = 1
        while g * g <= d:
            if d % (g * g) == 0:
                s += _mobius(g) * r[d // (g * g)]
            g += 1
        out[d] = s
    return out


def _rank_one_value(Ls):
    return Ls.gram[0][0] // 2


def _use_frame(Ls, L):
    return Ls.rank == 1 and L.rank > 1 and _estimated_count(L, _rank_one_value(Ls)) > DIRECT_LIMIT


def representation_count(Ls, L):
    """Number of isometric embeddings of Ls into L."""
    _check_inputs(Ls, L)
    if Ls.rank == 0:
        return 1
    if Ls.rank > L.rank:
        return 0
    if _use_frame(Ls, L):
        d = _rank_one_value(Ls)
        return representation_numbers(L, d)[d]
    return _embedding_search(lll_reduce(Ls)[0], L, store=False)[3]


def primitive_representation_count(Ls, L):
    """Number of primitive isometric embeddings of Ls into L."""
    _check_inputs(Ls, L)
    if Ls.rank == 0:
        return 1
    if Ls.rank > L.rank:
        return 0
    if is_squarefree(Ls.discriminant()):
        return representation_count(Ls, L)
    if _use_frame(Ls, L):
        d = _rank_one_value(Ls)
        return primitive_representation_numbers(L, d)[d]
    order, S, sols, total = _embedding_search(lll_reduce(Ls)[0], L, store=True)
    if total == 0:
        return 0
    return int(_primitive_mask(S[sols]).sum())


def _primitive_mask(X):
    """Primitivity of a stack of embeddings X[k] (columns = rows of X[k]).

    Saturated iff the m x m minors have gcd 1.  The minors are taken in
    float64, which is exact while |x|^m m! stays below 2^52.
    """
    N, m, n = X.shape
    if m == 1:
        return np.gcd.reduce(X[:, 0, :], axis=1) == 1
    big = int(np.abs(X).max())
    if big**m * np.prod(range(1, m + 1)) >= 2**52:
        return np.array([is_primitive(x.T.tolist()) for x in X], dtype=bool)
    g = np.zeros(N, dtype=np.int64)
    for rows in combinations(range(n), m):
        minor = np.rint(np.linalg.det(X[:, :, rows].astype(float))).astype(np.int64)
        g = np.gcd(g, minor)
    return g == 1


# --------------------------------------------------------- genus-level counts


def represented_by_every_class(Ls, record, spinor_block=0):
    """(all counts positive, per-class primitive counts) over one spinor block."""
    if not record.complete:
        raise ValueError("genus record is incomplete")
    blocks = record.spinor_partition or [list(range(len(record.classes)))]
    idx = blocks[spinor_block]
    if Ls.rank > record.classes[0].rank:
        return False, {i: 0 for i in idx}
    counts = {i: primitive_representation_count(Ls, record.classes[i]) for i in idx}
    return all(c > 0 for c in counts.values()), counts


def weighted_counts(Ls, record, classes=None):
    """(r~, per-class r_i, g) with r~ = sum r_i / |Aut_i| and g the mass."""
    if not record.complete:
        raise ValueError("genus record is incomplete")
    idx = list(range(len(record.classes))) if classes is None else list(classes)
    counts = [representation_count(Ls, record.classes[i]) for i in idx]
    rt = sum((Fraction(r, record.aut_orders[i]) for r, i in zip(counts, idx)), Fraction(0))
    g = sum((Fraction(1, record.aut_orders[i]) for i in idx), Fraction(0))
    if classes is None:
        assert g == mass(record)
    return rt, counts, g
