"""Local analysis over Q_p and R.

Jordan symbols at odd p describe the bilinear form B/2 (its Gram is p-integral
for odd p).  At p = 2 they describe B itself, the integral doubled Gram; the
scales there are therefore those of B/2 shifted up by one and
sum(scale * rank) = v_2(disc) in both cases.

The lifting oracle is a Hensel-certified search over p-adic digits and is used
as ground truth for the symbol calculations.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, islice, product
from math import gcd
from functools import lru_cache

from . import intmat
from ._config import INCONCLUSIVE, search_budget
from .arith import (
    INF,
    SquareClass,
    hilbert_symbol,
    square_class,
    square_class_group,
    valuation,
)

# ------------------------------------------------------------ diagonal forms


def rational_diagonal(L):
    """Diagonal entries d_i with Q equivalent over Q to sum d_i x_i^2."""
    n = L.rank
    A = [[Fraction(x, 2) for x in row] for row in L.gram]
    out = []
    for k in range(n):
        if A[k][k] == 0:
            j = next((j for j in range(k + 1, n) if A[j][j] != 0), None)
            if j is not None:
                A[k], A[j] = A[j], A[k]
                for row in A:
                    row[k], row[j] = row[j], row[k]
            else:
                j = next((j for j in range(k + 1, n) if A[k][j] != 0), None)
                if j is None:
                    raise ValueError("degenerate form")
                # e_k <- e_k + e_j makes the pivot 2 A_kj != 0
                for row in A:
                    row[k] += row[j]
                A[k] = [a + b for a, b in zip(A[k], A[j])]
        piv = A[k][k]
        out.append(piv)
        for i in range(k + 1, n):
            f = A[i][k] / piv
            if f:
                for j in range(k, n):
                    A[i][j] -= f * A[k][j]
        for j in range(k + 1, n):
            A[k][j] = Fraction(0)
    return out


def signature(L):
    ds = rational_diagonal(L)
    return sum(1 for d in ds if d > 0), sum(1 for d in ds if d < 0)


def hasse_invariant(ds, place):
    """Product of Hilbert symbols (d_i, d_j) over i < j."""
    ds = [Fraction(d) for d in ds]
    s = 1
    for i in range(len(ds)):
        for j in range(i + 1, len(ds)):
            s *= hilbert_symbol(ds[i], ds[j], place)
    return s


def _prod(ds):
    out = Fraction(1)
    for d in ds:
        out *= d
    return out


def _isotropic_small(ds, place):
    k = len(ds)
    d = _prod(ds)
    if k == 1:
        return False
    if k == 2:
        return square_class(-d, place).is_square()
    eps = hasse_invariant(ds, place)
    if k == 3:
        return hilbert_symbol(-1, -d, place) == eps
    # k == 4
    if not square_class(d, place).is_square():
        return True
    return eps == hilbert_symbol(-1, -1, place)


def is_isotropic_local(ds, place):
    """Does sum d_i x_i^2 have a nontrivial zero over the completion?"""
    ds = [Fraction(d) for d in ds]
    if any(d == 0 for d in ds):
        raise ValueError("diagonal entries must be nonzero")
    if place == INF:
        return any(d > 0 for d in ds) and any(d < 0 for d in ds)
    if len(ds) >= 5:
        return True
    return _isotropic_small(ds, place)


def represents_class(ds, c, place):
    """Does the (nondegenerate) form represent the class of c over Q_v?"""
    return is_isotropic_local(list(ds) + [-Fraction(c)], place)


def isotropic_by_splitting(ds, place):
    """Criteria-only isotropy test for any dimension (used to check dim >= 5).

    Write f = g + h with dim g = 2: f is isotropic iff g or h is, or some
    square class is represented by both g and -h.
    """
    ds = [Fraction(d) for d in ds]
    if len(ds) <= 4:
        return _isotropic_small(ds, place) if place != INF else is_isotropic_local(ds, place)
    g, h = ds[:2], ds[2:]
    if _isotropic_small(g, place) or isotropic_by_splitting(h, place):
        return True
    neg_h = [-x for x in h]
    for c in square_class_group(place):
        r = c.representative
        if _isotropic_small(g + [-Fraction(r)], place) and isotropic_by_splitting(neg_h + [-Fraction(r)], place):
            return True
    return False


def _subgroup_generated(gens, place):
    group = {square_class(1, place)}
    frontier = list(group)
    gens = list(gens)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = a * g
                if b not in group:
                    group.add(b)
                    nxt.append(b)
        frontier = nxt
    return frozenset(group)


def spinor_norm_image(ds, p):
    """Spinor norms of SO of the diagonal form over Q_p (p odd).

    Generated by q(v) q(v') over pairs of represented square classes.
    """
    if p == 2 or p == INF:
        raise ValueError("spinor_norm_image expects an odd prime")
    ds = [Fraction(d) for d in ds]
    rep = [c for c in square_class_group(p) if represents_class(ds, c.representative, p)]
    return _subgroup_generated([a * b for a in rep for b in rep], p)


def represented_classes(ds, place):
    return [c for c in square_class_group(place) if represents_class(ds, c.representative, place)]


# ----------------------------------------------------------- Jordan symbols


@dataclass(frozen=True)
class JordanBlock:
    scale: int
    rank: int
    unit_det_class: SquareClass
    parity: object = None  # "even"/"odd" at p = 2
    oddity: object = None  # int mod 8 at p = 2
    unit_det: object = None  # exact unit determinant (Fraction), informational


@dataclass(frozen=True)
class JordanSymbol:
    prime: int
    blocks: tuple

    @property
    def rank(self):
        return sum(b.rank for b in self.blocks)

    def key(self):
        """Comparable data: complete invariant for odd p."""
        return tuple((b.scale, b.rank, b.unit_det_class.representative, b.parity, b.oddity) for b in self.blocks)


def _vp(x, p):
    return valuation(x, p, allow_zero=True)


def _split_pivots(A, p, with_basis=False):
    """Block-diagonalise A over Z_(p) by minimal-valuation pivots.

    Returns a list of (valuation, block) with blocks 1x1 or (p = 2) 2x2; with
    ``with_basis`` each entry also carries the basis vectors (Fraction columns,
    denominators prime to p) spanning that block.
    """
    A = [[Fraction(x) for x in row] for row in A]
    n = len(A)
    E = [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]  # E[c] = basis vector c
    idx = list(range(n))
    out = []
    while idx:
        best = None
        for a in idx:
            for b in idx:
                if b < a or A[a][b] == 0:
                    continue
                v = _vp(A[a][b], p)
                key = (v, a != b)
                if best is None or key < best[0]:
                    best = (key, a, b)
        if best is None:
            raise ValueError("degenerate form")
        (v, offdiag), a, b = best
        if offdiag and p != 2:
            # e_a <- e_a + e_b gives a diagonal entry of the same valuation
            for row in A:
                row[a] += row[b]
            A[a] = [x + y for x, y in zip(A[a], A[b])]
            E[a] = [x + y for x, y in zip(E[a], E[b])]
            offdiag = False
        rest = [c for c in idx if c != a and (not offdiag or c != b)]
        if not offdiag:
            piv = A[a][a]
            for c in rest:
                f = A[c][a] / piv
                if f:
                    for d in rest:
                        A[c][d] -= f * A[a][d]
                    E[c] = [x - f * y for x, y in zip(E[c], E[a])]
            for c in rest:
                A[c][a] = A[a][c] = Fraction(0)
            out.append((v, [[piv]], [E[a]]))
        else:
            P = [[A[a][a], A[a][b]], [A[b][a], A[b][b]]]
            det = P[0][0] * P[1][1] - P[0][1] * P[1][0]
            Pinv = [[P[1][1] / det, -P[0][1] / det], [-P[1][0] / det, P[0][0] / det]]
            C = {c: (A[c][a], A[c][b]) for c in rest}
            for c in rest:
                x = (C[c][0] * Pinv[0][0] + C[c][1] * Pinv[1][0], C[c][0] * Pinv[0][1] + C[c][1] * Pinv[1][1])
                for d in rest:
                    A[c][d] -= x[0] * C[d][0] + x[1] * C[d][1]
                E[c] = [z - x[0] * ya - x[1] * yb for z, ya, yb in zip(E[c], E[a], E[b])]
            for c in rest:
                A[c][a] = A[a][c] = A[c][b] = A[b][c] = Fraction(0)
            out.append((v, P, [E[a], E[b]]))
        idx = rest
    if with_basis:
        return out
    return [(v, blk) for v, blk, _ in out]


def jordan_basis(L, p):
    """[(scale, block Gram, basis vectors)] of a Jordan splitting at p.

    Gram and scales follow the same convention as ``jordan_decompose``.
    """
    G = L.gram if p == 2 else [[Fraction(x, 2) for x in row] for row in L.gram]
    return _split_pivots(G, p, with_basis=True)


def jordan_decompose(L, p):
    """Jordan splitting of L tensor Z_p (see module docstring for scales)."""
    p = int(p)
    if p == 2:
        pieces = _split_pivots(L.gram, 2)
    else:
        pieces = _split_pivots([[Fraction(x, 2) for x in row] for row in L.gram], p)
    by_scale = {}
    for v, blk in pieces:
        by_scale.setdefault(v, []).append(blk)
    blocks = []
    for s in sorted(by_scale):
        blks = by_scale[s]
        rank = sum(len(b) for b in blks)
        unit = Fraction(1)
        for b in blks:
            d = b[0][0] if len(b) == 1 else b[0][0] * b[1][1] - b[0][1] * b[1][0]
            unit *= d / Fraction(p) ** (s * len(b))
        if p == 2:
            odd = [b[0][0] / Fraction(2) ** s for b in blks if len(b) == 1]
            parity = "odd" if odd else "even"
            oddity = sum(u.numerator * u.denominator for u in odd) % 8
            blocks.append(JordanBlock(s, rank, square_class(unit, 2), parity, oddity, unit))
        else:
            blocks.append(JordanBlock(s, rank, square_class(unit, p), None, None, unit))
    return JordanSymbol(p, tuple(blocks))


def canonical_2adic_symbol(sym):
    """Conway-Sloane canonical form (oddity fusion, then sign walking)."""
    comps = []
    for b in sym.blocks:
        u = b.unit_det
        u8 = (u.numerator * u.denominator) % 8
        eps = 1 if u8 in (1, 7) else -1
        comps.append([b.scale, b.rank, eps, 1 if b.parity == "odd" else 0, b.oddity if b.parity == "odd" else 0])
    r = len(comps)
    # compartments: maximal runs of odd components with consecutive scales
    compartments = []
    i = 0
    while i < r:
        if comps[i][3]:
            c = [i]
            while i + 1 < r and comps[i + 1][3] and comps[i + 1][0] == comps[i][0] + 1:
                i += 1
                c.append(i)
            compartments.append(c)
        i += 1
    for c in compartments:
        tot = sum(comps[j][4] for j in c) % 8
        for j in c:
            comps[j][4] = 0
        comps[c[0]][4] = tot
    # trains: adjacent components are joined when the scales step by 1 and one
    # of them is odd, or step by 2 (an empty even scale between) and both are odd
    trains = [[0]] if r else []
    for i in range(1, r):
        gap = comps[i][0] - comps[i - 1][0]
        odd_any = comps[i][3] or comps[i - 1][3]
        odd_both = comps[i][3] and comps[i - 1][3]
        if (gap == 1 and odd_any) or (gap == 2 and odd_both):
            trains[-1].append(i)
        else:
            trains.append([i])
    for t in trains:
        for i in reversed(t[1:]):
            if comps[i][2] == -1:
                comps[i][2] = 1
                comps[i - 1][2] *= -1
                for c in compartments:
                    if i - 1 in c or i in c:
                        comps[c[0]][4] = (comps[c[0]][4] + 4) % 8
    return tuple(tuple(c) for c in comps)


def local_isometric(L1, L2, p):
    """Are L1 and L2 isometric over Z_p (or over R for p = INF)?"""
    if L1.rank != L2.rank:
        raise ValueError("rank mismatch")
    if p == INF:
        return signature(L1) == signature(L2)
    p = int(p)
    if not square_class(L1.discriminant(), p) == square_class(L2.discriminant(), p):
        return False
    if valuation(L1.discriminant(), p) != valuation(L2.discriminant(), p):
        return False
    s1, s2 = jordan_decompose(L1, p), jordan_decompose(L2, p)
    if p != 2:
        return s1.key() == s2.key()
    return canonical_2adic_symbol(s1) == canonical_2adic_symbol(s2)


# ----------------------------------------------------------- lifting oracle


def oracle_precision(Lsub, L, p):
    """k = 2 v_p(2 disc(L) disc(L')) + 3."""
    return 2 * valuation(2 * L.discriminant() * Lsub.discriminant(), p) + 3


def _solve_mod_p(A, b, p):
    """Solve A y = b over F_p.  Returns (particular, kernel basis) or None."""
    rows = len(A)
    cols = len(A[0]) if A else 0
    M = [[x % p for x in A[i]] + [b[i] % p] for i in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = pow(M[r][c], -1, p)
        M[r] = [(x * inv) % p for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [(x - f * y) % p for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if M[i][cols] % p:
            return None
    part = [0] * cols
    for i, c in enumerate(pivots):
        part[c] = M[i][cols]
    free = [c for c in range(cols) if c not in pivots]
    kernel = []
    for f in free:
        v = [0] * cols
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = (-M[i][f]) % p
        kernel.append(v)
    return part, kernel


def _echelon_insert(basis, v, p):
    """Reduce v against an echelon basis (dict lead -> vector); insert if new."""
    v = [x % p for x in v]
    for lead, w in basis.items():
        if v[lead]:
            f = v[lead]
            v = [(x - f * y) % p for x, y in zip(v, w)]
    lead = next((i for i, x in enumerate(v) if x), None)
    if lead is None:
        return False
    inv = pow(v[lead], -1, p)
    v = [(x * inv) % p for x in v]
    for k, w in list(basis.items()):
        if w[lead]:
            f = w[lead]
            basis[k] = [(x - f * y) % p for x, y in zip(w, v)]
    basis[lead] = v
    return True


def _elementary_valuations(J, p, prec):
    """Valuations (< prec) of the elementary divisors of J over Z_p."""
    P = p**prec
    A = [[x % P for x in row] for row in J]
    vals = []
    shift = 0
    while A and A[0] and shift < prec:
        piv = None
        for i, row in enumerate(A):
            for j, x in enumerate(row):
                if x % p:
                    piv = (i, j)
                    break
            if piv is not None:
                break
        if piv is None:
            # every entry is divisible by p: pull out one factor
            if not any(x for row in A for x in row):
                break
            P //= p
            A = [[x // p for x in row] for row in A]
            shift += 1
            continue
        i, j = piv
        prow = A[i]
        inv = pow(prow[j], -1, P)
        newA = []
        for k, row in enumerate(A):
            if k == i:
                continue
            f = row[j] * inv % P
            if f:
                newA.append([(x - f * y) % P for c, (x, y) in enumerate(zip(row, prow)) if c != j])
            else:
                newA.append([x for c, x in enumerate(row) if c != j])
        A = newA
        vals.append(shift)
    return vals


def _divided_directions(vectors, p, prec, emax):
    """Vectors u mod p with p^e u in the Z_p-span of ``vectors``, e <= emax."""
    P = p**prec
    cols = [[x % P for x in v] for v in vectors]
    cols = [c for c in cols if any(c)]
    out = []
    while cols:
        best = None
        for ci, c in enumerate(cols):
            for r, x in enumerate(c):
                if x:
                    v = 0
                    while x % p == 0:
                        x //= p
                        v += 1
                    if best is None or v < best[0]:
                        best = (v, ci, r)
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        e, ci, r = best
        if e > emax:
            break
        piv = cols.pop(ci)
        pe = p**e
        inv = pow(piv[r] // pe, -1, P)
        out.append([(x // pe) % p for x in piv])
        rest = []
        for c in cols:
            f = (c[r] // pe) * inv % P
            c2 = [(x - f * y) % P for x, y in zip(c, piv)] if f else c
            if any(c2):
                rest.append(c2)
        cols = rest
    return out


@lru_cache(maxsize=256)
def _so_basis(gram):
    """Z-basis of {A : A^T B + B A = 0} as flattened n x n matrices."""
    n = len(gram)
    eqs = []
    for i in range(n):
        for j in range(i, n):
            row = [0] * (n * n)
            for k in range(n):
                row[k * n + i] += gram[k][j]  # (A^T B)_ij = sum_k A_ki B_kj
                row[k * n + j] += gram[i][k]  # (B A)_ij = sum_k B_ik A_kj
            eqs.append(row)
    K = intmat.integer_kernel(eqs, n * n)
    return tuple(tuple(K[r][c] for r in range(n * n)) for c in range(len(K[0]) if K else 0))


class _Budget(Exception):
    pass


def _hnf_key(S):
    H, _, r = intmat.column_hermite(S)
    return tuple(tuple(row[:r]) for row in H)


def _overlattices(Bs, p):
    """Integral overlattices of (Z^m, Bs) of p-power index, as Gram matrices.

    Q must stay integral on the overlattice (Q = x^T B x / 2).
    """
    m = len(Bs)
    mod = 2 * p * p
    seen = {(0, _hnf_key(intmat.identity(m)))}
    out = [Bs]
    queue = [(0, intmat.identity(m), Bs)]
    while queue:
        a, S, G = queue.pop()
        sol = _solve_mod_p(G, [0] * m, p)
        kernel = sol[1] if sol else []
        for coeffs in product(range(p), repeat=len(kernel)):
            v = [0] * m
            for c, w in zip(coeffs, kernel):
                v = [x + c * y for x, y in zip(v, w)]
            lead = next((x for x in v if x % p), None)
            if lead is None or lead % p != 1:
                continue  # zero, or not the normalised point of its line
            if sum(v[i] * G[i][j] * v[j] for i in range(m) for j in range(m)) % mod:
                continue
            W = intmat.column_basis([[p * int(i == j) for j in range(m)] + [v[i]] for i in range(m)])
            G2 = intmat.matmul(intmat.transpose(W), intmat.matmul(G, W))
            G2 = [[x // (p * p) for x in row] for row in G2]
            S2 = intmat.matmul(S, W)  # columns of p^(a+1) * new basis in original coordinates
            key = (a + 1, _hnf_key(S2))
            if key in seen:
                continue
            seen.add(key)
            out.append(G2)
            queue.append((a + 1, S2, G2))
    return out


def _fval(x, p):
    return _vp(x.numerator, p) - _vp(x.denominator, p)


def _block_basis(G, p):
    Gb, scales = _block_basis_cached(tuple(map(tuple, G)), p)
    return [list(r) for r in Gb], list(scales)


@lru_cache(maxsize=256)
def _block_basis_cached(G, p):
    """(Gb, scales): Gb = P^t G P block diagonal for an integer P with det prime to p.

    Blocks are 1 x 1, or 2 x 2 with a dominant off-diagonal entry at p = 2;
    scales[i] is the valuation of the block holding row i.  The splitting is
    done over Q with p-integral steps and P is then scaled by the common
    denominator, a p-adic unit, so Gb is exactly isometric to G over Z_p.
    """
    n = len(G)
    P = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def gram():
        GP = [[sum(G[k][l] * P[l][b] for l in range(n)) for b in range(n)] for k in range(n)]
        return [[sum(P[k][a] * GP[k][b] for k in range(n)) for b in range(n)] for a in range(n)]

    rem, scales, blocks = list(range(n)), [0] * n, []
    while rem:
        M = gram()
        entries = [(_fval(M[a][b], p), a, b) for a in rem for b in rem if M[a][b]]
        v = min(e[0] for e in entries)
        diag = [a for a in rem if M[a][a] and _fval(M[a][a], p) == v]
        if diag:
            block = [diag[0]]
        else:
            _, a, b = next(e for e in entries if e[0] == v)
            if p == 2:
                block = [a, b]
            else:
                # e_a + e_b has Q of valuation v when only B(e_a, e_b) does
                for k in range(n):
                    P[k][a] += P[k][b]
                M = gram()
                block = [a]
        others = [r for r in rem if r not in block]
        if len(block) == 1:
            inv = [[1 / M[block[0]][block[0]]]]
        else:
            (x, y), (_, z) = [[M[i][j] for j in block] for i in block]
            d = x * z - y * y
            inv = [[z / d, -y / d], [-y / d, x / d]]
        for r in others:
            f = [sum(inv[i][j] * M[block[j]][r] for j in range(len(block))) for i in range(len(block))]
            for k in range(n):
                P[k][r] -= sum(f[i] * P[k][block[i]] for i in range(len(block)))
        for a in block:
            scales[a] = v
        blocks.append(block)
        rem = others
    D = 1
    for row in P:
        for x in row:
            D = D * x.denominator // gcd(D, x.denominator)
    Pi = [[int(x * D) for x in row] for row in P]
    Gb = intmat.matmul(intmat.transpose(Pi), intmat.matmul([list(r) for r in G], Pi))
    home = {i: k for k, blk in enumerate(blocks) for i in blk}
    for i in range(n):
        for j in range(n):
            assert (Gb[i][j] == 0) if home[i] != home[j] else Gb[i][j] % p ** scales[i] == 0
    assert intmat.det(Pi) % p, "basis change must be invertible over Z_p"
    return tuple(map(tuple, Gb)), tuple(scales)


def _subspaces(R, p):
    """Every subspace of span(R) over F_p (R independent), as lists of vectors."""
    r = len(R)
    out = []
    for d in range(r + 1):
        for piv in combinations(range(r), d):
            slots = [(i, c) for i in range(d) for c in range(piv[i] + 1, r) if c not in piv]
            for vals in product(range(p), repeat=len(slots)):
                E = [[int(c == piv[i]) for c in range(r)] for i in range(d)]
                for (i, c), x in zip(slots, vals):
                    E[i][c] = x
                out.append([[sum(e[k] * R[k][t] for k in range(r)) % p for t in range(len(R[0]))] for e in E])
    return out


def _adapted_source(Gs, K, p):
    """V^t Gs V for an integer V, invertible mod p, whose last columns span K."""
    m = len(Gs)
    ech = {}
    for v in K:
        _echelon_insert(ech, v, p)
    comp = []
    for k in range(m):
        e = [int(i == k) for i in range(m)]
        if _echelon_insert(ech, e, p):
            comp.append(e)
    cols = comp + [list(v) for v in K]
    V = [[cols[c][i] for c in range(m)] for i in range(m)]
    return intmat.matmul(intmat.transpose(V), intmat.matmul([list(r) for r in Gs], V))


def _primitive_search(G, sc, Gs, p, depth, halve, state, kernel_dim=None):
    """DFS for a primitive Z_p-embedding of (Gs) into the block-diagonal (G).

    Row i gets its first p-adic digit at level sc[i]: a node at level j knows
    row i modulo p^(j - sc[i]), which is all that the equations mod p^j see.
    Older digits enter each lift linearly and are solved for; first digits
    enter quadratically and are enumerated column by column.  A branch
    succeeds once the Jacobian certifies a Hensel lift.  With kernel_dim = d
    (odd p) the level-0 rows are determined up to O(G) by their kernel, taken
    to be the span of the last d source columns, so one representative is
    searched.
    """
    n, m = len(G), len(Gs)
    extra = p == 2 and not halve
    pairs = [(a, b) for a in range(m) for b in range(a, m)]
    soB = _so_basis(tuple(map(tuple, G)))
    soBs = _so_basis(tuple(map(tuple, Gs)))
    top = max(sc)
    v2 = 1 if p == 2 else 0

    def tick():
        state[0] += 1
        if state[0] > state[1]:
            raise _Budget

    def values(T, prs=pairs):
        GT = [[sum(G[i][l] * t[l] for l in range(n)) for i in range(n)] for t in T]
        out = []
        for a, b in prs:
            s = sum(x * y for x, y in zip(T[a], GT[b]))
            if a != b:
                out.append(s - Gs[a][b])
            else:
                out.append((s - Gs[a][a]) // 2 if halve else s - Gs[a][a])
        return out, GT

    def jacobian(GT):
        rows = []
        for a, b in pairs:
            row = [0] * (n * m)
            if a == b:
                f = 1 if halve else 2
                for i in range(n):
                    row[a * n + i] = f * GT[a][i]
            else:
                for i in range(n):
                    row[a * n + i] += GT[b][i]
                    row[b * n + i] += GT[a][i]
            rows.append(row)
        return rows

    def system(T, j, cols):
        """Lift equations among the columns ``cols`` (sorted), in their old digits."""
        pj = p**j
        prs = [(a, b) for x, a in enumerate(cols) for b in cols[x:]]
        vals, GT = values(T, prs)
        old = [(c, i) for c in cols for i in range(n) if sc[i] < j]
        idx = {x: k for k, x in enumerate(old)}
        A, rhs = [], []
        for (a, b), v in zip(prs, vals):
            row = [0] * len(old)
            if a != b:
                if v % pj:
                    return None
                for i in range(n):
                    if sc[i] < j:
                        q = p ** sc[i]
                        row[idx[(a, i)]] += GT[b][i] // q
                        row[idx[(b, i)]] += GT[a][i] // q
                rhs.append((-v // pj) % p)
            else:
                mod = 2 * pj if extra else pj
                if v % mod:
                    return None
                for i in range(n):
                    if sc[i] < j:
                        # (x + 2y)^2 = x^2 + 4y(x + y): the y^2 term is linear mod 8
                        x = GT[a][i] + (G[i][i] if extra and j == 1 and sc[i] == 0 else 0)
                        row[idx[(a, i)]] = x // p ** sc[i]
                rhs.append((-v // mod) % p)
            A.append(row)
        return A, rhs

    def solvable(T, j, cols):
        S = system(T, j, cols)
        return S is not None and _solve_mod_p(*S, p) is not None

    def directions(T, j):
        """Orbit directions of O(G) x O(Gs) at level j, as digit vectors (c, i)."""
        left, right = [], []
        for A in soB:
            left.append([p ** sc[i] * sum(A[i * n + l] * T[c][l] for l in range(n)) for c in range(m) for i in range(n)])
        for A in soBs:
            right.append([p ** sc[i] * sum(T[d][i] * A[d * m + c] for d in range(m)) for c in range(m) for i in range(n)])
        # a move (A X) / p^e is realised mod p^(j+1) by a Cayley transform
        # when j is large enough; X is T with row i scaled by p^sc[i]
        out = []
        for dirs, emax in ((left, j - 1 - v2), (right, j - 1 - v2), (left + right, (j - 1 - v2) // 2)):
            out += _divided_directions(dirs, p, j, emax)
        return out

    def children(T, j):
        N = [i for i in range(n) if sc[i] == j]
        nN = len(N)
        order = [(c, i) for c in range(m) for i in N] + [(c, i) for c in range(m) for i in range(n) if sc[i] < j]
        W = {}
        if j >= 1 + v2:
            for u in directions(T, j):
                _echelon_insert(W, [u[c * n + i] for c, i in order], p)
        pinned = {lead for lead in W if lead < nN * m}
        WO = {lead - nN * m: w[nN * m :] for lead, w in W.items() if lead >= nN * m}
        witt = kernel_dim is not None and j == 0

        # columns already divisible by p carry the constraints: fill them first
        corder = list(range(m)) if j == 0 else sorted(range(m), key=lambda c: sum(x % p != 0 for x in T[c]))

        def fill(k, T, ech):
            if k == m:
                if j == top and len(_rank_basis([t for t in T], p)) < m:
                    return  # not primitive
                yield T
                return
            c = corder[k]
            if witt and c >= m - kernel_dim:
                free = []
            else:
                free = [k for k in range(nN) if c * nN + k not in pinned]
            for digits in product(range(p), repeat=len(free)):
                tick()
                col = list(T[c])
                for q, x in zip(free, digits):
                    col[N[q]] = x
                T2 = T[:c] + [col] + T[c + 1 :]
                e2 = ech
                if witt and c < m - kernel_dim:
                    e2 = dict(ech)
                    if not _echelon_insert(e2, [col[i] for i in N], p):
                        continue
                if not solvable(T2, j, sorted(corder[: k + 1])):
                    continue
                if j == 0 and not forward_ok(T2, c, N):
                    continue
                yield from fill(k + 1, T2, e2)
                if witt:
                    # any other choice has the same Gram and kernel so far,
                    # hence is an O(G)-image of this one (Witt)
                    return

        pj = p**j
        for T2 in (fill(0, T, {}) if nN else [T]):
            S = system(T2, j, list(range(m)))
            sol = None if S is None else _solve_mod_p(*S, p)
            if sol is None:
                continue
            part, kernel = sol
            ech = dict(WO)
            comp = [v for v in kernel if _echelon_insert(ech, v, p)]
            if p ** len(comp) > state[1]:
                raise _Budget
            olds = order[nN * m :]
            for coeffs in product(range(p), repeat=len(comp)):
                y = list(part)
                for a, v in zip(coeffs, comp):
                    if a:
                        y = [(x + a * z) % p for x, z in zip(y, v)]
                T3 = [list(t) for t in T2]
                for (c, i), x in zip(olds, y):
                    T3[c][i] += x * pj // p ** sc[i]
                yield T3

    def forward_ok(T, c, N):
        """Each later column keeps a solution of its linear equations mod p."""
        GT = [[sum(G[i][l] * T[a][l] for l in range(n)) for i in N] for a in range(c + 1)]
        return all(_solve_mod_p(GT, [Gs[a][d] for a in range(c + 1)], p) is not None for d in range(c + 1, m))

    def visit(T, j):
        tick()
        if j:
            vals, GT = values(T)
            ev = _elementary_valuations(jacobian(GT), p, j)
            # Newton with a right inverse of J: its entries lose at most
            # max(ev) digits, so F = 0 mod p^j lifts once j > 2 max(ev)
            if len(ev) == len(pairs) and j > 2 * max(ev, default=0):
                return True
        if j >= depth:
            return False
        kids = children(T, j)
        if kernel_dim is not None and j == 0:
            kids = islice(kids, 1)
        for T2 in kids:
            if visit(T2, j + 1):
                return True
        return False

    return visit([[0] * n for _ in range(m)], 0)


def _rank_basis(vectors, p):
    ech = {}
    for v in vectors:
        _echelon_insert(ech, v, p)
    return ech


def lifting_oracle_embeds(Lsub, L, p, budget=None, precision=None):
    """Does Lsub tensor Z_p embed isometrically in L tensor Z_p?

    Every embedding is a primitive embedding of an integral overlattice of
    Lsub of p-power index; each overlattice is searched digit by digit and a
    branch succeeds once the Jacobian certifies a Hensel lift.  Returns True,
    False, or INCONCLUSIVE when the node budget runs out.
    """
    p = int(p)
    n, m = L.rank, Lsub.rank
    if m > n:
        return False
    if m == 0:
        return True
    state = [0, search_budget() if budget is None else budget]
    k = oracle_precision(Lsub, L, p) if precision is None else precision
    # divide out the p-part of the content of B; diagonal equations are halved
    # whenever the rescaled Gram still has even diagonal
    c = min(_vp(x, p) for row in L.gram for x in row if x)
    G = [[x // p**c for x in row] for row in L.gram]
    halve = all(G[i][i] % 2 == 0 for i in range(n))
    vG = valuation(intmat.det(G), p)
    sG = max(_elementary_valuations(G, p, vG + 1))
    Gb, scales = _block_basis(G, p)
    # forms that agree mod p^K, K > 2(sG + v_p(2)), are isometric (Newton
    # from the identity), so the entries can be cut down
    mod = p ** (2 * sG + (3 if p == 2 else 1) + 2)
    # (diagonal entries keep their parity: the diagonal equations may be halved)
    Gb = [[(x + q // 2) % q - q // 2 for x, q in zip(row, [mod] * i + [2 * mod] + [mod] * (n - i - 1))] for i, row in enumerate(Gb)]
    # at p = 2 the first digit of a scale-s row already shows mod 2^s
    sc = [max(x - 1, 0) for x in scales] if p == 2 else scales
    n0 = sc.count(0)
    inconclusive = False
    for Bs in _overlattices([list(r) for r in Lsub.gram], p):
        if any(_vp(x, p) < c for row in Bs for x in row if x):
            continue
        Gs = [[x // p**c for x in row] for row in Bs]
        if halve and any(Gs[a][a] % 2 for a in range(m)):
            continue
        vs = valuation(intmat.det(Gs), p)
        if m == n and vs != vG:
            continue
        # at a true embedding T the image of J contains p^w Sym, where w is the
        # top divisor of T^t G: at most the top divisor of Gs and of G (T is
        # primitive).  Unhalved diagonal equations cost one more factor 2.
        ws = max(_elementary_valuations(Gs, p, vs + 1), default=0)
        e_max = min(ws, sG) + (1 if (p == 2 and not halve) else 0)
        depth = max(k, 2 * e_max + 1)
        if p == 2:
            jobs = [(Gs, None)]
        else:
            # level-0 rows of an embedding are fixed up to O(G) by their kernel,
            # a subspace of the radical of Gs mod p (Witt)
            sol = _solve_mod_p(Gs, [0] * m, p)
            jobs = [(_adapted_source(Gs, K, p), len(K)) for K in _subspaces(sol[1], p) if m - len(K) <= n0]
        try:
            for Gj, d in jobs:
                if _primitive_search(Gb, sc, Gj, p, depth, halve, state, d):
                    return True
        except _Budget:
            inconclusive = True
            state[0] = 0
    return INCONCLUSIVE if inconclusive else False


# ------------------------------------------------------- representability


def witt_index_lower_bound(L, p):
    """A lower bound for the number of hyperbolic planes split off L_p."""
    if p != 2 and L.discriminant() % p:
        return (L.rank - 1) // 2
    return 0


def locally_representable(Lsub, L, p):
    """Does Lsub tensor Z_p embed in L tensor Z_p?  True/False/INCONCLUSIVE."""
    if Lsub.rank > L.rank:
        return False
    if Lsub.rank == 0:
        return True
    # any rank-m lattice embeds in m hyperbolic planes
    if Lsub.rank <= witt_index_lower_bound(L, p):
        return True
    return lifting_oracle_embeds(Lsub, L, p)


def representable_at_infinity(Lsub, L):
    ps, qs = signature(Lsub)
    pl, ql = signature(L)
    return ps <= pl and qs <= ql


def local_places(Lsub, L):
    """Primes where local representability must actually be tested."""
    from .arith import prime_divisors

    return prime_divisors(2 * L.discriminant() * Lsub.discriminant())
