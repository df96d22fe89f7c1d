"""Integral quadratic lattices stored by their doubled Gram matrix.

B[i][j] = Q(e_i + e_j) - Q(e_i) - Q(e_j), so B has even diagonal and
Q(x) = x^T B x / 2.  Entries are Python ints; numpy int64 copies are only made
for the kernels, behind an overflow guard.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors

from . import intmat
from ._kernels import active_backend
from .arith import INF, valuation

_INT64_SAFE = 2**62


class QuadraticLattice:
    """Immutable integral lattice.  Rank 0 is allowed (empty Gram, disc 1)."""

    __slots__ = ("_gram", "_disc", "_cache")

    def __init__(self, gram):
        rows = tuple(tuple(int(x) for x in row) for row in gram)
        n = len(rows)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ValueError("Gram matrix must be square")
            if row[i] % 2:
                raise ValueError("diagonal of the doubled Gram must be even")
            for j in range(i):
                if row[j] != rows[j][i]:
                    raise ValueError("Gram matrix must be symmetric")
        d = intmat.det(rows)
        if d == 0:
            raise ValueError("degenerate Gram matrix")
        self._gram = rows
        self._disc = d
        self._cache = {}

    # plain data -----------------------------------------------------------
    @property
    def gram(self):
        return self._gram

    @property
    def rank(self):
        return len(self._gram)

    def gram_list(self):
        return [list(r) for r in self._gram]

    def gram_array(self):
        """int64 copy of B (raises OverflowError if entries are too large)."""
        return _to_int64(self._gram)

    def __eq__(self, other):
        return isinstance(other, QuadraticLattice) and self._gram == other._gram

    def __hash__(self):
        return hash(self._gram)

    def __repr__(self):
        return f"QuadraticLattice({self.gram_list()})"

    # form -----------------------------------------------------------------
    def bilinear(self, x, y):
        """x^T B y (twice the half-integral inner product)."""
        n = self.rank
        if len(x) != n or len(y) != n:
            raise ValueError("dimension mismatch")
        return sum(int(x[i]) * sum(b * int(yj) for b, yj in zip(self._gram[i], y)) for i in range(n))

    def evaluate(self, x):
        return self.bilinear(x, x) // 2

    def discriminant(self):
        return self._disc

    def is_positive_definite(self):
        if "posdef" not in self._cache:
            n = self.rank
            self._cache["posdef"] = all(
                intmat.det([row[:k] for row in self._gram[:k]]) > 0 for k in range(1, n + 1)
            )
        return self._cache["posdef"]

    def is_even(self):
        return all(self._gram[i][i] % 4 == 0 for i in range(self.rank))

    def transform(self, M):
        """Lattice with Gram M^T B M (M an n x k integer matrix)."""
        M = intmat.to_rows(M)
        return QuadraticLattice(intmat.matmul(intmat.transpose(M), intmat.matmul(self.gram_list(), M)))


def evaluate(L, x):
    return L.evaluate(x)


def discriminant(L):
    return L.discriminant()


# ---------------------------------------------------------------- builders


def identity_lattice(n):
    """I_n: the sum of n squares."""
    return QuadraticLattice([[2 * (i == j) for j in range(n)] for i in range(n)])


_E8_CARTAN = [
    [2, -1, 0, 0, 0, 0, 0, 0],
    [-1, 2, -1, 0, 0, 0, 0, 0],
    [0, -1, 2, -1, 0, 0, 0, -1],
    [0, 0, -1, 2, -1, 0, 0, 0],
    [0, 0, 0, -1, 2, -1, 0, 0],
    [0, 0, 0, 0, -1, 2, -1, 0],
    [0, 0, 0, 0, 0, -1, 2, 0],
    [0, 0, -1, 0, 0, 0, 0, 2],
]


def e8_lattice():
    """E8 with roots of norm Q = 2 (doubled Gram is twice the Cartan matrix)."""
    return QuadraticLattice([[2 * x for x in row] for row in _E8_CARTAN])


def hyperbolic_plane():
    return QuadraticLattice([[0, 1], [1, 0]])


def diagonal_lattice(coeffs):
    """Form sum a_i x_i^2."""
    n = len(coeffs)
    return QuadraticLattice([[2 * int(coeffs[i]) if i == j else 0 for j in range(n)] for i in range(n)])


def binary_lattice(a, b, c):
    """Form a x^2 + b x y + c y^2."""
    return QuadraticLattice([[2 * a, b], [b, 2 * c]])


def direct_sum(*lattices):
    n = sum(L.rank for L in lattices)
    G = [[0] * n for _ in range(n)]
    off = 0
    for L in lattices:
        for i, row in enumerate(L.gram):
            G[off + i][off : off + L.rank] = list(row)
        off += L.rank
    return QuadraticLattice(G)


# ------------------------------------------------------- reduction, vectors


def _to_int64(M):
    rows = [list(r) for r in M]
    if any(abs(x) >= _INT64_SAFE for r in rows for x in r):
        raise OverflowError("entries too large for the int64 kernels")
    n = len(rows)
    return np.array(rows, dtype=np.int64).reshape(n, len(rows[0]) if n else 0)


def _require_posdef(L):
    if not L.is_positive_definite():
        raise ValueError("lattice must be positive definite")


def lll_reduce(L):
    """(reduced lattice, U) with reduced Gram = U^T B U, U unimodular (lists).

    The float LLL only proposes U; the reduced Gram is recomputed exactly.
    """
    _require_posdef(L)
    if "lll" not in L._cache:
        n = L.rank
        if n < 2:
            L._cache["lll"] = (L, intmat.identity(n))
        else:
            U = active_backend().lll_gram(L.gram_array(), 0.99)
            U = [[int(x) for x in row] for row in U]
            L._cache["lll"] = (L.transform(U), U)
    return L._cache["lll"]


def _exact_norms(L, X):
    """Q(x) for the rows of X, in int64 when provably safe."""
    if X.shape[0] == 0:
        return np.zeros(0, dtype=object)
    B = L.gram_array()
    xmax = int(np.abs(X).max())
    bsum = int(np.abs(B).sum())
    if xmax * xmax * bsum < _INT64_SAFE:
        return ((X @ B) * X).sum(axis=1) // 2
    return np.array([L.evaluate([int(v) for v in row]) for row in X], dtype=object)


def short_vectors(L, bound):
    """All nonzero x with Q(x) <= bound as rows of an int64 array, lex sorted."""
    _require_posdef(L)
    n = L.rank
    bound = int(bound)
    if bound < 1 or n == 0:
        return np.zeros((0, n), dtype=np.int64)
    key = ("sv", bound)
    if key in L._cache:
        return L._cache[key]
    red, U = lll_reduce(L)
    Qf = np.array(red.gram, dtype=float) / 2.0
    Y = active_backend().fincke_pohst(Qf, bound * (1 + 1e-9) + 1e-6)
    X = Y @ _to_int64(U).T if Y.shape[0] else Y
    norms = _exact_norms(L, X)
    X = X[norms <= bound] if X.shape[0] else X
    X = X[np.lexsort(X.T[::-1])] if X.shape[0] else X
    X.setflags(write=False)
    L._cache[key] = X
    return X


def short_vector_norms(L, bound):
    """(vectors, norms) for short_vectors(L, bound)."""
    X = short_vectors(L, bound)
    return X, np.asarray(_exact_norms(L, X), dtype=np.int64) if X.shape[0] else np.zeros(0, dtype=np.int64)


def norm_histogram(L, bound):
    X, norms = short_vector_norms(L, bound)
    vals, counts = np.unique(norms, return_counts=True)
    return tuple((int(v), int(c)) for v, c in zip(vals, counts))


def minimum(L):
    """Smallest nonzero value of Q on L."""
    _require_posdef(L)
    if L.rank == 0:
        raise ValueError("rank-0 lattice has no nonzero vectors")
    if "min" not in L._cache:
        red, _ = lll_reduce(L)
        c = min(red.gram[i][i] // 2 for i in range(red.rank))
        _, norms = short_vector_norms(L, c)
        L._cache["min"] = int(norms.min())
    return L._cache["min"]


# -------------------------------------------------------------- reflections


def reflection(L, delta):
    """Matrix of w -> w - <w,delta>/<delta,delta> * 2 delta as Fractions."""
    n = L.rank
    d = [Fraction(x) for x in delta]
    if len(d) != n:
        raise ValueError("dimension mismatch")
    Bd = [sum(Fraction(b) * x for b, x in zip(row, d)) for row in L.gram]
    dd = sum(x * y for x, y in zip(d, Bd))
    if dd == 0:
        raise ValueError("cannot reflect in an isotropic vector")
    return [[Fraction(int(i == j)) - 2 * d[i] * Bd[j] / dd for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------- subspaces


@dataclass(frozen=True)
class RationalSubspace:
    """Q-span of the given columns inside L tensor Q."""

    ambient: QuadraticLattice
    basis: tuple

    def __init__(self, ambient, basis):
        cols = tuple(tuple(Fraction(x) for x in v) for v in basis)
        for v in cols:
            if len(v) != ambient.rank:
                raise ValueError("basis vector has the wrong length")
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "basis", cols)
        if cols and intmat.rank(self._int_columns()) != len(cols):
            raise ValueError("basis vectors are linearly dependent")

    @property
    def dim(self):
        return len(self.basis)

    def _int_columns(self):
        cols = [intmat.clear_denominators(v) for v in self.basis]
        return intmat.transpose(cols) if cols else [[] for _ in range(self.ambient.rank)]

    def integral_basis(self):
        """Basis columns of the saturated lattice Z cap L (n x dim)."""
        if not self.basis:
            return [[] for _ in range(self.ambient.rank)]
        return intmat.saturate(self._int_columns())

    def gram(self):
        """Doubled Gram of Z cap L (may be singular)."""
        W = self.integral_basis()
        return intmat.matmul(intmat.transpose(W), intmat.matmul(self.ambient.gram_list(), W))


def span(L, *vectors):
    return RationalSubspace(L, vectors)


def complement_basis(L, S):
    """Saturated integer basis (columns) of S^perp cap L."""
    if intmat.det(S.gram()) == 0:
        raise ValueError("form restricted to the subspace is degenerate")
    n = L.rank
    if S.dim == 0:
        return intmat.identity(n)
    W = S.integral_basis()
    A = intmat.matmul(intmat.transpose(W), L.gram_list())
    return intmat.integer_kernel(A, n)


def orthogonal_complement(L, S):
    """S^perp cap L with its induced doubled Gram (LLL-reduced when definite)."""
    K = complement_basis(L, S)
    if not K or not K[0]:
        return QuadraticLattice([])
    M = L.transform(K)
    if M.is_positive_definite() and M.rank > 1:
        M = lll_reduce(M)[0]
    return M


def val_of_subspace(L, Z, p):
    """p-adic valuation of the discriminant of Z cap L, INF if degenerate."""
    return valuation(intmat.det(Z.gram()), p, allow_zero=True)


def is_saturated(L, vectors):
    """True iff the columns of ``vectors`` span a primitive sublattice of L."""
    M = intmat.to_rows(vectors)
    n = L.rank
    if len(M) != n:
        raise ValueError("columns must have length rank(L)")
    k = len(M[0]) if M else 0
    if k == 0:
        return True
    if intmat.rank(M) != k:
        raise ValueError("columns are linearly dependent")
    facs = invariant_factors(Matrix(M), domain=ZZ)
    return all(abs(int(f)) == 1 for f in facs)


def content(v):
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


# ------------------------------------------------------------------- files


def format_gram(L):
    lines = [str(L.rank)]
    lines += [" ".join(str(x) for x in row) for row in L.gram]
    return "\n".join(lines) + "\n"


def parse_gram(text):
    rows = []
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        rows.append([int(t) for t in s.split()])
    if not rows or len(rows[0]) != 1:
        raise ValueError("first line must hold the rank")
    n = rows[0][0]
    body = rows[1:]
    if n < 0 or len(body) != n or any(len(r) != n for r in body):
        raise ValueError(f"expected {n} rows of {n} integers")
    return QuadraticLattice(body)


def read_gram(path):
    with open(path) as fh:
        return parse_gram(fh.read())


def write_gram(L, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_gram(L))


__all__ = [
    "INF",
    "QuadraticLattice",
    "RationalSubspace",
    "binary_lattice",
    "complement_basis",
    "diagonal_lattice",
    "direct_sum",
    "discriminant",
    "e8_lattice",
    "evaluate",
    "format_gram",
    "hyperbolic_plane",
    "identity_lattice",
    "is_saturated",
    "lll_reduce",
    "minimum",
    "norm_histogram",
    "orthogonal_complement",
    "parse_gram",
    "read_gram",
    "reflection",
    "short_vectors",
    "span",
    "val_of_subspace",
    "write_gram",
]
