"""Exact integer matrix helpers (Python ints, row-major lists).

Column Hermite reduction with a unimodular transform is the single workhorse:
kernels, bases from generating sets and saturations all come out of it.
"""

from fractions import Fraction


def to_rows(M):
    return [[int(x) for x in row] for row in M]


def transpose(M):
    if not M:
        return []
    return [list(col) for col in zip(*M)]


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A, B):
    Bt = transpose(B)
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def det(M):
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(M)
    if n == 0:
        return 1
    A = [list(map(int, row)) for row in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def column_hermite(A, ncols=None):
    """Return (H, U, r) with A*U = H, U unimodular, H zero beyond column r.

    The first r columns of H are independent; the last n-r columns of U span
    the integer kernel of A.
    """
    m = len(A)
    n = ncols if ncols is not None else (len(A[0]) if A else 0)
    H = [list(map(int, row)) for row in A]
    U = identity(n)

    def colop(j, k, a, b, c, d):
        # (col_j, col_k) <- (a*col_j + b*col_k, c*col_j + d*col_k)
        for M in (H, U):
            for row in M:
                x, y = row[j], row[k]
                row[j], row[k] = a * x + b * y, c * x + d * y

    r = 0
    for i in range(m):
        if r >= n:
            break
        for k in range(r + 1, n):
            b = H[i][k]
            if b == 0:
                continue
            a = H[i][r]
            g, x, y = _xgcd(a, b)
            colop(r, k, x, y, -b // g, a // g)
        if H[i][r] != 0:
            if H[i][r] < 0:
                for M in (H, U):
                    for row in M:
                        row[r] = -row[r]
            for k in range(r):
                q = H[i][k] // H[i][r]
                if q:
                    for M in (H, U):
                        for row in M:
                            row[k] -= q * row[r]
            r += 1
    return H, U, r


def integer_kernel(A, ncols=None):
    """Basis (as columns, n x k) of {x in Z^n : A x = 0}; always saturated."""
    n = ncols if ncols is not None else (len(A[0]) if A else 0)
    if not A:
        return identity(n)
    _, U, r = column_hermite(A, n)
    return [row[r:] for row in U]


def column_basis(G):
    """Basis columns of the lattice spanned by the columns of G."""
    if not G or not G[0]:
        return [[] for _ in G]
    H, _, r = column_hermite(G)
    return [row[:r] for row in H]


def saturate(K):
    """Basis columns of Z^n intersected with the rational span of K's columns."""
    n = len(K)
    if n == 0:
        return []
    k = len(K[0]) if K else 0
    if k == 0:
        return [[] for _ in range(n)]
    C = integer_kernel(transpose(K), n)
    if not C or not C[0]:
        return identity(n)
    return integer_kernel(transpose(C), n)


def rank(M):
    if not M or not M[0]:
        return 0
    _, _, r = column_hermite(M)
    return r


def inverse_fraction(M):
    """Exact inverse over Q by Gauss-Jordan."""
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        A[c], A[piv] = A[piv], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


def inverse_unimodular(M):
    inv = inverse_fraction(M)
    out = []
    for row in inv:
        if any(x.denominator != 1 for x in row):
            raise ValueError("matrix is not unimodular")
        out.append([int(x) for x in row])
    return out


def rational_nullspace(A, ncols):
    """Basis of the rational kernel of A, scaled to primitive integer columns."""
    K = integer_kernel(A, ncols) if A else identity(ncols)
    return K


def clear_denominators(vec):
    """Integer vector on the same rational line as ``vec``."""
    from math import lcm, gcd

    fr = [Fraction(x) for x in vec]
    L = 1
    for x in fr:
        L = lcm(L, x.denominator)
    ints = [int(x * L) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return [x // g for x in ints] if g else ints
