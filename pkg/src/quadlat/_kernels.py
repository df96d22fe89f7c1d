"""Hot inner loops.

Each kernel is written once as plain Python over numpy arrays.  Unless
QUADLAT_DISABLE_NUMBA is set, the public names are the ``numba.njit``
compilations of those same functions; otherwise the Python originals are used
directly.  ``python_backend`` / ``numba_backend`` expose both for tests and the
benchmark.

Kernels only ever *propose* candidates (float enumeration, LLL transforms,
backtracking over precomputed integer pairings); every caller re-verifies
results in exact integer arithmetic.
"""

from types import SimpleNamespace
import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ._config import DISABLE_NUMBA

# ---------------------------------------------------------------- LLL on Gram


def _lll_gram(G, delta):
    n = G.shape[0]
    Gi = G.copy()
    U = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        U[i, i] = 1
    if n < 2:
        return U
    mu = np.zeros((n, n))
    r = np.zeros(n)
    r[0] = float(Gi[0, 0])
    k = 1
    guard = 0
    while k < n and guard < 200000:
        guard += 1
        for jj in range(k):
            s = float(Gi[k, jj])
            for l in range(jj):
                s -= mu[jj, l] * mu[k, l] * r[l]
            mu[k, jj] = s / r[jj]
        s = float(Gi[k, k])
        for l in range(k):
            s -= mu[k, l] * mu[k, l] * r[l]
        r[k] = s
        for j in range(k - 1, -1, -1):
            q = np.round(mu[k, j])
            if q != 0.0:
                qi = np.int64(q)
                for l in range(n):
                    U[l, k] -= qi * U[l, j]
                for l in range(n):
                    Gi[k, l] -= qi * Gi[j, l]
                for l in range(n):
                    Gi[l, k] -= qi * Gi[l, j]
                for l in range(j):
                    mu[k, l] -= q * mu[j, l]
                mu[k, j] -= q
        if r[k] >= (delta - mu[k, k - 1] * mu[k, k - 1]) * r[k - 1]:
            k += 1
        else:
            for l in range(n):
                t = Gi[k, l]
                Gi[k, l] = Gi[k - 1, l]
                Gi[k - 1, l] = t
            for l in range(n):
                t = Gi[l, k]
                Gi[l, k] = Gi[l, k - 1]
                Gi[l, k - 1] = t
            for l in range(n):
                t = U[l, k]
                U[l, k] = U[l, k - 1]
                U[l, k - 1] = t
            km = k - 1
            for jj in range(km):
                s = float(Gi[km, jj])
                for l in range(jj):
                    s -= mu[jj, l] * mu[km, l] * r[l]
                mu[km, jj] = s / r[jj]
            s = float(Gi[km, km])
            for l in range(km):
                s -= mu[km, l] * mu[km, l] * r[l]
            r[km] = s
            if k > 1:
                k -= 1
    return U


# ------------------------------------------------------------ Fincke-Pohst


def _fincke_pohst(Q, bound):
    """All integer x != 0 with x^T Q x <= bound (float; caller adds slack)."""
    n = Q.shape[0]
    q = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            q[i, j] = Q[i, j]
    for i in range(n):
        for j in range(i + 1, n):
            q[j, i] = q[i, j]
            q[i, j] = q[i, j] / q[i, i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k, l] -= q[k, i] * q[i, l]
    cap = 256
    out = np.zeros((cap, n), dtype=np.int64)
    cnt = 0
    x = np.zeros(n, dtype=np.int64)
    T = np.zeros(n)
    C = np.zeros(n)
    ub = np.zeros(n, dtype=np.int64)
    i = n - 1
    T[i] = bound
    Z = math.sqrt(max(T[i], 0.0) / q[i, i])
    ub[i] = np.int64(math.floor(Z - C[i]))
    x[i] = np.int64(math.ceil(-Z - C[i])) - 1
    while True:
        x[i] += 1
        if x[i] > ub[i]:
            i += 1
            if i == n:
                break
            continue
        if i > 0:
            t = x[i] + C[i]
            T[i - 1] = T[i] - q[i, i] * t * t
            i -= 1
            s = 0.0
            for j in range(i + 1, n):
                s += q[i, j] * x[j]
            C[i] = s
            Z = math.sqrt(max(T[i], 0.0) / q[i, i])
            ub[i] = np.int64(math.floor(Z - C[i]))
            x[i] = np.int64(math.ceil(-Z - C[i])) - 1
        else:
            nonzero = False
            for j in range(n):
                if x[j] != 0:
                    nonzero = True
                    break
            if nonzero:
                if cnt == cap:
                    cap *= 2
                    bigger = np.zeros((cap, n), dtype=np.int64)
                    bigger[:cnt] = out[:cnt]
                    out = bigger
                out[cnt] = x
                cnt += 1
    return out[:cnt].copy()


# -------------------------------------------------------------- backtracking


def _backtrack(P, cand, off, target, max_store, stop_after, node_budget):
    """Column-by-column search for index tuples with prescribed pairings.

    Column j draws from cand[off[j]:off[j+1]]; a tuple (c_0..c_{m-1}) is a
    solution when P[c_i, c_j] == target[i, j] for all i <= j.  Returns
    (stored solutions, solution count, nodes visited, status) where status is
    0 = exhausted, 1 = stopped after ``stop_after`` solutions, 2 = budget hit.
    """
    m = target.shape[0]
    store = max(max_store, 1)
    sols = np.zeros((store, m), dtype=np.int64)
    pos = np.zeros(m, dtype=np.int64)
    chosen = np.zeros(m, dtype=np.int64)
    nsol = 0
    nodes = 0
    status = 0
    j = 0
    pos[0] = off[0] - 1
    while j >= 0:
        pos[j] += 1
        if pos[j] >= off[j + 1]:
            j -= 1
            continue
        c = cand[pos[j]]
        nodes += 1
        if nodes > node_budget:
            status = 2
            break
        if P[c, c] != target[j, j]:
            continue
        ok = True
        for i in range(j):
            if P[c, chosen[i]] != target[i, j]:
                ok = False
                break
        if not ok:
            continue
        chosen[j] = c
        if j == m - 1:
            if nsol < max_store:
                for t in range(m):
                    sols[nsol, t] = chosen[t]
            nsol += 1
            if stop_after > 0 and nsol >= stop_after:
                status = 1
                break
        else:
            j += 1
            pos[j] = off[j] - 1
    return sols, nsol, nodes, status


# ------------------------------------------------------- line orbits mod p


def _line_images(lines, g, p, inv, powers, table):
    """Index of the line g*v for every canonical line v (rows of ``lines``)."""
    L, n = lines.shape
    out = np.empty(L, dtype=np.int64)
    w = np.zeros(n, dtype=np.int64)
    for a in range(L):
        for i in range(n):
            s = 0
            for j in range(n):
                s += g[i, j] * lines[a, j]
            w[i] = s % p
        lead = 0
        for i in range(n):
            if w[i] != 0:
                lead = w[i]
                break
        f = inv[lead]
        code = 0
        for i in range(n):
            code += ((w[i] * f) % p) * powers[i]
        out[a] = table[code]
    return out


def _union_find_labels(nlines, edges_a, edges_b):
    parent = np.arange(nlines)
    for e in range(edges_a.shape[0]):
        x = edges_a[e]
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        y = edges_b[e]
        while parent[y] != y:
            parent[y] = parent[parent[y]]
            y = parent[y]
        if x != y:
            if x < y:
                parent[y] = x
            else:
                parent[x] = y
    labels = np.empty(nlines, dtype=np.int64)
    for i in range(nlines):
        x = i
        while parent[x] != x:
            x = parent[x]
        labels[i] = x
    return labels


def _line_images_numpy(lines, g, p, inv, powers, table):
    w = (lines @ g.T) % p
    lead_idx = np.argmax(w != 0, axis=1)
    lead = w[np.arange(w.shape[0]), lead_idx]
    w = (w * inv[lead][:, None]) % p
    return table[w @ powers]


def _orbit_labels_numpy(nlines, edges_a, edges_b):
    """Label each line by the smallest index in its connected component."""
    graph = coo_matrix((np.ones(edges_a.shape[0]), (edges_a, edges_b)), shape=(nlines, nlines))
    _, comp = connected_components(graph, directed=False)
    first = np.full(comp.max() + 1 if nlines else 0, nlines, dtype=np.int64)
    np.minimum.at(first, comp, np.arange(nlines))
    return first[comp]


def _make_python_backend():
    return SimpleNamespace(
        name="python",
        lll_gram=_lll_gram,
        fincke_pohst=_fincke_pohst,
        backtrack=_backtrack,
        line_images=_line_images_numpy,
        orbit_labels=_orbit_labels_numpy,
    )


_NUMBA_BACKEND = None


def numba_backend():
    """Compile (once) and return the numba-backed kernels."""
    global _NUMBA_BACKEND
    if _NUMBA_BACKEND is None:
        import numba

        jit = numba.njit(cache=True)
        _NUMBA_BACKEND = SimpleNamespace(
            name="numba",
            lll_gram=jit(_lll_gram),
            fincke_pohst=jit(_fincke_pohst),
            backtrack=jit(_backtrack),
            line_images=jit(_line_images),
            orbit_labels=jit(_union_find_labels),
        )
    return _NUMBA_BACKEND


python_backend = _make_python_backend()


def active_backend():
    return python_backend if DISABLE_NUMBA else numba_backend()
