"""Time each hot kernel under the numba and the pure Python/numpy backend.

    python benchmarks/bench_kernels.py [--repeat N]

Numba compile time is excluded by a warm-up call.  Outputs are compared so a
speedup never hides a disagreement.
"""

import argparse
import time

import numpy as np

from quadlat._kernels import numba_backend, python_backend
from quadlat.genus import _canonical_lines, _line_code, _pairings, automorphism_group
from quadlat.lattice import direct_sum, e8_lattice, identity_lattice, lll_reduce, short_vector_norms


def _workloads():
    E8 = e8_lattice()
    skew = identity_lattice(8).transform(
        [[1, 3, 0, 2, 0, 1, 0, 5], [0, 1, 4, 0, 1, 0, 2, 0], [0, 0, 1, 2, 0, 3, 0, 1], [0, 0, 0, 1, 5, 0, 1, 0],
         [0, 0, 0, 0, 1, 2, 0, 3], [0, 0, 0, 0, 0, 1, 4, 0], [0, 0, 0, 0, 0, 0, 1, 2], [0, 0, 0, 0, 0, 0, 0, 1]]
    )
    G = np.array(skew.gram, dtype=np.int64)
    yield "lll_gram (skewed I8)", lambda be: be.lll_gram(G, 0.99)

    Q = np.array(lll_reduce(E8)[0].gram, dtype=float) / 2
    yield "fincke_pohst (E8, Q <= 4)", lambda be: be.fincke_pohst(Q, 4 + 1e-6)

    L = lll_reduce(direct_sum(e8_lattice(), identity_lattice(1)))[0]
    B = L.gram_list()
    S, norms = short_vector_norms(L, max(B[j][j] // 2 for j in range(9)))
    P = _pairings(L, S)
    lists = [np.flatnonzero(norms == B[j][j] // 2) for j in range(9)]
    off = np.array([0] + list(np.cumsum([len(c) for c in lists])), dtype=np.int64)
    cand = np.concatenate(lists).astype(np.int64)
    target = np.array(B, dtype=np.int64)
    yield "backtrack (E8+I1 isometries, 200k nodes)", lambda be: be.backtrack(P, cand, off, target, 1, 0, 200_000)[1:3]

    n, p = 6, 5
    I = identity_lattice(n)
    V = _canonical_lines(n, p)
    lines = V[(((V @ I.gram_array()) * V).sum(axis=1) // 2) % p == 0]
    table = np.full(p**n, -1, dtype=np.int64)
    table[_line_code(lines, p)] = np.arange(len(lines), dtype=np.int64)
    powers = p ** np.arange(n, dtype=np.int64)
    inv = np.array([0] + [pow(a, -1, p) for a in range(1, p)], dtype=np.int64)
    gens = [np.array(g, dtype=np.int64) % p for g in automorphism_group(I).generators]
    yield "line_images (I6 mod 5)", lambda be: [be.line_images(lines, g, p, inv, powers, table) for g in gens]

    a = np.repeat(np.arange(len(lines), dtype=np.int64), len(gens))
    b = np.concatenate([python_backend.line_images(lines, g, p, inv, powers, table) for g in gens])
    yield "orbit_labels (I6 mod 5)", lambda be: be.orbit_labels(len(lines), a, b)


def _same(x, y):
    if isinstance(x, (list, tuple)):
        return all(_same(u, v) for u, v in zip(x, y))
    if isinstance(x, np.ndarray):
        return np.array_equal(np.sort(x, axis=0), np.sort(y, axis=0))
    return x == y


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    nb = numba_backend()
    print(f"{'kernel':44s} {'python':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, work in _workloads():
        ref, fast = work(python_backend), work(nb)  # the numba call doubles as warm-up
        if not _same(ref, fast):
            raise SystemExit(f"{name}: backends disagree")
        tp = _best(lambda: work(python_backend), args.repeat)
        tn = _best(lambda: work(nb), args.repeat)
        print(f"{name:44s} {tp:10.4f} {tn:10.4f} {tp / tn:7.1f}x")


if __name__ == "__main__":
    main()
