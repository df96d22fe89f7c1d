import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _corpus import random_lattice, rng_for
from quadlat._kernels import numba_backend, python_backend
from quadlat.genus import _canonical_lines, _line_code, _pairings, automorphism_group
from quadlat.lattice import identity_lattice, lll_reduce, short_vector_norms

BACKENDS = [python_backend, numba_backend()]


def definite(seed, n):
    return random_lattice(rng_for(seed), n, scales=[1, 1, 2, 3, 5], definite=True)


@given(st.integers(0, 10**6), st.integers(2, 6))
@settings(max_examples=25)
def test_lll_backends_agree(seed, n):
    G = np.array(definite(seed, n).gram, dtype=np.int64)
    Us = [be.lll_gram(G, 0.99) for be in BACKENDS]
    assert np.array_equal(Us[0], Us[1])
    assert round(abs(np.linalg.det(Us[0]))) == 1


@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(1, 12))
@settings(max_examples=25)
def test_fincke_pohst_backends_agree(seed, n, bound):
    Q = np.array(definite(seed, n).gram, dtype=float) / 2
    rows = [sorted(map(tuple, be.fincke_pohst(Q, bound + 1e-6).tolist())) for be in BACKENDS]
    assert rows[0] == rows[1]


@given(st.integers(0, 10**6))
@settings(max_examples=20)
def test_backtrack_backends_agree(seed):
    L = lll_reduce(definite(seed, 4))[0]
    G = L.gram_list()
    S, norms = short_vector_norms(L, max(G[j][j] // 2 for j in range(4)))
    P = _pairings(L, S)
    lists = [np.flatnonzero(norms == G[j][j] // 2) for j in range(4)]
    off = np.array([0] + list(np.cumsum([len(c) for c in lists])), dtype=np.int64)
    cand = np.concatenate(lists).astype(np.int64)
    target = np.array(G, dtype=np.int64)
    out = [be.backtrack(P, cand, off, target, 4096, 0, 10**7) for be in BACKENDS]
    assert out[0][1] == out[1][1] > 0
    assert out[0][2] == out[1][2]
    assert np.array_equal(out[0][0], out[1][0])


@pytest.mark.parametrize("n,p", [(3, 3), (4, 5), (5, 3)])
def test_line_orbits_backends_agree(n, p):
    L = identity_lattice(n)
    V = _canonical_lines(n, p)
    lines = V[(((V @ L.gram_array()) * V).sum(axis=1) // 2) % p == 0]
    table = np.full(p**n, -1, dtype=np.int64)
    table[_line_code(lines, p)] = np.arange(len(lines), dtype=np.int64)
    powers = p ** np.arange(n, dtype=np.int64)
    inv = np.array([0] + [pow(a, -1, p) for a in range(1, p)], dtype=np.int64)
    ea, eb = [], []
    for g in automorphism_group(L).generators:
        gm = np.array(g, dtype=np.int64) % p
        imgs = [be.line_images(lines, gm, p, inv, powers, table) for be in BACKENDS]
        assert np.array_equal(imgs[0], imgs[1]) and (imgs[0] >= 0).all()
        ea.append(np.arange(len(lines), dtype=np.int64))
        eb.append(imgs[0])
    a, b = np.concatenate(ea), np.concatenate(eb)
    labels = [be.orbit_labels(len(lines), a, b) for be in BACKENDS]
    assert np.array_equal(labels[0], labels[1])


def test_env_flag_selects_python_backend():
    code = "from quadlat._kernels import active_backend; print(active_backend().name)"
    env = dict(os.environ, QUADLAT_DISABLE_NUMBA="1")
    res = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert res.stdout.strip() == "python"


def test_benchmark_runs(capsys):
    import importlib.util

    path = os.path.join(os.path.dirname(__file__), "..", "benchmarks", "bench_kernels.py")
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    mod.main(["--repeat", "1"])
    out = capsys.readouterr().out
    assert "backtrack" in out and "speedup" in out
