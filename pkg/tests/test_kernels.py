"""Both kernel sets compute the same thing.

Inputs mirror what the state backend actually feeds the kernels: XOR
permutations with unit-modulus amplitudes, two-sparse rotation rows, and
Hermitian unit-trace matrices. Every case is also checked against a dense
matrix oracle so a shared bug in both sets would still show up.
"""

import numpy as np
import pytest

from collidesim import _kernels as kern

pytestmark = pytest.mark.skipif(not kern.HAS_NUMBA, reason="numba not importable")

DIMS = (2, 4, 8, 16)


def _rand_rho(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return np.ascontiguousarray(rho / np.trace(rho))


def _scatter(order):
    # subsystem index bit j (MSB first) lands at global bit position order[j]
    out = np.zeros(1 << len(order), dtype=np.int64)
    for i in range(out.size):
        v = 0
        for j, b in enumerate(order):
            if (i >> (len(order) - 1 - j)) & 1:
                v |= 1 << b
        out[i] = v
    return out


def test_monomial_conj_agrees_with_dense():
    rng = np.random.default_rng(7)
    for dim in DIMS:
        for _ in range(5):
            rho = _rand_rho(rng, dim)
            xmask = int(rng.integers(0, dim))
            perm = np.arange(dim, dtype=np.int64) ^ xmask
            amps = np.exp(2j * np.pi * rng.random(dim))
            u = np.zeros((dim, dim), dtype=np.complex128)
            u[perm, np.arange(dim)] = amps
            want = u @ rho @ u.conj().T
            got_np = kern.monomial_conj_numpy(rho, perm, amps)
            got_nb = kern.monomial_conj_numba(rho, perm, amps)
            np.testing.assert_allclose(got_np, want, atol=1e-12)
            np.testing.assert_allclose(got_nb, got_np, atol=1e-13)


def test_two_sparse_conj_agrees_with_dense():
    rng = np.random.default_rng(11)
    for dim in DIMS:
        for _ in range(5):
            rho = _rand_rho(rng, dim)
            x = int(rng.integers(1, dim))
            xidx = np.arange(dim, dtype=np.int64) ^ x
            # rotation-shaped rows; unitarity is irrelevant to the identity
            theta = rng.random() * np.pi
            diag = np.full(dim, np.cos(theta), dtype=np.complex128)
            off = -1j * np.sin(theta) * np.exp(2j * np.pi * rng.random(dim))
            u = np.diag(diag).astype(np.complex128)
            u[np.arange(dim), xidx] += off
            want = u @ rho @ u.conj().T
            got_np = kern.two_sparse_conj_numpy(rho, xidx, diag, off)
            got_nb = kern.two_sparse_conj_numba(rho, xidx, diag, off)
            np.testing.assert_allclose(got_np, want, atol=1e-12)
            np.testing.assert_allclose(got_nb, got_np, atol=1e-13)


def test_kron_matches_numpy():
    rng = np.random.default_rng(13)
    for da in (2, 4):
        for db in (2, 4, 8):
            a = _rand_rho(rng, da)
            b = _rand_rho(rng, db)
            np.testing.assert_allclose(
                kern.kron_numba(a, b), kern.kron_numpy(a, b), atol=1e-14
            )


def test_partial_trace_agrees_with_reshape():
    rng = np.random.default_rng(17)
    for n in (2, 3, 4):
        dim = 1 << n
        rho = _rand_rho(rng, dim)
        for _ in range(4):
            n_keep = int(rng.integers(1, n))
            bits = list(rng.permutation(n)[:n_keep])
            rest = [b for b in range(n) if b not in bits]
            keep = _scatter(sorted(bits, reverse=True))
            tr = _scatter(sorted(rest, reverse=True))
            got_np = kern.partial_trace_numpy(rho, keep, tr)
            got_nb = kern.partial_trace_numba(rho, keep, tr)
            # oracle: scatter-gather the kept block by explicit index math
            want = np.zeros_like(got_np)
            for i, ki in enumerate(keep):
                for j, kj in enumerate(keep):
                    want[i, j] = sum(rho[ki | s, kj | s] for s in tr)
            np.testing.assert_allclose(got_np, want, atol=1e-12)
            np.testing.assert_allclose(got_nb, got_np, atol=1e-13)
        assert abs(np.trace(kern.partial_trace_numpy(rho, keep, tr)) - 1.0) < 1e-12


def test_expect_tr_and_born_probs():
    rng = np.random.default_rng(19)
    for dim in DIMS:
        rho = _rand_rho(rng, dim)
        herm = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        herm = herm + herm.conj().T
        want = complex(np.trace(herm @ rho))
        assert abs(kern.expect_tr_numpy(herm, rho) - want) < 1e-12
        assert abs(kern.expect_tr_numba(herm, rho) - want) < 1e-12

        vecs = np.linalg.eigh(herm)[1]
        want_p = np.diag(vecs.conj().T @ rho @ vecs).real
        got_np = kern.born_probs_numpy(np.ascontiguousarray(vecs), rho)
        got_nb = kern.born_probs_numba(np.ascontiguousarray(vecs), rho)
        np.testing.assert_allclose(got_np, want_p, atol=1e-12)
        np.testing.assert_allclose(got_nb, got_np, atol=1e-12)
        assert abs(got_np.sum() - 1.0) < 1e-10


def test_active_set_matches_env_choice():
    # the module picked numba at import time in this environment
    assert kern.ACTIVE in ("numpy", "numba")
    if kern.USE_NUMBA:
        assert kern.monomial_conj is kern.monomial_conj_numba
    else:
        assert kern.monomial_conj is kern.monomial_conj_numpy
