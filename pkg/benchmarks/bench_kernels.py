#!/usr/bin/env python3
"""Time each numpy kernel against its numba twin.

The simulator picks one set at import time (COLLIDESIM_KERNELS=auto|numba|numpy)
but both sets stay importable, so this script times them head to head in one
process. JIT compilation happens during the warmup call and is excluded.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --qubits 4 8 10 --target-ms 100
"""

import argparse
import time

import numpy as np

from collidesim import _kernels as kern

KERNELS = (
    "monomial_conj",
    "two_sparse_conj",
    "kron",
    "partial_trace",
    "expect_tr",
    "born_probs",
)


def _time_per_call(fn, args, target_ms):
    fn(*args)  # warmup; first numba call compiles
    reps = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(reps):
            fn(*args)
        elapsed = (time.perf_counter() - t0) * 1e3
        if elapsed >= target_ms or reps >= 1 << 22:
            return elapsed / reps
        reps *= 2


def _random_rho(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def build_args(n, rng):
    """Realistic call shapes: gate conjugations on an n-qubit density matrix."""
    dim = 1 << n
    rho = _random_rho(rng, dim)
    idx = np.arange(dim)
    xidx = idx ^ int(rng.integers(1, dim))
    phases = np.exp(2j * np.pi * rng.random(dim))
    theta = np.pi * rng.random(dim)
    diag = (np.cos(theta) * np.exp(1j * rng.random(dim))).astype(np.complex128)
    off = (1j * np.sin(theta)).astype(np.complex128)
    env = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    keep = (idx[: dim // 2] << 1).astype(np.int64)  # keep all but the last qubit
    trace = np.array([0, 1], dtype=np.int64)
    vecs, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    op = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return {
        "monomial_conj": (rho, xidx, phases),
        "two_sparse_conj": (rho, xidx, diag, off),
        "kron": (rho, env),
        "partial_trace": (rho, keep, trace),
        "expect_tr": (op, rho),
        "born_probs": (vecs, rho),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, nargs="+", default=[4, 6, 8, 10])
    parser.add_argument("--target-ms", type=float, default=50.0,
                        help="minimum total time per measurement block")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if not kern.HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(args.seed)
    print(f"active kernel set: {kern.ACTIVE}")
    header = f"{'kernel':<16} {'n':>3} {'dim':>5} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in args.qubits:
        calls = build_args(n, rng)
        for name in KERNELS:
            np_fn = getattr(kern, f"{name}_numpy")
            nb_fn = getattr(kern, f"{name}_numba")
            np_ms = _time_per_call(np_fn, calls[name], args.target_ms)
            nb_ms = _time_per_call(nb_fn, calls[name], args.target_ms)
            print(
                f"{name:<16} {n:>3} {1 << n:>5} {np_ms:>10.4f} {nb_ms:>10.4f} "
                f"{np_ms / nb_ms:>7.2f}x"
            )


if __name__ == "__main__":
    main()
