"""Reference computations the sampled machinery is tested against.

Everything here is dense and direct: eigendecomposition exponentials, the
vectorized Liouvillian, and Schatten norms. Vectorization uses numpy's native
row-major flatten, vec(rho) = rho.reshape(-1), under which

    vec(A X B) = (A kron B^T) vec(X)

so the Hamiltonian part is -i(H kron I - I kron H^T) and each dissipator is
A kron conj(A) - (A†A kron I + I kron (A†A)^T)/2.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from ._limits import check_dense
from .errors import NumericalError
from .states import DensityMatrix

_EXPM_DIM_CAP = 4096  # largest 4^n the dense exponential path will touch


def spectral_norm(a):
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(a), 2))


def trace_distance(a, b):
    """Full Schatten-1 norm of the difference (orthogonal pure states give 2)."""
    da = a.data if isinstance(a, DensityMatrix) else np.asarray(a)
    db = b.data if isinstance(b, DensityMatrix) else np.asarray(b)
    return float(np.linalg.svd(da - db, compute_uv=False).sum())


def unitary_exact(h, tau):
    """e^{-i tau H} for a PauliSum H, via Hermitian eigendecomposition."""
    dense = h.to_dense()
    vals, vecs = np.linalg.eigh(dense)
    return (vecs * np.exp(-1j * tau * vals)) @ vecs.conj().T


class Liouvillian:
    """Dense 4^n x 4^n generator of a LindbladModel, row-major vectorization."""

    def __init__(self, model):
        check_dense(2 * model.n)  # the matrix is (2^n)^2 on a side
        dim = 1 << model.n
        eye = np.eye(dim, dtype=np.complex128)
        h = model.system_h.to_dense()
        mat = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
        for jump in model.jumps:
            a = np.asarray(jump.op, dtype=np.complex128)
            ada = a.conj().T @ a
            mat += np.kron(a, a.conj())
            mat -= 0.5 * (np.kron(ada, eye) + np.kron(eye, ada.T))
        self.n = model.n
        self.matrix = mat
        self._gamma = 2.0 * spectral_norm(h) + 2.0 * sum(
            spectral_norm(j.op) ** 2 for j in model.jumps
        )

    def apply(self, rho):
        """L[rho] as a dense matrix."""
        rho = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
        dim = 1 << self.n
        return (self.matrix @ rho.reshape(-1)).reshape(dim, dim)

    def gamma_bound(self):
        """Upper bound on sup ||L[rho]||_1/||rho||_1, the constant steering the
        collision-count analysis: 2||H|| + 2 sum_j ||A_j||^2. Diagnostic only;
        discretization depth is chosen empirically, not from this."""
        return self._gamma

    def __repr__(self):
        return f"Liouvillian(n={self.n})"


def lindblad_evolve(model, rho0, t, tol=1e-10, method="auto"):
    """Evolve rho0 for time t under the model's Liouvillian.

    method 'expm' exponentiates L*t densely (allowed up to 4^n = 4096),
    'rk' integrates with adaptive RK45 at local tolerance tol, 'auto' picks
    expm when it fits. The result is re-symmetrized; drift beyond 10*tol in
    trace or Hermiticity is a numerical failure.
    """
    liou = model if isinstance(model, Liouvillian) else Liouvillian(model)
    dim = 1 << liou.n
    rho = rho0.data if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=np.complex128)
    if method == "auto":
        method = "expm" if dim * dim <= _EXPM_DIM_CAP else "rk"
    if method == "expm":
        if dim * dim > _EXPM_DIM_CAP:
            raise ValueError(f"expm path capped at 4^n <= {_EXPM_DIM_CAP}")
        out = (expm(liou.matrix * t) @ rho.reshape(-1)).reshape(dim, dim)
    elif method == "rk":
        sol = solve_ivp(
            lambda _, y: liou.matrix @ y,
            (0.0, t),
            rho.reshape(-1).astype(np.complex128),
            method="RK45",
            rtol=tol,
            atol=tol,
        )
        if not sol.success:
            raise NumericalError(f"RK45 failed: {sol.message}")
        out = sol.y[:, -1].reshape(dim, dim)
    else:
        raise ValueError(f"unknown method {method!r}")
    herm_drift = np.abs(out - out.conj().T).max()
    trace_drift = abs(np.trace(out) - 1.0)
    if herm_drift > 10 * max(tol, 1e-12) or trace_drift > 10 * max(tol, 1e-12):
        raise NumericalError(
            f"integration drift: hermiticity {herm_drift:.3e}, trace {trace_drift:.3e}"
        )
    out = 0.5 * (out + out.conj().T)
    out = out / np.trace(out).real
    return DensityMatrix(out, check=False)
