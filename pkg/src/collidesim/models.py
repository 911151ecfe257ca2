"""Benchmark models: transverse-field Ising system with per-site amplitude
damping, thermal environment qubits, and the magnetization observable.

Site indices are 0-based. Interaction sums live on n+1 qubits with the
environment qubit appended last (qubit n), matching how collision programs
stack a fresh env register below the system.
"""

import math
from dataclasses import dataclass

import numpy as np

from .pauli import PauliString, PauliSum
from .states import DensityMatrix, Observable, tensor_append

_SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)  # |0><1|


def tfim_hamiltonian(m, J=1.0, h=0.1, periodic=False):
    """-J sum_i Z_i Z_{i+1} - h sum_i X_i on an m-site chain (open boundary)."""
    if m < 2:
        raise ValueError(f"TFIM chain needs m >= 2 sites, got {m}")
    pairs = [(i, i + 1) for i in range(m - 1)]
    if periodic:
        pairs.append((m - 1, 0))
    terms = []
    for i, j in pairs:
        axes = "".join("Z" if q in (i, j) else "I" for q in range(m))
        terms.append((-J, PauliString.from_label(axes)))
    for i in range(m):
        axes = "".join("X" if q == i else "I" for q in range(m))
        terms.append((-h, PauliString.from_label(axes)))
    return PauliSum(m, terms)


def field_hamiltonian(m, h):
    """-h sum_i X_i; the m = 1 degeneration of the benchmark system."""
    terms = []
    for i in range(m):
        axes = "".join("X" if q == i else "I" for q in range(m))
        terms.append((-h, PauliString.from_label(axes)))
    return PauliSum(m, terms)


def magnetization(m):
    """(1/m) sum_i Z_i as an Observable (spectral norm 1)."""
    terms = []
    for i in range(m):
        axes = "".join("Z" if q == i else "I" for q in range(m))
        terms.append((1.0 / m, PauliString.from_label(axes)))
    return Observable(PauliSum(m, terms))


def amp_damp_interaction(site, gamma, m):
    """(sqrt(gamma)/2)(X_site X_env + Y_site Y_env) on m system + 1 env qubits.

    Equals sqrt(gamma)(sigma^+_site sigma^-_env + h.c.), the exchange coupling
    whose collision limit generates amplitude damping at rate gamma.
    """
    if not 0 <= site < m:
        raise ValueError(f"site {site} outside chain of {m}")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    c = math.sqrt(gamma) / 2.0
    xx = "".join("X" if q in (site, m) else "I" for q in range(m + 1))
    yy = "".join("Y" if q in (site, m) else "I" for q in range(m + 1))
    return PauliSum(
        m + 1, [(c, PauliString.from_label(xx)), (c, PauliString.from_label(yy))]
    )


def amp_damp_jump(site, gamma, n):
    """Dense sqrt(gamma) sigma^- acting on the given site of n qubits."""
    if not 0 <= site < n:
        raise ValueError(f"site {site} outside register of {n}")
    out = np.array([[1.0]], dtype=np.complex128)
    for q in range(n):
        out = np.kron(out, _SIGMA_MINUS if q == site else np.eye(2))
    return math.sqrt(gamma) * out


def thermal_env_state(omega):
    """(|0><0| + e^{-omega}|1><1|) / (1 + e^{-omega}); omega = inf is |0><0|."""
    if omega < 0:
        raise ValueError("omega must be >= 0 (or inf)")
    if math.isinf(omega):
        return DensityMatrix.basis(1, 0)
    w = math.exp(-omega)
    data = np.diag([1.0 / (1.0 + w), w / (1.0 + w)]).astype(np.complex128)
    return DensityMatrix(data, check=False)


@dataclass(frozen=True)
class ThermalPrep:
    """Picklable factory producing a product of thermal env qubits."""

    omega: float
    width: int = 1

    def __call__(self):
        state = thermal_env_state(self.omega)
        for _ in range(self.width - 1):
            state = tensor_append(state, thermal_env_state(self.omega))
        return state


@dataclass(frozen=True)
class JumpOp:
    """One dissipation channel: dense jump operator (rate folded in), the
    Pauli-sum system-env coupling that realizes it in collisions, and rate."""

    op: np.ndarray
    interaction: PauliSum
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("rate must be >= 0")


@dataclass(frozen=True)
class LindbladModel:
    """dρ/dt = -i[H, ρ] + sum_j (A_j ρ A_j† - {A_j†A_j, ρ}/2)."""

    n: int
    system_h: PauliSum
    jumps: tuple
    env_omega: float = math.inf
    env_strength: float = 1.0  # beta_E of the env Hamiltonian beta_E * sigma^z

    def __post_init__(self):
        if len(self.jumps) < 1:
            raise ValueError("need at least one jump channel")
        if self.system_h.n != self.n:
            raise ValueError("system Hamiltonian width mismatch")


def amp_damp_model(m, J=1.0, h=0.1, gamma=1.0, omega=math.inf):
    """TFIM chain with uniform per-site amplitude damping (field-only at m=1)."""
    system_h = tfim_hamiltonian(m, J, h) if m >= 2 else field_hamiltonian(m, h)
    jumps = tuple(
        JumpOp(amp_damp_jump(site, gamma, m), amp_damp_interaction(site, gamma, m), gamma)
        for site in range(m)
    )
    return LindbladModel(m, system_h, jumps, env_omega=omega)


def benchmark_spec(m, t, nu, J=1.0, h=0.1, gamma=1.0, omega=math.inf):
    """The damped-TFIM benchmark: (LindbladModel, its (m, nu) collision spec)."""
    from .collisions import lindblad_collision_spec

    model = amp_damp_model(m, J, h, gamma, omega)
    return model, lindblad_collision_spec(model, t, nu)
