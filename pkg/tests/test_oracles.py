"""Dense reference machinery: norms, exponentials, Liouvillian evolution."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from collidesim import (
    DensityMatrix,
    JumpOp,
    LindbladModel,
    Liouvillian,
    PauliSum,
    amp_damp_model,
    lindblad_evolve,
    spectral_norm,
    trace_distance,
    unitary_exact,
)


def _rand_rho(rng, n):
    dim = 1 << n
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return DensityMatrix(rho / np.trace(rho))


def test_spectral_norm_is_largest_singular_value():
    rng = np.random.default_rng(51)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert spectral_norm(a) == pytest.approx(np.linalg.svd(a, compute_uv=False)[0])


def test_trace_distance_conventions():
    zero = DensityMatrix.basis(1, 0)
    one = DensityMatrix.basis(1, 1)
    assert trace_distance(zero, one) == pytest.approx(2.0)
    assert trace_distance(zero, zero) == pytest.approx(0.0)
    # triangle inequality on random triples
    rng = np.random.default_rng(53)
    for _ in range(20):
        a, b, c = (_rand_rho(rng, 2) for _ in range(3))
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12


def test_unitary_exact_matches_expm():
    h = PauliSum.from_labels([(0.8, "XZ"), (0.4, "-YI"), (0.3, "ZZ")])
    for tau in (0.0, 0.3, 2.1):
        np.testing.assert_allclose(
            unitary_exact(h, tau), expm(-1j * tau * h.to_dense()), atol=1e-12
        )


def test_liouvillian_matches_term_by_term():
    # vectorized generator vs the commutator/dissipator formula applied densely
    rng = np.random.default_rng(55)
    model = amp_damp_model(2, J=0.9, h=0.4, gamma=0.7)
    liou = Liouvillian(model)
    h = model.system_h.to_dense()
    rho = _rand_rho(rng, 2).data
    want = -1j * (h @ rho - rho @ h)
    for jump in model.jumps:
        a = np.asarray(jump.op)
        ada = a.conj().T @ a
        want += a @ rho @ a.conj().T - 0.5 * (ada @ rho + rho @ ada)
    np.testing.assert_allclose(liou.apply(rho), want, atol=1e-12)
    # the generator annihilates every fixed point's trace: columns sum to tr L[rho] = 0
    assert np.abs(liou.apply(rho).trace()) < 1e-12
    assert liou.gamma_bound() > 0


def test_amplitude_damping_analytic():
    # single qubit, gamma = 1, rho0 = |1><1|: <sz>(t) = 1 - 2 e^{-t}
    model = amp_damp_model(1, J=0.0, h=0.0, gamma=1.0)
    rho0 = DensityMatrix.basis(1, 1)
    for t in (0.25, 1.0, 2.0):
        out = lindblad_evolve(model, rho0, t)
        sz = float((out.data[0, 0] - out.data[1, 1]).real)
        assert sz == pytest.approx(1.0 - 2.0 * math.exp(-t), abs=1e-9)


def test_expm_and_rk_paths_agree():
    model = amp_damp_model(2, J=1.0, h=0.3, gamma=0.8)
    rho0 = DensityMatrix.basis(2, 1)
    a = lindblad_evolve(model, rho0, 0.7, method="expm")
    b = lindblad_evolve(model, rho0, 0.7, method="rk", tol=1e-11)
    assert trace_distance(a, b) < 1e-8
    with pytest.raises(ValueError):
        lindblad_evolve(model, rho0, 0.7, method="cranknicolson")


def test_evolution_preserves_state_structure():
    rng = np.random.default_rng(57)
    model = amp_damp_model(2, J=0.5, h=0.2, gamma=1.3)
    rho = _rand_rho(rng, 2)
    out = lindblad_evolve(model, rho, 1.5)
    assert abs(out.trace() - 1.0) < 1e-10
    vals = np.linalg.eigvalsh(out.data)
    assert vals.min() > -1e-10
    # CPTP maps contract trace distance
    sigma = _rand_rho(rng, 2)
    d_out = trace_distance(out, lindblad_evolve(model, sigma, 1.5))
    assert d_out <= trace_distance(rho, sigma) + 1e-10


def test_custom_jump_model():
    # dephasing: L = sqrt(g) Z kills coherence at rate 2g, keeps populations
    g = 0.6
    z = np.diag([1.0, -1.0]).astype(np.complex128)
    # empty interaction: this model only feeds the dense oracle
    model = LindbladModel(
        1,
        PauliSum(1, []),
        (JumpOp(math.sqrt(g) * z, PauliSum(2, []), g),),
    )
    plus = DensityMatrix.plus()
    out = lindblad_evolve(model, plus, 1.0)
    assert out.data[0, 0].real == pytest.approx(0.5, abs=1e-10)
    assert out.data[0, 1].real == pytest.approx(0.5 * math.exp(-2.0 * g), abs=1e-9)
