import numpy as np
import pytest

from krylov_ssh.bilanczos import state_bilanczos
from krylov_ssh.evolution import (
    TimeGrid,
    evolve_vectors,
    krylov_density_matrix,
    krylov_wavefunctions,
    propagate_exact,
    propagate_exact_many,
    site_states,
)
from krylov_ssh.model import ModelParams, build_hamiltonian, localized_state
from oracles import rk4_no_click


def _setup(gamma, cells=4, site=3):
    p = ModelParams(1.5, 0.5, gamma, cells)
    h = build_hamiltonian(p)
    psi0 = localized_state(p.dim, site)
    return h, psi0, state_bilanczos(h, psi0)


def test_time_grid():
    g = TimeGrid(1.0, 0.1)
    assert g.samples == 11
    assert g.times[3] == 3 * 0.1
    with pytest.raises(ValueError):
        TimeGrid(1.0, 0.0)


def test_propagate_identity_at_zero():
    h, psi0, _ = _setup(1.4)
    np.testing.assert_allclose(propagate_exact(h, psi0, 0.0), psi0, atol=1e-12)


def test_unitary_norm():
    h, psi0, _ = _setup(0.0)
    _, logs = evolve_vectors(h.matrix, psi0, np.linspace(0, 7, 8))
    np.testing.assert_allclose(logs, 0.0, atol=1e-10)


def test_rk4_oracle():
    h, psi0, _ = _setup(1.4)
    ref = rk4_no_click(h.matrix, psi0, 1.0)
    np.testing.assert_allclose(propagate_exact(h, psi0, 1.0), ref, atol=1e-6)


def test_expm_fallback_matches_eig():
    # Jordan block: eig basis is singular so the expm branch is taken
    m = np.array([[1j, 1.0], [0.0, 1j]])
    v0 = np.array([0.0, 1.0 + 0j])
    vecs, logs = evolve_vectors(m, v0, np.array([0.5, 2.0]))
    for t, v, lg in zip([0.5, 2.0], vecs, logs):
        exact = np.array([-1j * t, 1.0]) * np.exp(t)
        np.testing.assert_allclose(v * np.exp(lg), exact, atol=1e-10)


def test_initial_amplitudes():
    _, _, b = _setup(1.4)
    evo = krylov_wavefunctions(b, TimeGrid(2.0, 0.5))
    e1 = np.eye(b.dim)[0]
    np.testing.assert_allclose(evo.psi_r[0], e1, atol=1e-12)
    np.testing.assert_allclose(evo.psi_l[0], e1, atol=1e-12)
    np.testing.assert_allclose(evo.probabilities[0], e1, atol=1e-12)


@pytest.mark.parametrize("mode", ["projected", "adjoint"])
@pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0, 1.4, 2.4])
def test_probabilities_sum_to_one(mode, gamma):
    _, _, b = _setup(gamma, 6, 5)
    evo = krylov_wavefunctions(b, TimeGrid(20.0, 0.1), mode=mode)
    np.testing.assert_allclose(evo.probabilities.sum(axis=1), 1.0, atol=1e-10)


def test_projection_oracle():
    h, psi0, b = _setup(1.4)
    evo = krylov_wavefunctions(b, np.array([1.0]))
    ex = propagate_exact(h, psi0, 1.0)
    scale = np.linalg.norm(b.right_basis @ evo.psi_r[0])
    np.testing.assert_allclose(evo.psi_r[0] / scale, b.left_basis.conj().T @ ex, atol=1e-6)
    np.testing.assert_allclose(site_states(b, evo)[0], ex, atol=1e-6)


def test_modes_agree_at_gamma_zero():
    _, _, b = _setup(0.0, 5, 4)
    grid = TimeGrid(5.0, 0.25)
    a = krylov_wavefunctions(b, grid, "projected")
    c = krylov_wavefunctions(b, grid, "adjoint")
    np.testing.assert_allclose(a.psi_l, c.psi_l, atol=1e-10)


def test_unknown_mode():
    _, _, b = _setup(0.5)
    with pytest.raises(ValueError):
        krylov_wavefunctions(b, TimeGrid(1.0, 0.5), mode="sideways")


def test_density_matrix():
    _, _, b = _setup(0.5)
    states = krylov_wavefunctions(b, np.array([0.0, 2.0])).states()
    rho0 = krylov_density_matrix(states[0])
    np.testing.assert_allclose(rho0, np.diag(np.eye(b.dim)[0]), atol=1e-12)
    rho = krylov_density_matrix(states[1])
    assert abs(np.trace(rho) - 1) < 1e-12
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
    np.testing.assert_allclose(rho @ rho, rho, atol=1e-8)


def test_propagate_many_consistent():
    h, psi0, _ = _setup(2.0)
    ts = np.array([0.3, 4.0])
    many, _ = propagate_exact_many(h, psi0, ts)
    for t, v in zip(ts, many):
        np.testing.assert_allclose(v, propagate_exact(h, psi0, t), atol=1e-12)
