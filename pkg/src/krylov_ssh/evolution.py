"""No-click evolution in the site basis and in a bi-orthogonal Krylov basis.

Every sample is propagated from t=0 through a spectral decomposition, so
samples are independent and nothing accumulates step to step. Exponential
growth in the broken phase is factored out as a per-sample log scale.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .bilanczos import KrylovBasis
from .model import Hamiltonian

log = logging.getLogger(__name__)

COND_LIMIT = 1e8


@dataclass(frozen=True)
class TimeGrid:
    t_max: float = 50.0
    dt: float = 0.1

    def __post_init__(self):
        if self.dt <= 0 or self.t_max < self.dt:
            raise ValueError("need dt > 0 and t_max >= dt")

    @property
    def samples(self) -> int:
        return int(round(self.t_max / self.dt)) + 1

    @property
    def times(self) -> np.ndarray:
        # integer multiples of dt so refined grids share samples exactly
        return np.arange(self.samples) * self.dt


@dataclass
class KrylovState:
    t: float
    psi_r: np.ndarray
    psi_l: np.ndarray
    norm_factor: float


@dataclass
class KrylovEvolution:
    """Krylov amplitudes on a time grid.

    Attributes:
        times: Sample times.
        psi_r: (n, K) right amplitudes after dynamic normalization.
        psi_l: (n, K) left amplitudes after dynamic normalization.
        norm_factor: sqrt(sum_j |Psi^r_j* Psi^l_j|) before normalization.
        trace_norm: |e^{-iTt} e_1|, the normalizer of the Krylov density matrix.
        log_scale: Natural log of the growth factor removed from both norms.
        mode: ``"projected"`` or ``"adjoint"``.
    """

    times: np.ndarray
    psi_r: np.ndarray
    psi_l: np.ndarray
    norm_factor: np.ndarray
    trace_norm: np.ndarray
    log_scale: np.ndarray
    mode: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.psi_r.conj() * self.psi_l)

    def states(self) -> list[KrylovState]:
        return [
            KrylovState(float(t), r, l, float(n))
            for t, r, l, n in zip(self.times, self.psi_r, self.psi_l, self.norm_factor)
        ]


def _matrix(h) -> np.ndarray:
    return h.matrix if isinstance(h, Hamiltonian) else np.asarray(h, dtype=complex)


def _eig_or_none(m: np.ndarray):
    w, v = np.linalg.eig(m)
    if np.linalg.cond(v) > COND_LIMIT:
        return None
    return w, v, np.linalg.inv(v)


def evolve_vectors(m: np.ndarray, v0: np.ndarray, times: np.ndarray):
    """Unnormalized e^{-i m t} v0 for each t, with growth factored out.

    Returns:
        Tuple (vecs, log_scale): ``vecs[i] * exp(log_scale[i])`` is the
        unnormalized propagated vector. ``vecs[i]`` has unit norm.
    """
    times = np.asarray(times, dtype=float)
    out = np.empty((len(times), len(v0)), dtype=complex)
    logs = np.empty(len(times))
    dec = _eig_or_none(m)
    if dec is not None:
        w, v, vi = dec
        coef = vi @ v0
        for i, t in enumerate(times):
            ph = -1j * w * t
            shift = ph.real.max()
            x = v @ (np.exp(ph - shift) * coef)
            nrm = np.linalg.norm(x)
            out[i] = x / nrm
            logs[i] = shift + np.log(nrm)
    else:
        log.info("eigenvector matrix ill-conditioned, using expm")
        # a crude growth bound keeps expm in range
        s = max(np.linalg.eigvals(m).imag.max(), 0.0)
        for i, t in enumerate(times):
            x = sla.expm(-1j * (m - 1j * s * np.eye(len(m))) * t) @ v0
            nrm = np.linalg.norm(x)
            out[i] = x / nrm
            logs[i] = s * t + np.log(nrm)
    return out, logs


def propagate_exact(h, psi0: np.ndarray, t: float) -> np.ndarray:
    """Unit-norm e^{-iHt} psi0 in the site basis."""
    vecs, _ = evolve_vectors(_matrix(h), np.asarray(psi0, dtype=complex), np.array([t]))
    return vecs[0]


def propagate_exact_many(h, psi0: np.ndarray, times: np.ndarray):
    """Unit-norm states and log norms ln|e^{-iHt} psi0| on a grid."""
    return evolve_vectors(_matrix(h), np.asarray(psi0, dtype=complex), times)


def krylov_wavefunctions(
    basis: KrylovBasis,
    grid: TimeGrid | np.ndarray,
    mode: str = "projected",
    h=None,
    leak_tol: float = 1e-6,
) -> KrylovEvolution:
    """Krylov amplitudes with dynamic normalization.

    In ``projected`` mode the right amplitudes are ``<l_j|psi(t)>`` with
    psi(t) = R e^{-iTt} e_1, and the left amplitudes are ``<r_j|psi(t)>``,
    the same state seen from the other basis. In ``adjoint`` mode the left
    amplitudes are instead propagated with T^dagger.

    Args:
        basis: Output of state_bilanczos.
        grid: TimeGrid or explicit array of times.
        mode: ``"projected"`` (default) or ``"adjoint"``.
        h: Optional Hamiltonian used to check leakage when the basis is
            smaller than the full space.
        leak_tol: Leakage threshold for the diagnostic.

    Returns:
        KrylovEvolution.
    """
    times = grid.times if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    k = basis.dim
    t_mat = basis.tridiagonal()
    e1 = np.zeros(k, dtype=complex)
    e1[0] = 1.0
    phi, logs = evolve_vectors(t_mat, e1, times)
    with np.errstate(over="ignore"):
        trace_norm = np.exp(logs)
    if mode == "projected":
        gram = basis.right_basis.conj().T @ basis.right_basis
        psi_r = phi
        psi_l = phi @ gram.T
        log_l = logs
    elif mode == "adjoint":
        psi_r = phi
        psi_l, log_l = evolve_vectors(t_mat.conj().T, e1, times)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    overlap = np.abs(psi_r.conj() * psi_l).sum(axis=1)
    norm = np.sqrt(overlap)
    psi_r = psi_r / norm[:, None]
    psi_l = psi_l / norm[:, None]
    # norm_factor in absolute units (may overflow to inf deep in the broken phase)
    with np.errstate(over="ignore"):
        norm_abs = norm * np.exp(0.5 * (logs + log_l))
    diag = {"leakage": 0.0}
    if h is not None and k < basis.right_basis.shape[0]:
        psi0 = basis.right_basis[:, 0]
        ex, _ = propagate_exact_many(h, psi0, times[-1:])
        resid = ex[0] - basis.right_basis @ (basis.left_basis.conj().T @ ex[0])
        diag["leakage"] = float(np.linalg.norm(resid))
        if diag["leakage"] > leak_tol:
            log.warning("Krylov basis leaks %.2e of the exact state", diag["leakage"])
    return KrylovEvolution(times, psi_r, psi_l, norm_abs, trace_norm, logs, mode, diag)


def krylov_density_matrix(state: KrylovState) -> np.ndarray:
    """rho = |phi><phi| with phi the trace-normalized right amplitude vector."""
    phi = state.psi_r / np.linalg.norm(state.psi_r)
    return np.outer(phi, phi.conj())


def site_states(basis: KrylovBasis, evo: KrylovEvolution) -> np.ndarray:
    """Unit-norm site-basis states reconstructed from the right amplitudes."""
    psi = evo.psi_r @ basis.right_basis.T
    return psi / np.linalg.norm(psi, axis=1, keepdims=True)
