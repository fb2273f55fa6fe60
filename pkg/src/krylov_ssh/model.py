"""Single-particle non-Hermitian SSH chain.

Sites are interleaved as A1, B1, A2, B2, ..., so site index ``2j`` is the A
site of cell ``j`` and ``2j + 1`` its B partner (zero based).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

PT_TOL = 1e-12


class Boundary(str, enum.Enum):
    OPEN = "open"
    PERIODIC = "periodic"


class PhaseLabel(str, enum.Enum):
    PT_SYMMETRIC = "pt_symmetric"
    PT_CRITICAL = "pt_critical"
    PT_BROKEN = "pt_broken"


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the monitored SSH chain.

    Args:
        w: Intra-cell hopping.
        v: Inter-cell hopping.
        gamma: Measurement rate, the strength of the imaginary staggered potential.
        cells: Number of unit cells ``L``.
        boundary: ``"open"`` or ``"periodic"``.
    """

    w: float = 1.5
    v: float = 0.5
    gamma: float = 0.0
    cells: int = 20
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if not (math.isfinite(self.w) and math.isfinite(self.v)):
            raise ValueError("hoppings must be finite")
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError("gamma must be a finite non-negative number")
        if int(self.cells) != self.cells or self.cells < 1:
            raise ValueError("cells must be a positive integer")
        object.__setattr__(self, "cells", int(self.cells))

    @property
    def dim(self) -> int:
        return 2 * self.cells

    def with_gamma(self, gamma: float) -> "ModelParams":
        return ModelParams(self.w, self.v, gamma, self.cells, self.boundary)


@dataclass(frozen=True)
class Hamiltonian:
    matrix: np.ndarray
    params: ModelParams

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectrumPoint:
    k: float
    eps_plus: complex
    eps_minus: complex


def sublattice_signs(cells: int) -> np.ndarray:
    """+1 on A sites, -1 on B sites."""
    return np.tile([1.0, -1.0], cells)


def build_hamiltonian(params: ModelParams) -> Hamiltonian:
    """Dense 2L x 2L Hamiltonian in the interleaved site basis.

    Args:
        params: Model parameters.

    Returns:
        Hamiltonian wrapping the complex matrix.
    """
    L = params.cells
    h = np.zeros((2 * L, 2 * L), dtype=complex)
    for j in range(L):
        a, b = 2 * j, 2 * j + 1
        h[a, b] = h[b, a] = -params.w
    bonds = range(L) if params.boundary is Boundary.PERIODIC else range(L - 1)
    for j in bonds:
        a = 2 * j
        bn = (2 * (j + 1) + 1) % (2 * L)
        # for L=1 under PBC the wrapped bond lands on the intra-cell pair
        h[a, bn] += -params.v
        h[bn, a] += -params.v
    h[np.diag_indices(2 * L)] += -1j * params.gamma * sublattice_signs(L)
    return Hamiltonian(h, params)


def dispersion(params: ModelParams, k: float) -> SpectrumPoint:
    """Bloch energies +/- sqrt(w^2 + v^2 - gamma^2 + 2 w v cos k), principal branch."""
    w, v, g = params.w, params.v, params.gamma
    eps = np.sqrt(complex(w * w + v * v - g * g + 2 * w * v * math.cos(k)))
    return SpectrumPoint(float(k), complex(eps), complex(-eps))


def dispersion_grid(params: ModelParams, ks: np.ndarray) -> np.ndarray:
    """Vectorised upper band over an array of momenta."""
    w, v, g = params.w, params.v, params.gamma
    return np.sqrt((w * w + v * v - g * g + 2 * w * v * np.cos(ks)).astype(complex))


def bloch_matrix(params: ModelParams, k: float) -> np.ndarray:
    eta = -(params.w + params.v * np.exp(-1j * k))
    g = params.gamma
    return np.array([[-1j * g, eta], [np.conj(eta), 1j * g]])


def classify_pt_phase(params: ModelParams) -> PhaseLabel:
    gap = params.gamma - abs(params.w - params.v)
    if abs(gap) <= PT_TOL:
        return PhaseLabel.PT_CRITICAL
    return PhaseLabel.PT_SYMMETRIC if gap < 0 else PhaseLabel.PT_BROKEN


def exceptional_momentum(params: ModelParams) -> float | None:
    """Momentum where the two bands coalesce.

    Returns ``None`` in the symmetric phase, once the radicand exceeds one
    (every mode is already imaginary), and when w v <= 0 leaves it undefined.
    """
    w, v, g = params.w, params.v, params.gamma
    d2 = (w - v) ** 2
    if g * g < d2 and classify_pt_phase(params) is PhaseLabel.PT_SYMMETRIC:
        return None
    if w * v <= 0:
        return None
    arg = max(g * g - d2, 0.0) / (4 * w * v)
    if arg > 1 + PT_TOL:
        return None
    return 2.0 * math.acos(math.sqrt(min(arg, 1.0)))


def measurement_operator(params: ModelParams, kind: str = "n_A") -> np.ndarray:
    """Sublattice measurement operator in the single-particle sector.

    ``one_minus_n_B`` is I - P_B, which coincides with ``n_A`` here since each
    site belongs to exactly one sublattice. Both are kept so the two labels can
    be reported separately.
    """
    a_mask = (sublattice_signs(params.cells) > 0).astype(float)
    if kind == "n_A":
        return np.diag(a_mask).astype(complex)
    if kind == "one_minus_n_B":
        return (np.eye(params.dim) - np.diag(1.0 - a_mask)).astype(complex)
    raise ValueError(f"unknown measurement operator {kind!r}")


def sublattice_krylov_dim(params: ModelParams) -> int:
    """Liouvillian Krylov dimension of the sublattice density.

    2L + 1 for an open chain and 2 floor(L/2) + 3 for a ring, at every gamma.
    Deep in the broken phase the operator recursion is too non-normal for its
    residual to reveal exhaustion in floating point, so operator-picture
    callers pass this count as ``max_dim``.
    """
    if params.boundary is Boundary.OPEN:
        return 2 * params.cells + 1
    return 2 * (params.cells // 2) + 3


def full_spectrum(h: Hamiltonian) -> np.ndarray:
    """Eigenvalues sorted by real part, then imaginary part."""
    try:
        ev = np.linalg.eigvals(h.matrix)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed: {exc}") from exc
    order = np.lexsort((np.round(ev.imag, 12), np.round(ev.real, 12)))
    return ev[order]


def localized_state(dim: int, site: int) -> np.ndarray:
    """Unit vector on a 1-based site index."""
    if not 1 <= site <= dim:
        raise ValueError(f"site {site} outside [1, {dim}]")
    psi = np.zeros(dim, dtype=complex)
    psi[site - 1] = 1.0
    return psi


def pair_state(dim: int, s1: int, s2: int) -> np.ndarray:
    psi = localized_state(dim, s1) + localized_state(dim, s2)
    return psi / np.linalg.norm(psi)
