"""Quantum Fisher information of a measurement operator under no-click evolution.

State picture: F = 4 (<O^2> - <O>^2) in the normalized state psi(t).

Operator picture: the Heisenberg operator O(t) = e^{iH^dag t} O e^{-iHt} is
expanded in the Liouvillian bi-Lanczos basis,

    O(t) = sum_m i^m phi^R_m O_{r_m} = sum_n i^n phi^L_n O_{l_n},

with phi^R_m = (-i)^m <O_{l_m}|O(t)> and phi^L_n = (-i)^n <O_{r_n}|O(t)>, and

    F = 4/N^2 * 1/2 <O_R^dag O_L + O_R O_L^dag> - 4/N^4 <O_R^dag><O_L>,

expectations taken in psi(0) and N = |e^{-iHt} psi(0)|. Written out in the
phi coefficients this carries i^{m+n} (-1)^m on both the first and the last
term (``signs="consistent"``). ``signs="literal"`` drops the one-half and the
(-1)^m of the last term, the form usually quoted for this expansion; it is
kept so the two can be compared.

The left expansion only holds when O(t) lies in the span of the left basis,
which fails for gamma > 0; the relative residual is reported as
``left_leakage``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .bilanczos import OperatorKrylovBasis, operator_bilanczos, state_bilanczos
from .evolution import COND_LIMIT, TimeGrid, krylov_wavefunctions, propagate_exact_many
from .model import Hamiltonian
from .observables import time_average

PICTURES = ("state", "operator_full", "operator_diagonal")


@dataclass
class QfiSeries:
    times: np.ndarray
    values: np.ndarray
    picture: str = "state"


@dataclass
class FnProfile:
    n: np.ndarray
    f_n: np.ndarray  # (samples, K)
    times: np.ndarray


@dataclass
class OperatorQfi:
    full: QfiSeries
    diagonal: QfiSeries
    profile: FnProfile
    basis: OperatorKrylovBasis
    diagnostics: dict = field(default_factory=dict)


def _matrix(h) -> np.ndarray:
    return h.matrix if isinstance(h, Hamiltonian) else np.asarray(h, dtype=complex)


def _times(grid) -> np.ndarray:
    return grid.times if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)


def _require_hermitian(op: np.ndarray):
    if not np.allclose(op, op.conj().T, atol=1e-12):
        raise ValueError("the state picture needs a Hermitian operator")


def qfi_state(h, psi0: np.ndarray, op: np.ndarray, grid, method: str = "site") -> QfiSeries:
    """State-picture QFI.

    Args:
        h: Hamiltonian or matrix.
        psi0: Unit-norm initial state.
        op: Hermitian operator.
        grid: TimeGrid or array of times.
        method: ``"site"`` propagates in the site basis; ``"krylov"`` assembles
            the state from the bi-orthogonal Krylov expansion.
    """
    op = np.asarray(op, dtype=complex)
    _require_hermitian(op)
    t = _times(grid)
    if method == "site":
        psi, _ = propagate_exact_many(h, psi0, t)
    elif method == "krylov":
        basis = state_bilanczos(h, psi0)
        evo = krylov_wavefunctions(basis, t)
        psi = evo.psi_r @ basis.right_basis.T
        psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    else:
        raise ValueError(f"unknown method {method!r}")
    opsi = psi @ op.T
    e1 = np.einsum("ij,ij->i", psi.conj(), opsi).real
    e2 = np.einsum("ij,ij->i", opsi.conj(), opsi).real
    return QfiSeries(t, 4 * (e2 - e1**2), "state")


def _scaled_propagators(m: np.ndarray, times: np.ndarray):
    """Yield (U_s, s*t) with e^{-iHt} = U_s exp(s t)."""
    w, v = np.linalg.eig(m)
    s = max(float(w.imag.max()), 0.0)
    if np.linalg.cond(v) <= COND_LIMIT:
        vi = np.linalg.inv(v)
        for t in times:
            yield (v * np.exp(-1j * w * t - s * t)) @ vi, s * t
    else:
        shifted = m - 1j * s * np.eye(len(m))
        for t in times:
            yield sla.expm(-1j * shifted * t), s * t


def heisenberg_operator(h, op: np.ndarray, t: float) -> np.ndarray:
    """O(t) = e^{iH^dag t} O e^{-iHt} (unscaled)."""
    u = sla.expm(-1j * _matrix(h) * t)
    return u.conj().T @ op @ u


def qfi_operator_dense(h, psi0: np.ndarray, op: np.ndarray, grid) -> QfiSeries:
    """Heisenberg-picture QFI from the dense O(t), no Krylov expansion.

    Equals the Krylov operator picture whenever O(t) lies in both Krylov
    spans (always at gamma = 0).
    """
    m = _matrix(h)
    t = _times(grid)
    psi0 = np.asarray(psi0, dtype=complex)
    out = np.empty(len(t))
    for i, (us, st) in enumerate(_scaled_propagators(m, t)):
        ns2 = np.linalg.norm(us @ psi0) ** 2
        o = us.conj().T @ op @ us
        x, y = o @ psi0, o.conj().T @ psi0
        quad = 0.5 * (np.vdot(x, x) + np.vdot(y, y)).real / ns2
        mean = abs(np.vdot(psi0, x)) ** 2 / ns2**2
        with np.errstate(over="ignore"):
            out[i] = 4 * (quad * np.exp(2 * st) - mean)
    return QfiSeries(t, out, "operator_full")


def qfi_operator(
    h,
    psi0: np.ndarray,
    op: np.ndarray,
    grid,
    basis: OperatorKrylovBasis | None = None,
    signs: str = "consistent",
    norm_const: float | None = None,
    max_dim: int | None = None,
) -> OperatorQfi:
    """Operator-picture QFI, full double sum and diagonal part.

    Args:
        h: Hamiltonian or matrix.
        psi0: Unit-norm initial state.
        op: Measurement operator.
        grid: TimeGrid or array of times.
        basis: Precomputed operator Krylov basis for ``op``.
        signs: ``"consistent"`` or ``"literal"``, see the module docstring.
        norm_const: Operator inner-product prefactor, 1/sqrt(D) by default.
        max_dim: Cap on the operator Krylov dimension when ``basis`` is built
            here; see ``model.sublattice_krylov_dim``.

    Returns:
        OperatorQfi with both series, the f_n profile and diagnostics
        (phi consistency, left-span leakage, imaginary residue).
    """
    if signs not in ("consistent", "literal"):
        raise ValueError(f"unknown sign convention {signs!r}")
    m = _matrix(h)
    t = _times(grid)
    op = np.asarray(op, dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    if basis is None:
        basis = operator_bilanczos(m, op, norm_const=norm_const, max_dim=max_dim)
    k = basis.dim
    nc = basis.norm_const
    rflat = basis.right_ops.reshape(k, -1)
    lflat = basis.left_ops.reshape(k, -1)
    rconj, lconj = rflat.conj(), lflat.conj()
    # expectation tables in psi(0)
    x = basis.right_ops @ psi0
    y = basis.left_ops @ psi0
    xd = basis.right_ops.conj().transpose(0, 2, 1) @ psi0
    yd = basis.left_ops.conj().transpose(0, 2, 1) @ psi0
    a_mn = x.conj() @ y.T  # <O_rm^dag O_ln>
    b_mn = xd.conj() @ yd.T  # <O_rm O_ln^dag>
    e_m = xd @ psi0.conj()  # <O_rm^dag>
    g_n = y @ psi0.conj()  # <O_ln>
    ad, bd = np.diag(a_mn), np.diag(b_mn)
    alt = (-1.0) ** np.arange(k)

    full = np.empty(len(t))
    diag = np.empty(len(t))
    fn = np.empty((len(t), k))
    cons = np.empty(len(t))
    leak = np.empty(len(t))
    imag = np.empty(len(t))
    ph = (-1j) ** np.arange(k)
    for i, (us, st) in enumerate(_scaled_propagators(m, t)):
        ns2 = np.linalg.norm(us @ psi0) ** 2
        o = (us.conj().T @ op @ us).ravel()
        cr = nc * (lconj @ o)
        cl = nc * (rconj @ o)
        g2 = np.exp(2 * st)
        t1 = cr.conj() @ a_mn @ cl
        t2 = cr @ b_mn @ cl.conj()
        w = cr.conj() * cl
        if signs == "consistent":
            t3 = (cr.conj() @ e_m) * (cl @ g_n)
            quad, lin = 0.5 * (t1 + t2), t3
            fquad, flin = 0.5 * (ad + bd), e_m * g_n
        else:
            t3 = ((alt * cr.conj()) @ e_m) * (cl @ g_n)
            quad, lin = t1 + t2, t3
            fquad, flin = ad + bd, alt * e_m * g_n
        with np.errstate(over="ignore", invalid="ignore"):
            val = 4 * quad / ns2 * g2 - 4 * lin / ns2**2
            size = abs(4 * quad / ns2 * g2) + abs(4 * lin / ns2**2)
            fn_i = 4 * fquad / (ns2 * g2) - 4 * flin / (ns2 * g2) ** 2
            dval = (w * (4 * fquad * g2 / ns2 - 4 * flin / ns2**2)).sum()
        full[i] = val.real
        imag[i] = abs(val.imag) / max(size, 1e-300)
        diag[i] = dval.real
        fn[i] = fn_i.real
        phr, phl = ph * cr, ph * cl
        m1 = np.outer(phr.conj(), phl)
        m2 = np.outer(phr, phl.conj())
        cons[i] = np.abs(m1 - m2).max() / max(np.abs(m1).max(), 1e-300)
        leak[i] = np.linalg.norm(o - cl @ lflat) / max(np.linalg.norm(o), 1e-300)
    diagnostics = {
        "phi_consistency": float(cons.max()),
        "left_leakage": float(leak.max()),
        "imag_residue": float(imag.max()),
        "krylov_dim": k,
        "signs": signs,
    }
    return OperatorQfi(
        QfiSeries(t, full, "operator_full"),
        QfiSeries(t, diag, "operator_diagonal"),
        FnProfile(np.arange(k), fn, t),
        basis,
        diagnostics,
    )


def averaged_qfi(series: QfiSeries, t_ref: float | None = None) -> float:
    return time_average(series.values, t_ref, times=series.times)
