"""Bi-orthogonal Lanczos for states and for operators under the Liouvillian.

Both variants share one two-sided recursion with full re-biorthogonalization
against every stored pair. The tridiagonal convention is

    T[j, j] = a_j,  T[j-1, j] = b_j,  T[j, j-1] = c_j,

so that ``H R = R T`` and ``L^dagger H R = T`` on the Krylov space, with
``b_0 = c_0 = 0``.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .model import Hamiltonian

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
# relative residual below which the Krylov space is treated as exhausted
DEFAULT_RTOL = 1e-6


@dataclass
class KrylovBasis:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    right_basis: np.ndarray
    left_basis: np.ndarray
    stop_reason: str = ""

    @property
    def dim(self) -> int:
        return len(self.a)

    def tridiagonal(self) -> np.ndarray:
        return tridiagonal(self.a, self.b, self.c)


@dataclass
class OperatorKrylovBasis:
    """Liouvillian Krylov basis.

    ``right_ops`` and ``left_ops`` have shape (K, D, D). ``a`` holds the
    diagonal of the tridiagonal Liouvillian; it vanishes in the Hermitian
    limit and is kept for reconstruction checks.
    """

    a: np.ndarray
    b_up: np.ndarray
    b_down: np.ndarray
    right_ops: np.ndarray
    left_ops: np.ndarray
    norm_const: float
    stop_reason: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.a)

    def tridiagonal(self) -> np.ndarray:
        return tridiagonal(self.a, self.b_up, self.b_down)

    def inner(self, x: np.ndarray, y: np.ndarray) -> complex:
        return self.norm_const * np.vdot(x, y)


def tridiagonal(a, b, c) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    t = np.diag(a)
    if len(a) > 1:
        t += np.diag(np.asarray(b[1:], dtype=complex), 1)
        t += np.diag(np.asarray(c[1:], dtype=complex), -1)
    return t


def _two_sided(
    apply: Callable[[np.ndarray], np.ndarray],
    apply_adj: Callable[[np.ndarray], np.ndarray],
    v0: np.ndarray,
    weight: float,
    tol: float,
    rtol: float,
    max_dim: int,
):
    """Generic recursion on flattened vectors with inner product weight*vdot."""
    n = v0.size
    kmax = min(max_dim, n)
    R = np.zeros((n, kmax), dtype=complex)
    Lm = np.zeros((n, kmax), dtype=complex)
    R[:, 0] = Lm[:, 0] = v0
    a = [weight * np.vdot(v0, apply(v0))]
    b, c = [0j], [0j]
    k = 1
    reason = "dimension"
    while k < kmax:
        j = k - 1
        ar = apply(R[:, j])
        bl = apply_adj(Lm[:, j])
        scale = max(np.linalg.norm(ar), np.linalg.norm(bl), 1e-300)
        alpha = ar - a[j] * R[:, j]
        beta = bl - np.conj(a[j]) * Lm[:, j]
        if j > 0:
            alpha -= b[j] * R[:, j - 1]
            beta -= np.conj(c[j]) * Lm[:, j - 1]
        for _ in range(2):
            alpha -= R[:, :k] @ (weight * (Lm[:, :k].conj().T @ alpha))
            beta -= Lm[:, :k] @ (weight * (R[:, :k].conj().T @ beta))
        ra, rb = np.linalg.norm(alpha), np.linalg.norm(beta)
        if min(ra, rb) < rtol * scale:
            reason = "invariant_subspace"
            break
        omega = weight * np.vdot(beta, alpha)
        if abs(omega) < tol:
            reason = "breakdown"
            log.warning("bi-Lanczos breakdown at step %d: |omega|=%.3e", k, abs(omega))
            break
        cn = np.sqrt(abs(omega))
        bn = omega / cn
        R[:, k] = alpha / cn
        Lm[:, k] = beta / np.conj(bn)
        b.append(bn)
        c.append(cn)
        a.append(weight * np.vdot(Lm[:, k], apply(R[:, k])))
        k += 1
    else:
        if kmax < n:
            reason = "max_dim"
    return np.array(a), np.array(b), np.array(c), R[:, :k], Lm[:, :k], reason


def _matrix(h) -> np.ndarray:
    return h.matrix if isinstance(h, Hamiltonian) else np.asarray(h, dtype=complex)


def state_bilanczos(
    h,
    psi0: np.ndarray,
    tol: float = DEFAULT_TOL,
    rtol: float = DEFAULT_RTOL,
    max_dim: int | None = None,
) -> KrylovBasis:
    """Bi-Lanczos tridiagonalization seeded with ``|r_0> = |l_0> = psi0``.

    Args:
        h: Hamiltonian or square matrix.
        psi0: Unit-norm seed vector.
        tol: Breakdown threshold on |omega_j|.
        rtol: Residual norm, relative to ``|H r_j|``, below which the Krylov
            space is considered exhausted.
        max_dim: Optional cap on the basis size.

    Returns:
        KrylovBasis with columns ``|r_j>`` and ``|l_j>``.
    """
    m = _matrix(h)
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValueError("psi0 must have unit norm")
    md = m.conj().T
    a, b, c, R, Lb, reason = _two_sided(
        lambda x: m @ x, lambda x: md @ x, psi0.copy(), 1.0, tol, rtol, max_dim or m.shape[0]
    )
    return KrylovBasis(a, b, c, R, Lb, reason)


def operator_inner(x: np.ndarray, y: np.ndarray, norm_const: float) -> complex:
    return norm_const * np.vdot(x, y)


def liouvillian(h) -> Callable[[np.ndarray], np.ndarray]:
    """O -> H^dagger O - O H."""
    m = _matrix(h)
    md = m.conj().T
    return lambda o: md @ o - o @ m


def operator_bilanczos(
    h,
    op0: np.ndarray,
    tol: float = DEFAULT_TOL,
    rtol: float = DEFAULT_RTOL,
    norm_const: float | None = None,
    normalize: bool = True,
    max_dim: int | None = None,
) -> OperatorKrylovBasis:
    """Bi-Lanczos on operator space driven by L O = H^dagger O - O H.

    Args:
        h: Hamiltonian or matrix of dimension D.
        op0: Seed operator, D x D.
        tol: Breakdown threshold on |omega_j|.
        rtol: Relative residual threshold for Krylov-space exhaustion.
        norm_const: Prefactor of the trace inner product; defaults to 1/sqrt(D).
        normalize: Rescale ``op0`` to unit norm first. With ``False`` the seed
            must already be normalized.
        max_dim: Upper bound on the basis size, D^2 by default.
    """
    m = _matrix(h)
    d = m.shape[0]
    nc = 1.0 / np.sqrt(d) if norm_const is None else float(norm_const)
    o = np.asarray(op0, dtype=complex)
    nrm = np.sqrt(operator_inner(o, o, nc).real)
    if normalize:
        o = o / nrm
    elif abs(nrm - 1) > 1e-10:
        raise ValueError("op0 must be normalized under the operator inner product")
    md = m.conj().T

    def apply(x):
        x = x.reshape(d, d)
        return (md @ x - x @ m).ravel()

    def apply_adj(x):
        x = x.reshape(d, d)
        return (m @ x - x @ md).ravel()

    a, bu, bd, R, Lb, reason = _two_sided(apply, apply_adj, o.ravel(), nc, tol, rtol, max_dim or d * d)
    k = len(a)
    return OperatorKrylovBasis(
        a, bu, bd, R.T.reshape(k, d, d), Lb.T.reshape(k, d, d), nc, reason, {"seed_norm": nrm}
    )


def biorthogonality_report(basis) -> float:
    """max |<l_i|r_j> - delta_ij| over the basis."""
    if isinstance(basis, OperatorKrylovBasis):
        k = basis.dim
        R = basis.right_ops.reshape(k, -1).T
        Lb = basis.left_ops.reshape(k, -1).T
        g = basis.norm_const * (Lb.conj().T @ R)
    else:
        g = basis.left_basis.conj().T @ basis.right_basis
    return float(np.abs(g - np.eye(g.shape[0])).max()) if g.size else 0.0


def reconstruction_error(h, basis: KrylovBasis) -> float:
    m = _matrix(h)
    t = basis.left_basis.conj().T @ m @ basis.right_basis
    return float(np.abs(t - basis.tridiagonal()).max())


def operator_reconstruction_error(h, basis: OperatorKrylovBasis) -> float:
    lv = liouvillian(h)
    k = basis.dim
    t = np.array(
        [[basis.inner(basis.left_ops[i], lv(basis.right_ops[j])) for j in range(k)] for i in range(k)]
    )
    return float(np.abs(t - basis.tridiagonal()).max())


def _cache_key(m: np.ndarray, psi0: np.ndarray, tol: float, rtol: float) -> str:
    hsh = hashlib.sha256()
    for arr in (m, psi0):
        hsh.update(np.ascontiguousarray(arr, dtype=complex).tobytes())
    hsh.update(np.array([tol, rtol]).tobytes())
    return hsh.hexdigest()[:24]


def cached_state_bilanczos(
    h, psi0: np.ndarray, cache_dir: str | Path, tol: float = DEFAULT_TOL, rtol: float = DEFAULT_RTOL
) -> KrylovBasis:
    """state_bilanczos with an on-disk .npz cache keyed by a content hash."""
    m = _matrix(h)
    path = Path(cache_dir) / f"basis_{_cache_key(m, psi0, tol, rtol)}.npz"
    if path.exists():
        z = np.load(path)
        return KrylovBasis(z["a"], z["b"], z["c"], z["R"], z["L"], str(z["reason"]))
    basis = state_bilanczos(m, psi0, tol, rtol)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(
        path, a=basis.a, b=basis.b, c=basis.c, R=basis.right_basis, L=basis.left_basis,
        reason=np.array(basis.stop_reason),
    )
    return basis
