"""Build a bi-orthogonal Krylov basis and check its contract.

Run: python3 demos/02_bilanczos_basis.py
"""

import numpy as np

from krylov_ssh import (
    ModelParams,
    biorthogonality_report,
    build_hamiltonian,
    localized_state,
    measurement_operator,
    operator_bilanczos,
    reconstruction_error,
    state_bilanczos,
)

for gamma in (0.0, 0.5, 1.4):
    p = ModelParams(1.5, 0.5, gamma, cells=20)
    h = build_hamiltonian(p)
    basis = state_bilanczos(h, localized_state(p.dim, 15))
    print(f"gamma={gamma}: K={basis.dim} ({basis.stop_reason}), "
          f"max|<l_i|r_j> - delta|={biorthogonality_report(basis):.1e}, "
          f"|L^dag H R - T|={reconstruction_error(h, basis):.1e}")
    if gamma == 0.0:
        # Hermitian limit: ordinary Lanczos, b_n = c_n real
        print("   b == c:", np.allclose(basis.b, basis.c))

# The Liouvillian version acts on operators. For the sublattice density the
# Krylov space is small: 2L + 1 for an open chain.
p = ModelParams(1.5, 0.5, 0.8, cells=20)
ob = operator_bilanczos(build_hamiltonian(p), measurement_operator(p))
print(f"operator Krylov dimension for n_A: {ob.dim} ({ob.stop_reason})")
