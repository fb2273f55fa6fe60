"""Krylov complexity of purification for growing Krylov subsystems.

Run: python3 demos/04_purification_complexity.py
"""

from krylov_ssh import (
    ModelParams,
    TimeGrid,
    build_hamiltonian,
    kcop_scaling,
    krylov_wavefunctions,
    localized_state,
    state_bilanczos,
)

ells = [2, 4, 5, 10, 20]
grid = TimeGrid(t_max=60.0, dt=0.1)
print("gamma  alpha(kCoP)  alpha(KIPR)  late kCoP per l")
for gamma in (0.6, 1.0, 1.4, 2.0):
    p = ModelParams(1.5, 0.5, gamma, cells=40)
    basis = state_bilanczos(build_hamiltonian(p), localized_state(p.dim, 15))
    evo = krylov_wavefunctions(basis, grid)
    sc = kcop_scaling(basis, evo, ells)
    late = " ".join(f"{x:6.2f}" for x in sc.late_kcop)
    print(f"{gamma:5.1f}  {sc.kcop_fit.exponent:11.3f}  {sc.kipr_fit.exponent:11.3f}  {late}")

# The subsystem is the leading 2l Krylov vectors. Each reduced state is
# purified into the doubled space and spread-measured over the product basis
# |i>|j>, graded by i + j. Pass scheme="tensor" or doubled="krylov" to
# kcop_scaling to compare the alternative constructions.
