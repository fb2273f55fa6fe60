"""Band structure of the measured SSH chain across the PT transition.

Run: python3 demos/01_spectrum_and_phases.py
"""

import numpy as np

from krylov_ssh import ModelParams, classify_pt_phase, dispersion_grid, exceptional_momentum

ks = np.linspace(-np.pi, np.pi, 201)
print("gamma  phase          max|Im eps|  min|eps|   k_EP")
for gamma in (0.5, 1.0, 1.5, 2.0, 2.4):
    p = ModelParams(w=1.5, v=0.5, gamma=gamma, cells=100, boundary="periodic")
    eps = dispersion_grid(p, ks)
    k_ep = exceptional_momentum(p)
    k_txt = "-" if k_ep is None else f"{k_ep:.4f}"
    print(f"{gamma:5.1f}  {classify_pt_phase(p).value:13s}  {np.abs(eps.imag).max():10.4f}"
          f"  {np.abs(eps).min():8.4f}   {k_txt}")

# Below |w - v| = 1 every mode is real. At the critical rate the gap closes at
# the zone edge, and beyond it the exceptional momentum sweeps towards k = 0,
# reached at gamma = w + v.
