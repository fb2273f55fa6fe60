"""Drive a small parameter sweep through the runner, as the CLI does.

Run: python3 demos/06_sweeps_and_cli.py
Equivalent shell form:
    krylov-ssh evolve --gamma 0.5,1.2,1.6 --cells 10,20 --tmax 40 --out runs/demo
"""

import json
import tempfile
from pathlib import Path

from krylov_ssh.runner import ExperimentConfig, run_dynamics

with tempfile.TemporaryDirectory() as tmp:
    cfg = ExperimentConfig(gamma_list=[0.5, 1.2, 1.6], cells_list=[10, 20, 40], initial="localized:15",
                           t_max=40.0, output_dir=tmp, observables=["complexity", "kipr_r"])
    result = run_dynamics(cfg)
    man = json.loads((Path(tmp) / "manifest.json").read_text())
    print(f"{len(result.rows)} points, {len(result.failed)} failed, {len(man['files'])} files")
    print("config hash", man["config_hash"][:16])
    for key, row in man["scaling"].items():
        print(f"{key}: alpha = {row['exponent']:.3f} (r^2 {row['r_squared']:.3f})")
