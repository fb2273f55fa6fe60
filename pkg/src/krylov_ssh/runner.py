"""Sweep orchestration, persistence and figure recipes.

Every sweep writes one directory holding ``manifest.json`` and one CSV per
(observable, parameter point). Parameter points are independent and may run
in a process pool; the worker count comes from ``KRYLOV_SSH_WORKERS``.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bilanczos import DEFAULT_RTOL, DEFAULT_TOL, state_bilanczos, biorthogonality_report
from .evolution import TimeGrid, krylov_wavefunctions
from .model import (
    ModelParams,
    build_hamiltonian,
    classify_pt_phase,
    dispersion_grid,
    exceptional_momentum,
    full_spectrum,
    localized_state,
    measurement_operator,
    sublattice_krylov_dim,
    pair_state,
)
from .observables import (
    complexity_series,
    count_prominent_maxima,
    entropic_complexity_series,
    entropy_series,
    kipr_series,
    late_mean,
    power_law_fit,
    saturation_time,
    time_average,
)
from .qfi import averaged_qfi, qfi_operator, qfi_state
from .subsystem import purified_series

log = logging.getLogger(__name__)

WORKERS_ENV = "KRYLOV_SSH_WORKERS"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    """Sweep description.

    Attributes:
        w, v: Hoppings.
        boundary: ``"open"`` or ``"periodic"``.
        gamma_list: Measurement rates.
        cells_list: Chain lengths L.
        subsystem_list: Subsystem sizes l in cells (kCoP).
        initial: ``"localized:<site>"`` or ``"pair:<s1>,<s2>"`` (1-based sites).
        t_max, dt: Time grid.
        t_ref: Start of time averages; 60% of t_max when None.
        observables: Names to emit in dynamics sweeps.
        output_dir: Sweep directory.
        evolution_mode: ``"projected"`` or ``"adjoint"``.
        kcop_scheme: ``"block"`` or ``"tensor"`` reduction.
        kcop_doubled: ``"product"`` or ``"krylov"`` doubled basis.
        qfi_operators: Measurement operator kinds.
        qfi_signs: Sign convention of the operator picture.
    """

    w: float = 1.5
    v: float = 0.5
    boundary: str = "open"
    gamma_list: list = field(default_factory=lambda: [0.5])
    cells_list: list = field(default_factory=lambda: [20])
    subsystem_list: list = field(default_factory=lambda: [5])
    initial: str = "localized:15"
    t_max: float = 50.0
    dt: float = 0.1
    t_ref: float | None = None
    observables: list = field(
        default_factory=lambda: ["complexity", "entropy", "entropic_complexity", "kipr_r", "kipr_l"]
    )
    output_dir: str = "runs/out"
    evolution_mode: str = "projected"
    kcop_scheme: str = "block"
    kcop_doubled: str = "product"
    qfi_operators: list = field(default_factory=lambda: ["n_A"])
    qfi_signs: str = "consistent"
    k_points: int = 201

    def validate(self) -> "ExperimentConfig":
        if not self.gamma_list or not self.cells_list:
            raise ConfigError("gamma_list and cells_list must be non-empty")
        if any(g < 0 for g in self.gamma_list):
            raise ConfigError("gamma must be non-negative")
        if any(int(c) != c or c < 1 for c in self.cells_list):
            raise ConfigError("cells must be positive integers")
        if self.boundary not in ("open", "periodic"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if self.dt <= 0 or self.t_max < self.dt:
            raise ConfigError("need dt > 0 and t_max >= dt")
        if self.t_ref is not None and not 0 <= self.t_ref < self.t_max:
            raise ConfigError("t_ref must lie in [0, t_max)")
        for cells in self.cells_list:
            initial_state(self.initial, 2 * int(cells))
            for g in self.gamma_list:
                self.params(g, cells)
        return self

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.t_max, self.dt)

    def params(self, gamma: float, cells: int) -> ModelParams:
        return ModelParams(self.w, self.v, gamma, int(cells), self.boundary)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        data.update({k: v for k, v in overrides.items() if v is not None})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def initial_state(spec: str, dim: int) -> np.ndarray:
    """Parse ``localized:<site>`` or ``pair:<s1>,<s2>``."""
    try:
        kind, arg = spec.split(":", 1)
        if kind == "localized":
            return localized_state(dim, int(arg))
        if kind == "pair":
            s1, s2 = (int(x) for x in arg.split(","))
            return pair_state(dim, s1, s2)
    except ValueError as exc:
        raise ConfigError(f"bad initial state {spec!r}: {exc}") from exc
    raise ConfigError(f"bad initial state {spec!r}")


@dataclass
class SweepResult:
    rows: list
    manifest: dict
    output_dir: Path

    @property
    def failed(self) -> list:
        return [r for r in self.rows if r.get("error")]


def _fmt(x: float) -> str:
    return f"{x:g}"


def _write_csv(path: Path, header: list[str], columns) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for row in zip(*columns):
            wr.writerow([repr(float(x)) if not isinstance(x, (int, np.integer)) else int(x) for x in row])


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map_points(fn, cfg: ExperimentConfig, points: list) -> list:
    """Run ``fn(cfg, point)`` for each point, isolating failures."""
    def safe(res_or_exc, point):
        if isinstance(res_or_exc, Exception):
            return [{"point": point, "error": f"{type(res_or_exc).__name__}: {res_or_exc}"}]
        return res_or_exc

    n = _workers()
    results = []
    if n == 1 or len(points) == 1:
        for p in points:
            try:
                results.append(fn(cfg, p))
            except Exception as exc:  # per-point isolation
                log.error("point %s failed: %s", p, exc)
                results.append(exc)
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            futs = [pool.submit(fn, cfg, p) for p in points]
            for f in futs:
                try:
                    results.append(f.result())
                except Exception as exc:
                    results.append(exc)
    rows = []
    for p, r in zip(points, results):
        rows.extend(safe(r, p))
    return rows


def _finish(cfg: ExperimentConfig, kind: str, rows: list, t0: float, extra: dict | None = None) -> SweepResult:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = sorted({f for r in rows for f in r.get("files", [])})
    manifest = {
        "tool": "krylov_ssh",
        "version": __version__,
        "sweep": kind,
        "config": cfg.to_dict(),
        "config_hash": cfg.digest(),
        "tolerances": {"bilanczos_tol": DEFAULT_TOL, "bilanczos_rtol": DEFAULT_RTOL},
        "files": {f: _sha(out / f) for f in files if (out / f).exists()},
        "rows": rows,
        "timing_s": round(time.time() - t0, 3),
    }
    if extra:
        manifest.update(extra)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True, default=_jsonable))
    return SweepResult(rows, manifest, out)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(type(x))


def _tag(gamma: float, cells: int, boundary: str, extra: str = "") -> str:
    return f"g{_fmt(gamma)}_L{cells}_{boundary}{extra}"


# spectrum -----------------------------------------------------------------


def _spectrum_point(cfg: ExperimentConfig, point):
    gamma, cells = point
    p = cfg.params(gamma, cells)
    out = Path(cfg.output_dir)
    ks = np.linspace(-np.pi, np.pi, cfg.k_points)
    eps = dispersion_grid(p, ks)
    f1 = f"spectrum_{_tag(gamma, cells, cfg.boundary)}.csv"
    _write_csv(out / f1, ["k", "re_plus", "im_plus", "re_minus", "im_minus"],
               [ks, eps.real, eps.imag, -eps.real, -eps.imag])
    ev = full_spectrum(build_hamiltonian(p))
    f2 = f"eigenvalues_{_tag(gamma, cells, cfg.boundary)}.csv"
    _write_csv(out / f2, ["re", "im"], [ev.real, ev.imag])
    k_ep = exceptional_momentum(p)
    return [{
        "point": {"gamma": gamma, "cells": cells},
        "phase": classify_pt_phase(p).value,
        "k_ep": k_ep,
        "max_abs_im_dispersion": float(np.abs(eps.imag).max()),
        "max_abs_im_numerical": float(np.abs(ev.imag).max()),
        "files": [f1, f2],
    }]


def run_spectrum(cfg: ExperimentConfig) -> SweepResult:
    cfg.validate()
    t0 = time.time()
    pts = [(g, c) for c in sorted(cfg.cells_list) for g in sorted(cfg.gamma_list)]
    return _finish(cfg, "spectrum", _map_points(_spectrum_point, cfg, pts), t0)


# dynamics -----------------------------------------------------------------


def _dynamics_point(cfg: ExperimentConfig, point):
    gamma, cells = point
    p = cfg.params(gamma, cells)
    h = build_hamiltonian(p)
    psi0 = initial_state(cfg.initial, p.dim)
    basis = state_bilanczos(h, psi0)
    evo = krylov_wavefunctions(basis, cfg.grid, mode=cfg.evolution_mode, h=h)
    series = {
        "complexity": complexity_series(evo),
        "entropy": entropy_series(evo),
        "entropic_complexity": entropic_complexity_series(evo),
        "kipr_r": kipr_series(evo, basis, "right"),
        "kipr_l": kipr_series(evo, basis, "left"),
    }
    out = Path(cfg.output_dir)
    files, scalars = [], {}
    for name in cfg.observables:
        s = series[name]
        fn = f"{name}_{_tag(gamma, cells, cfg.boundary)}.csv"
        _write_csv(out / fn, ["t", "value"], [s.times, s.values])
        files.append(fn)
        scalars[name] = {
            "late_mean": late_mean(s),
            "time_average": time_average(s, cfg.t_ref),
            "saturation_time": saturation_time(s),
            "prominent_maxima": count_prominent_maxima(s.values),
        }
    fn = f"norm_{_tag(gamma, cells, cfg.boundary)}.csv"
    _write_csv(out / fn, ["t", "norm_factor", "trace_norm"], [evo.times, evo.norm_factor, evo.trace_norm])
    files.append(fn)
    return [{
        "point": {"gamma": gamma, "cells": cells},
        "krylov_dim": basis.dim,
        "stop_reason": basis.stop_reason,
        "biorthogonality": biorthogonality_report(basis),
        "leakage": evo.diagnostics.get("leakage", 0.0),
        "scalars": scalars,
        "files": files,
    }]


def _scaling_table(rows, key: str = "complexity") -> dict:
    """alpha(gamma) from late means over the chain lengths of each gamma."""
    by_g: dict = {}
    for r in rows:
        if r.get("error") or key not in r.get("scalars", {}):
            continue
        by_g.setdefault(r["point"]["gamma"], []).append((r["point"]["cells"], r["scalars"][key]["late_mean"]))
    table = {}
    for g, pairs in sorted(by_g.items()):
        if len(pairs) >= 3:
            pairs.sort()
            fit = power_law_fit([c for c, _ in pairs], [v for _, v in pairs])
            table[_fmt(g)] = dataclasses.asdict(fit)
    return table


def run_dynamics(cfg: ExperimentConfig) -> SweepResult:
    cfg.validate()
    t0 = time.time()
    pts = [(g, c) for c in sorted(cfg.cells_list) for g in sorted(cfg.gamma_list)]
    rows = _map_points(_dynamics_point, cfg, pts)
    return _finish(cfg, "dynamics", rows, t0, {"scaling": _scaling_table(rows)})


# kCoP ---------------------------------------------------------------------


def _kcop_point(cfg: ExperimentConfig, point):
    gamma, cells = point
    p = cfg.params(gamma, cells)
    h = build_hamiltonian(p)
    basis = state_bilanczos(h, initial_state(cfg.initial, p.dim))
    evo = krylov_wavefunctions(basis, cfg.grid, mode=cfg.evolution_mode)
    out = Path(cfg.output_dir)
    rows = []
    for ell in sorted(cfg.subsystem_list):
        row = {"point": {"gamma": gamma, "cells": cells, "ell": ell}}
        try:
            ps = purified_series(basis, evo, ell, scheme=cfg.kcop_scheme, doubled=cfg.kcop_doubled)
        except ValueError as exc:
            row["error"] = str(exc)
            rows.append(row)
            continue
        tag = _tag(gamma, cells, cfg.boundary, f"_l{ell}")
        f1, f2 = f"kcop_{tag}.csv", f"kipr_purified_{tag}.csv"
        _write_csv(out / f1, ["t", "kcop"], [ps.times, ps.kcop])
        _write_csv(out / f2, ["t", "kipr_purified"], [ps.times, ps.kipr])
        row.update({
            "ell_k": ps.subsystem_dim,
            "late_kcop": late_mean(ps.kcop),
            "avg_kcop": time_average(ps.kcop, cfg.t_ref, times=ps.times),
            "avg_kipr": time_average(ps.kipr, cfg.t_ref, times=ps.times),
            "max_leakage": float(ps.leakage.max()),
            "files": [f1, f2],
        })
        rows.append(row)
    return rows


def _kcop_scaling(rows) -> dict:
    groups: dict = {}
    for r in rows:
        if r.get("error"):
            continue
        pt = r["point"]
        groups.setdefault((pt["gamma"], pt["cells"]), []).append(r)
    table = {}
    for (g, c), rs in sorted(groups.items()):
        if len(rs) < 3:
            continue
        ells = [r["point"]["ell"] for r in rs]
        fk = power_law_fit(ells, [r["late_kcop"] for r in rs])
        fi = power_law_fit(ells, [r["avg_kipr"] for r in rs])
        table[f"g{_fmt(g)}_L{c}"] = {"alpha_kcop": fk.exponent, "alpha_kipr": -fi.exponent}
    return table


def run_kcop(cfg: ExperimentConfig) -> SweepResult:
    cfg.validate()
    t0 = time.time()
    pts = [(g, c) for c in sorted(cfg.cells_list) for g in sorted(cfg.gamma_list)]
    rows = _map_points(_kcop_point, cfg, pts)
    ell_map = {str(l): 2 * l if cfg.kcop_scheme == "block" else l for l in cfg.subsystem_list}
    return _finish(cfg, "kcop", rows, t0, {"scaling": _kcop_scaling(rows), "ell_to_ell_k": ell_map})


# QFI ----------------------------------------------------------------------


def _qfi_point(cfg: ExperimentConfig, point):
    gamma, cells = point
    p = cfg.params(gamma, cells)
    h = build_hamiltonian(p)
    psi0 = initial_state(cfg.initial, p.dim)
    out = Path(cfg.output_dir)
    rows = []
    for kind in cfg.qfi_operators:
        op = measurement_operator(p, kind)
        st = qfi_state(h, psi0, op, cfg.grid)
        oq = qfi_operator(h, psi0, op, cfg.grid, signs=cfg.qfi_signs, max_dim=sublattice_krylov_dim(p))
        tag = _tag(gamma, cells, cfg.boundary, f"_{kind}")
        files = []
        for s in (st, oq.full, oq.diagonal):
            fn = f"qfi_{s.picture}_{tag}.csv"
            _write_csv(out / fn, ["t", "fq"], [s.times, s.values])
            files.append(fn)
        fn = f"fn_{tag}.csv"
        nt, kk = oq.profile.f_n.shape
        _write_csv(out / fn, ["t", "n", "f_n"],
                   [np.repeat(oq.profile.times, kk), np.tile(oq.profile.n, nt), oq.profile.f_n.ravel()])
        files.append(fn)
        rows.append({
            "point": {"gamma": gamma, "cells": cells, "operator": kind},
            "fq_avg_state": averaged_qfi(st, cfg.t_ref),
            "fq_avg_operator_full": averaged_qfi(oq.full, cfg.t_ref),
            "fq_avg_operator_diagonal": averaged_qfi(oq.diagonal, cfg.t_ref),
            "fn_all_positive": bool((oq.profile.f_n > 0).all()),
            "diagnostics": oq.diagnostics,
            "files": files,
        })
    return rows


def run_qfi(cfg: ExperimentConfig) -> SweepResult:
    cfg.validate()
    t0 = time.time()
    pts = [(g, c) for c in sorted(cfg.cells_list) for g in sorted(cfg.gamma_list)]
    rows = _map_points(_qfi_point, cfg, pts)
    out = Path(cfg.output_dir)
    ok = [r for r in rows if not r.get("error")]
    if ok:
        fn = "qfi_averaged.csv"
        _write_csv(out / fn, ["gamma", "L", "fq_avg_state", "fq_avg_operator_full", "fq_avg_operator_diagonal"],
                   [[r["point"]["gamma"] for r in ok], [r["point"]["cells"] for r in ok],
                    [r["fq_avg_state"] for r in ok], [r["fq_avg_operator_full"] for r in ok],
                    [r["fq_avg_operator_diagonal"] for r in ok]])
        rows.append({"point": "summary", "files": [fn]})
    return _finish(cfg, "qfi", rows, t0)


# recipes ------------------------------------------------------------------

GAMMA_QFI = [round(0.2 * i, 1) for i in range(16)]
GAMMA_KCOP = [0.4, 0.6, 0.8, 1.0, 1.2, 1.6, 2.0, 2.4]

RECIPES: dict[str, dict] = {
    "fig1": {"kind": "spectrum", "boundary": "periodic", "cells_list": [100], "gamma_list": [0.5, 1.0, 2.4]},
    "fig2": {"kind": "dynamics", "cells_list": [20], "gamma_list": [0.5, 1.2, 1.4], "t_max": 50.0},
    "fig3": {"kind": "dynamics", "cells_list": [20], "gamma_list": [1.2, 1.6, 2.0, 2.4], "t_max": 200.0},
    "fig6": {"kind": "dynamics", "cells_list": [10, 20, 40, 80],
             "gamma_list": [round(1.2 + 0.1 * i, 1) for i in range(17)], "t_max": 1000.0, "dt": 0.5,
             "observables": ["complexity"]},
    "fig7": {"kind": "kcop", "cells_list": [100], "gamma_list": GAMMA_KCOP,
             "subsystem_list": [4, 8, 10, 20, 40, 50, 100], "t_max": 100.0},
    "fig7-extended": {"kind": "kcop", "cells_list": [200], "gamma_list": GAMMA_KCOP,
                      "subsystem_list": [4, 8, 10, 20, 40, 50, 100], "t_max": 100.0},
    "fig10": {"kind": "qfi", "cells_list": [16, 20, 24], "gamma_list": GAMMA_QFI, "t_max": 100.0},
    "fig11": {"kind": "qfi", "cells_list": [20], "gamma_list": [0.4, 1.0, 2.0], "t_max": 100.0},
    "appC": {"kind": "dynamics", "cells_list": [20], "gamma_list": [0.5, 1.2], "initial": "pair:20,21"},
    "appD": {"kind": "dynamics", "boundary": "periodic", "cells_list": [20], "gamma_list": [0.5, 1.2, 1.4]},
    "appE": {"kind": "qfi", "boundary": "periodic", "cells_list": [16, 20, 24], "gamma_list": GAMMA_QFI,
             "t_max": 100.0},
}
RECIPES["fig4"] = RECIPES["fig5"] = RECIPES["fig3"]
RECIPES["fig8"] = RECIPES["fig9"] = RECIPES["fig7"]
RECIPES["fig12"] = RECIPES["fig10"]

RUNNERS = {"spectrum": run_spectrum, "dynamics": run_dynamics, "kcop": run_kcop, "qfi": run_qfi}


def recipe_config(figure: str, output_dir: str | None = None) -> tuple[str, ExperimentConfig]:
    if figure not in RECIPES:
        raise ConfigError(f"unknown figure {figure!r}; choose from {sorted(RECIPES)}")
    spec = dict(RECIPES[figure])
    kind = spec.pop("kind")
    spec["output_dir"] = output_dir or f"runs/{figure}"
    return kind, ExperimentConfig(**spec)


def reproduce(figure: str, output_dir: str | None = None) -> SweepResult:
    kind, cfg = recipe_config(figure, output_dir)
    return RUNNERS[kind](cfg)
