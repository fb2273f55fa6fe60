"""Spread complexity and related Krylov observables, plus series utilities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .bilanczos import KrylovBasis
from .evolution import KrylovEvolution, KrylovState

LABELS = ("complexity", "entropy", "entropic_complexity", "kipr_r", "kipr_l")


@dataclass
class ObservableSeries:
    times: np.ndarray
    values: np.ndarray
    label: str = "complexity"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have equal length")


@dataclass
class FitResult:
    exponent: float
    prefactor: float
    r_squared: float


def _probs(p) -> np.ndarray:
    if isinstance(p, KrylovState):
        return np.abs(p.psi_r.conj() * p.psi_l)
    return np.asarray(p, dtype=float)


def spread_complexity(state) -> float:
    """sum_n n P_n with n counted from zero."""
    p = _probs(state)
    return float(np.arange(p.size) @ p)


def spread_entropy(state) -> float:
    p = _probs(state)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def entropic_complexity(state) -> float:
    return float(np.exp(spread_entropy(state)))


def kipr(state: KrylovState, basis: KrylovBasis, side: str = "right") -> float:
    """sum_j |<r_j|psi>|^4 (``right``) or sum_j |<l_j|psi>|^4 (``left``), |psi| = 1."""
    psi = basis.right_basis @ state.psi_r
    psi = psi / np.linalg.norm(psi)
    proj = basis.right_basis if side == "right" else basis.left_basis
    return float((np.abs(proj.conj().T @ psi) ** 4).sum())


# vectorised forms over a whole evolution


def complexity_series(evo: KrylovEvolution) -> ObservableSeries:
    p = evo.probabilities
    return ObservableSeries(evo.times, p @ np.arange(p.shape[1]), "complexity")


def entropy_series(evo: KrylovEvolution) -> ObservableSeries:
    p = evo.probabilities
    with np.errstate(divide="ignore", invalid="ignore"):
        s = -np.where(p > 0, p * np.log(p), 0.0).sum(axis=1)
    return ObservableSeries(evo.times, s, "entropy")


def entropic_complexity_series(evo: KrylovEvolution) -> ObservableSeries:
    s = entropy_series(evo)
    return ObservableSeries(s.times, np.exp(s.values), "entropic_complexity")


def kipr_series(evo: KrylovEvolution, basis: KrylovBasis, side: str = "right") -> ObservableSeries:
    psi = evo.psi_r @ basis.right_basis.T
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    proj = basis.right_basis if side == "right" else basis.left_basis
    amp = psi @ proj.conj()
    return ObservableSeries(evo.times, (np.abs(amp) ** 4).sum(axis=1), "kipr_r" if side == "right" else "kipr_l")


def check_bounds(evo: KrylovEvolution, basis: KrylovBasis | None = None, atol: float = 1e-9) -> None:
    """Raise if any sample violates the elementary bounds of the observables."""
    k = evo.psi_r.shape[1]
    c = complexity_series(evo).values
    s = entropy_series(evo).values
    if c.min() < -atol or c.max() > k - 1 + atol:
        raise AssertionError("complexity out of [0, K-1]")
    if s.min() < -atol or s.max() > np.log(k) + atol:
        raise AssertionError("entropy out of [0, ln K]")
    if basis is not None:
        q = kipr_series(evo, basis).values
        if q.min() < 1 / k - atol or q.max() > 1 + atol:
            raise AssertionError("KIPR out of [1/K, 1]")


def _series(series, t=None):
    if isinstance(series, ObservableSeries):
        return series.times, series.values
    if t is None:
        raise TypeError("pass an ObservableSeries or explicit times")
    return np.asarray(t, dtype=float), np.asarray(series, dtype=float)


def default_t_ref(t_max: float) -> float:
    return 0.6 * t_max


def time_average(series, t_ref: float | None = None, times=None) -> float:
    """Trapezoidal mean of the series over [t_ref, T].

    Args:
        series: ObservableSeries, or a value array together with ``times``.
        t_ref: Start of the averaging window; 60% of T when omitted.
        times: Sample times when ``series`` is a bare array.
    """
    t, v = _series(series, times)
    if t_ref is None:
        t_ref = default_t_ref(t[-1])
    if t_ref >= t[-1]:
        raise ValueError("t_ref must lie before the last sample")
    m = t >= t_ref - 1e-12
    if m.sum() < 2:
        raise ValueError("fewer than two samples in the averaging window")
    return float(np.trapezoid(v[m], t[m]) / (t[m][-1] - t[m][0]))


def late_mean(series, frac: float = 0.25) -> float:
    """Mean over the final ``frac`` of the samples."""
    v = series.values if isinstance(series, ObservableSeries) else np.asarray(series, dtype=float)
    n = max(1, int(round(len(v) * frac)))
    return float(v[-n:].mean())


def saturation_time(series, band: float = 0.05, times=None) -> float | None:
    """First time after which every sample stays within +/-band*|late mean|.

    The late mean averages the final 25% of the window. Returns ``None`` when
    the series only settles inside that final quarter.
    """
    t, v = _series(series, times)
    n = len(v)
    q = max(1, n // 4)
    m = v[-q:].mean()
    outside = np.flatnonzero(np.abs(v - m) > band * abs(m))
    i = 0 if outside.size == 0 else outside[-1] + 1
    if i >= n - q:
        return None
    return float(t[i])


def post_saturation_rel_std(series, t_sat: float, times=None) -> float:
    t, v = _series(series, times)
    tail = v[t >= t_sat]
    return float(tail.std() / abs(tail.mean()))


def count_prominent_maxima(values, frac: float = 0.05) -> int:
    """Interior local maxima whose prominence exceeds ``frac`` of the range."""
    v = np.asarray(values, dtype=float)
    rng = v.max() - v.min()
    if rng <= 0:
        return 0
    peaks, _ = find_peaks(v, prominence=frac * rng)
    return int(len(peaks))


def is_oscillatory(values, min_peaks: int = 3, frac: float = 0.05) -> bool:
    return count_prominent_maxima(values, frac) >= min_peaks


def power_law_fit(sizes, values) -> FitResult:
    """Least-squares fit of ln(value) = ln(A) + alpha ln(size)."""
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.size < 3:
        raise ValueError("need at least three points")
    if (x <= 0).any() or (y <= 0).any():
        raise ValueError("power-law fit needs positive inputs")
    lx, ly = np.log(x), np.log(y)
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss_tot = ((ly - ly.mean()) ** 2).sum()
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - (resid**2).sum() / ss_tot)
    return FitResult(float(slope), float(np.exp(icpt)), float(min(r2, 1.0)))
