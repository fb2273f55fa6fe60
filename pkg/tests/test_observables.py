import math

import numpy as np
import pytest

from krylov_ssh.bilanczos import state_bilanczos
from krylov_ssh.evolution import KrylovState, TimeGrid, krylov_wavefunctions
from krylov_ssh.model import ModelParams, build_hamiltonian, localized_state
from krylov_ssh.observables import (
    ObservableSeries,
    check_bounds,
    complexity_series,
    count_prominent_maxima,
    entropic_complexity,
    is_oscillatory,
    kipr,
    kipr_series,
    late_mean,
    post_saturation_rel_std,
    power_law_fit,
    saturation_time,
    spread_complexity,
    spread_entropy,
    time_average,
)


def _evo(gamma, cells=20, t_max=50.0):
    p = ModelParams(1.5, 0.5, gamma, cells)
    b = state_bilanczos(build_hamiltonian(p), localized_state(p.dim, 15))
    return b, krylov_wavefunctions(b, TimeGrid(t_max, 0.1))


def test_point_values():
    e1 = np.array([1.0, 0, 0, 0])
    assert spread_complexity(e1) == 0
    assert spread_entropy(e1) == 0
    assert entropic_complexity(e1) == 1
    u = np.full(4, 0.25)
    assert spread_complexity(u) == pytest.approx(1.5)
    assert spread_entropy(u) == pytest.approx(math.log(4))
    assert entropic_complexity(u) == pytest.approx(4)


def test_kipr_values():
    p = ModelParams(1.5, 0.5, 0.0, 3)
    b = state_bilanczos(build_hamiltonian(p), localized_state(6, 2))
    k = b.dim
    e1 = np.eye(k)[0].astype(complex)
    assert kipr(KrylovState(0.0, e1, e1, 1.0), b) == pytest.approx(1)
    u = np.full(k, 1 / math.sqrt(k), dtype=complex)
    assert kipr(KrylovState(0.0, u, u, 1.0), b) == pytest.approx(1 / k)


def test_series_match_pointwise():
    b, evo = _evo(1.2, 8, 5.0)
    c = complexity_series(evo).values
    q = kipr_series(evo, b).values
    for i, st in enumerate(evo.states()[::10]):
        assert c[10 * i] == pytest.approx(spread_complexity(st))
        assert q[10 * i] == pytest.approx(kipr(st, b))
    check_bounds(evo, b)


def test_complexity_plateau_and_kipr_ordering():
    _, evo = _evo(1.2)
    c = complexity_series(evo)
    tail = c.values[-len(c.values) // 4 :]
    assert tail.std() / tail.mean() < 0.05
    b1, e1 = _evo(1.2, t_max=100.0)
    b2, e2 = _evo(2.4, t_max=100.0)
    assert late_mean(kipr_series(e2, b2)) > late_mean(kipr_series(e1, b1))
    assert saturation_time(complexity_series(e2)) > saturation_time(complexity_series(e1))


def test_time_average_examples():
    t = np.linspace(0, 10, 1001)
    assert time_average(np.full_like(t, 3.2), 0.0, times=t) == pytest.approx(3.2)
    assert time_average(t, 0.0, times=t) == pytest.approx(5.0)
    # two full periods of a sine around an offset of 0.7
    assert abs(time_average(0.7 + np.sin(2 * np.pi * t / 5), 0.0, times=t) - 0.7) < 1e-3
    # default window starts at 60% of the span
    assert time_average(t, times=t) == pytest.approx(8.0)
    with pytest.raises(ValueError):
        time_average(t, 10.0, times=t)
    with pytest.raises(TypeError):
        time_average(t)


def test_saturation_time_examples():
    t = np.arange(0, 100.01, 0.1)
    assert saturation_time(np.ones_like(t), times=t) == 0.0
    ts = saturation_time(1 - np.exp(-t / 5), 0.05, times=t)
    assert abs(ts - 5 * math.log(20)) <= 0.1
    assert saturation_time(t, times=t) is None
    s = ObservableSeries(t, 1 - np.exp(-t / 5))
    assert post_saturation_rel_std(s, ts) < 0.05


def test_peak_counting():
    t = np.linspace(0, 50, 501)
    assert count_prominent_maxima(np.sin(t)) == 8
    assert not is_oscillatory(1 - np.exp(-t))
    assert count_prominent_maxima(np.ones(10)) == 0


def test_power_law_fit_examples():
    sizes = [10, 20, 40, 80]
    f = power_law_fit(sizes, [3.7 * s**1.3 for s in sizes])
    assert f.exponent == pytest.approx(1.3, abs=1e-10)
    assert f.prefactor == pytest.approx(3.7)
    assert f.r_squared == pytest.approx(1.0)
    assert power_law_fit(sizes, [2.0] * 4).exponent == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(ValueError):
        power_law_fit([1, 2], [1, 2])
    with pytest.raises(ValueError):
        power_law_fit([1, 2, 3], [1, -2, 3])


def test_series_shape_check():
    with pytest.raises(ValueError):
        ObservableSeries(np.arange(3), np.arange(4))
