import numpy as np
import pytest

from opsamp import GridAlignmentError, GridSpec, PlaneArray, SampledSignal
from opsamp.grid import steps_of, wrap_signed


def test_grid_derived_quantities():
    g = GridSpec(dt=1 / 64, n_per_T=64, periods=16)
    assert g.T == 1.0
    assert g.n == 1024
    assert g.extent == 16.0
    assert g.dnu == 1 / 16
    assert g.omega == 1.0


def test_grid_with_scheme_periods():
    g = GridSpec(dt=1 / 32, n_per_T=16, periods=4, ell=2)
    assert g.T == 0.5
    assert g.n == 2 * 16 * 4
    assert g.omega == 1.0
    assert g.omega == pytest.approx(g.periods * g.dnu)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(dt=0.0, n_per_T=4, periods=4),
        dict(dt=-1.0, n_per_T=4, periods=4),
        dict(dt=0.1, n_per_T=0, periods=4),
        dict(dt=0.1, n_per_T=4, periods=-1),
        dict(dt=0.1, n_per_T=4.5, periods=4),
    ],
)
def test_grid_rejects_bad_fields(kwargs):
    with pytest.raises(ValueError):
        GridSpec(**kwargs)


def test_wrap_signed_range():
    g = GridSpec(dt=1 / 8, n_per_T=8, periods=4)
    t = g.times()
    assert t[0] == 0.0
    assert t.min() == -g.extent / 2
    assert t.max() == g.extent / 2 - g.dt
    assert np.all(wrap_signed(t + g.extent, g.extent) == t)


def test_steps_of_alignment():
    assert steps_of(0.75, 0.25) == 3
    assert steps_of(-0.5, 0.25) == -2
    with pytest.raises(GridAlignmentError):
        steps_of(0.3, 0.25)


def test_time_and_freq_index_wrap():
    g = GridSpec(dt=1 / 8, n_per_T=8, periods=4)
    assert g.time_index(0.0) == 0
    assert g.time_index(-g.dt) == g.n - 1
    assert g.freq_index(g.dnu * 3) == 3
    with pytest.raises(GridAlignmentError):
        g.time_index(g.dt / 3)


def test_refine_preserves_layout():
    g = GridSpec(dt=1 / 8, n_per_T=8, periods=4, ell=2)
    f = g.refine(2)
    assert f.T == g.T
    assert f.extent == g.extent
    assert f.n == 2 * g.n


def test_signal_energy_and_norm():
    g = GridSpec(dt=1 / 8, n_per_T=8, periods=2)
    v = np.zeros(g.n, dtype=complex)
    v[3] = 2.0
    s = SampledSignal(g, v)
    assert s.energy() == pytest.approx(4 * g.dt)
    assert s.norm() == pytest.approx(2 * np.sqrt(g.dt))


def test_signal_origin_relabels_coordinates():
    g = GridSpec(dt=1 / 4, n_per_T=4, periods=2)
    v = np.arange(g.n, dtype=complex)
    s = SampledSignal(g, v, origin_index=3)
    assert s.at(0.0) == 3.0
    assert s.at(g.dt) == 4.0
    c = s.canonical()
    assert c.origin_index == 0
    assert c.at(0.0) == 3.0
    assert np.allclose(np.sort(c.coords()), np.sort(s.coords()))


def test_signal_shift_and_arithmetic():
    g = GridSpec(dt=1 / 4, n_per_T=4, periods=2)
    a = SampledSignal(g, np.arange(g.n, dtype=complex))
    b = a.shifted(2 * g.dt)
    assert b.at(2 * g.dt) == a.at(0.0)
    total = a + b
    assert total.at(2 * g.dt) == a.at(2 * g.dt) + a.at(0.0)
    diff = total - b
    assert np.allclose(diff.values, a.values)
    assert np.allclose((2 * a).values, 2 * a.values)


def test_signal_rejects_mismatched_values():
    g = GridSpec(dt=1 / 4, n_per_T=4, periods=2)
    with pytest.raises(ValueError):
        SampledSignal(g, np.zeros(g.n + 1))
    with pytest.raises(ValueError):
        SampledSignal(g, np.zeros(g.n), domain="weird")


@pytest.mark.parametrize(
    "semantics,steps",
    [
        ("time_freq", ("dt", "dnu")),
        ("symbol", ("dt", "dnu")),
        ("kernel", ("dt", "dt")),
        ("impulse", ("dt", "dt")),
    ],
)
def test_plane_axis_steps(semantics, steps):
    g = GridSpec(dt=1 / 8, n_per_T=8, periods=2)
    p = PlaneArray(g, np.zeros((g.n, g.n)), semantics)
    assert p.x_step == getattr(g, steps[0])
    assert p.y_step == getattr(g, steps[1])


def test_plane_rejects_bad_shapes():
    g = GridSpec(dt=1 / 8, n_per_T=8, periods=2)
    with pytest.raises(ValueError):
        PlaneArray(g, np.zeros((g.n, g.n + 1)), "symbol")
    with pytest.raises(ValueError):
        PlaneArray(g, np.zeros(g.n), "symbol")
    with pytest.raises(ValueError):
        PlaneArray(g, np.zeros((g.n, g.n)), "spread")


def test_plane_lookup_and_energy():
    g = GridSpec(dt=1 / 8, n_per_T=8, periods=2)
    values = np.zeros((g.n, g.n), dtype=complex)
    values[2, 5] = 3.0
    p = PlaneArray(g, values, "time_freq")
    assert p.at(2 * g.dt, 5 * g.dnu) == 3.0
    assert p.at(2 * g.dt - g.extent, 5 * g.dnu) == 3.0
    assert p.energy() == pytest.approx(9 * g.dt * g.dnu)
