import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opsamp import (
    GridSpec,
    PlaneArray,
    SampledSignal,
    forward_ft,
    inverse_ft,
    stft,
    stft_lattice,
    symplectic_ft,
    zak_full,
    zak_inverse,
    zak_transform,
)

GRID = GridSpec(dt=1 / 64, n_per_T=64, periods=16)


def random_signal(grid, seed, domain="time"):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
    return SampledSignal(grid, v, 0, domain)


def gaussian(grid, scale=1.0):
    t = grid.times()
    return SampledSignal(grid, np.exp(-np.pi * (t / scale) ** 2) + 0j)


def test_impulse_maps_to_flat_spectrum():
    v = np.zeros(GRID.n, dtype=complex)
    v[0] = 1 / GRID.dt
    hat = forward_ft(SampledSignal(GRID, v))
    assert hat.domain == "frequency"
    assert np.allclose(hat.values, 1.0, atol=1e-12)


def test_gaussian_is_self_dual():
    hat = forward_ft(gaussian(GRID))
    expected = np.exp(-np.pi * GRID.freqs() ** 2)
    assert np.max(np.abs(hat.values - expected)) < 1e-12


def test_translation_becomes_modulation():
    f = gaussian(GRID)
    a = 5 * GRID.dt
    hat_shifted = forward_ft(f.shifted(a))
    expected = forward_ft(f).values * np.exp(-2j * np.pi * GRID.freqs() * a)
    assert np.max(np.abs(hat_shifted.values - expected)) < 1e-12


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=20, deadline=None)
def test_ft_parseval_and_round_trip(seed):
    f = random_signal(GRID, seed)
    hat = forward_ft(f)
    assert hat.energy() == pytest.approx(f.energy(), rel=1e-12)
    back = inverse_ft(hat)
    assert np.max(np.abs(back.values - f.values)) < 1e-10


def test_ft_rejects_wrong_domain():
    f = random_signal(GRID, 0)
    with pytest.raises(ValueError):
        inverse_ft(f)
    with pytest.raises(ValueError):
        forward_ft(forward_ft(f))


def test_symplectic_separable_oracle():
    # For F(t, gamma) = f(t) g(gamma) the transform factorizes into
    # (Fs F)(x, xi) = gcheck(x) fhat(xi) with gcheck the inverse transform
    # of g, so the 1-D transforms provide an independent check.
    grid = GridSpec(dt=1 / 16, n_per_T=16, periods=8)
    f = random_signal(grid, 7)
    s = random_signal(grid, 8, domain="frequency")
    plane = PlaneArray(grid, np.outer(f.values, s.values), "time_freq")
    out = symplectic_ft(plane)
    assert out.axis_semantics == "symbol"
    expected = np.outer(inverse_ft(s).values, forward_ft(f).values)
    assert np.max(np.abs(out.values - expected)) < 1e-10


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=10, deadline=None)
def test_symplectic_is_an_involution_and_unitary(seed):
    grid = GridSpec(dt=1 / 16, n_per_T=16, periods=4)
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    plane = PlaneArray(grid, values, "time_freq")
    out = symplectic_ft(plane)
    assert out.energy() == pytest.approx(plane.energy(), rel=1e-12)
    back = symplectic_ft(out)
    assert back.axis_semantics == "time_freq"
    assert np.max(np.abs(back.values - values)) < 1e-10


def test_symplectic_rejects_kernel_planes():
    grid = GridSpec(dt=1 / 8, n_per_T=8, periods=2)
    plane = PlaneArray(grid, np.zeros((grid.n, grid.n)), "kernel")
    with pytest.raises(ValueError):
        symplectic_ft(plane)


def test_stft_translation_covariance():
    grid = GridSpec(dt=1 / 32, n_per_T=32, periods=8)
    f = random_signal(grid, 3)
    w = gaussian(grid, scale=0.5)
    a = 4 * grid.dt
    x, xi = 8 * grid.dt, 6 * grid.dnu
    lhs = stft(f.shifted(a), w, x, xi)
    rhs = np.exp(-2j * np.pi * xi * a) * stft(f, w, x - a, xi)
    assert abs(lhs - rhs) < 1e-10


def test_stft_full_grid_energy():
    grid = GridSpec(dt=1 / 16, n_per_T=16, periods=4)
    f = random_signal(grid, 11)
    w = random_signal(grid, 12)
    coeffs = stft_lattice(f, w, grid.dt, grid.dnu)
    total = grid.dt * grid.dnu * np.sum(np.abs(coeffs) ** 2)
    assert total == pytest.approx(f.energy() * w.energy(), rel=1e-12)


def test_stft_lattice_matches_pointwise():
    grid = GridSpec(dt=1 / 16, n_per_T=16, periods=4)
    f = random_signal(grid, 21)
    w = gaussian(grid, scale=0.5)
    a, b = 4 * grid.dt, 2 * grid.dnu
    coeffs = stft_lattice(f, w, a, b)
    assert coeffs.shape == (grid.n // 4, grid.n // 2)
    for k, l in [(0, 0), (3, 5), (7, 1)]:
        assert abs(coeffs[k, l] - stft(f, w, k * a, l * b)) < 1e-12


def zak_grid():
    return GridSpec(dt=1 / 16, n_per_T=16, periods=8, ell=2)


def test_zak_of_weighted_delta_train():
    # A train with weights c[n mod L] / dt at the sites n T concentrates
    # on the rows t = j T of the Zak cell with the flat value K c_j / dt
    # in the zero frequency bin and zero elsewhere.
    grid = zak_grid()
    c = np.array([1.0, 1.0j])
    v = np.zeros(grid.n, dtype=complex)
    for n in range(grid.n // grid.n_per_T):
        v[n * grid.n_per_T] = c[n % 2] / grid.dt
    z = zak_transform(SampledSignal(grid, v))
    m = grid.ell * grid.n_per_T
    assert z.values.shape == (m, grid.periods)
    expected = np.zeros((m, grid.periods), dtype=complex)
    expected[0, 0] = grid.periods * c[0] / grid.dt
    expected[grid.n_per_T, 0] = grid.periods * c[1] / grid.dt
    assert np.max(np.abs(z.values - expected)) < 1e-10


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=10, deadline=None)
def test_zak_quasi_periodicity_and_energy(seed):
    grid = zak_grid()
    f = random_signal(grid, seed)
    zf = zak_full(f)
    m = grid.ell * grid.n_per_T
    nu = grid.dnu * np.arange(grid.periods)
    phase = np.exp(2j * np.pi * nu * grid.ell * grid.T)
    assert np.max(np.abs(zf[m : 2 * m] - zf[:m] * phase[None, :])) < 1e-10

    z = zak_transform(f)
    lt = grid.ell * grid.T
    assert lt * z.energy() == pytest.approx(f.energy(), rel=1e-10)


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=10, deadline=None)
def test_zak_inverse_round_trip(seed):
    grid = zak_grid()
    f = random_signal(grid, seed)
    back = zak_inverse(zak_transform(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-10
