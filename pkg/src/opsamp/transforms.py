"""Fourier, symplectic, short-time Fourier, and Zak transforms.

forward_ft follows the integral convention

    fhat(nu) = integral f(t) exp(-2 pi i t nu) dt,

discretized as fhat[k] = dt * sum_i f[i] exp(-2 pi i i k / N), so a unit
impulse of height 1/dt at 0 maps to the all-ones spectrum.  inverse_ft
is the exact inverse.

symplectic_ft acts on two-variable arrays F(t, gamma) by

    (Fs F)(x, xi) = integral integral F(t, gamma)
                    exp(-2 pi i (t xi - x gamma)) dt dgamma,

which on the shared (dt, dnu) grid reduces to one DFT per axis with all
scale factors cancelling.  Applying it twice returns the input, and it
maps spreading (time_freq) arrays to symbol arrays and back.

zak_transform uses the non-normalized sum

    Zf(t, nu) = sum_n f(t - n ell T) exp(2 pi i n ell T nu)

over the K = periods blocks of the ambient circle, on the domain
[0, ell T) x [-omega/2, omega/2) with omega = 1 / (ell T).  It is
omega-periodic in nu and quasi-periodic in t, and K * zak_inverse
recovers f exactly.  Its energy is omega times the signal energy.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from .grid import GridSpec, PlaneArray, SampledSignal, steps_of


def forward_ft(signal: SampledSignal) -> SampledSignal:
    """Fourier transform of a time signal, as a frequency signal."""
    if signal.domain != "time":
        raise ValueError("forward_ft expects a time-domain signal")
    s = signal.canonical()
    return SampledSignal(s.grid, s.grid.dt * np.fft.fft(s.values), 0, "frequency")


def inverse_ft(signal: SampledSignal) -> SampledSignal:
    """Inverse Fourier transform of a frequency signal, as a time signal."""
    if signal.domain != "frequency":
        raise ValueError("inverse_ft expects a frequency-domain signal")
    s = signal.canonical()
    return SampledSignal(s.grid, np.fft.ifft(s.values) / s.grid.dt, 0, "time")


_SYMPLECTIC_FLIP = {"time_freq": "symbol", "symbol": "time_freq"}


def symplectic_ft(plane: PlaneArray) -> PlaneArray:
    """Symplectic Fourier transform between spreading and symbol planes."""
    if plane.axis_semantics not in _SYMPLECTIC_FLIP:
        raise ValueError("symplectic_ft expects a time_freq or symbol plane")
    n = plane.grid.n
    if plane.values.shape != (n, n):
        raise ValueError("symplectic_ft expects a full square plane")
    out = np.fft.ifft(np.fft.fft(plane.values, axis=0), axis=1).T
    return PlaneArray(plane.grid, out, _SYMPLECTIC_FLIP[plane.axis_semantics])


def stft(signal: SampledSignal, window: SampledSignal, x: float, xi: float) -> complex:
    """Short-time Fourier coefficient <f, M_xi T_x g> at one plane point."""
    f = signal.canonical().values
    g = window.canonical().values
    grid = signal.grid
    if window.grid != grid:
        raise ValueError("signal and window live on different grids")
    jx = steps_of(x, grid.dt)
    kxi = steps_of(xi, grid.dnu) % grid.n
    phase = np.exp(-2j * np.pi * kxi * np.arange(grid.n) / grid.n)
    return complex(grid.dt * np.sum(f * np.conj(np.roll(g, jx)) * phase))


def stft_lattice(
    signal: SampledSignal,
    window: SampledSignal,
    a: float,
    b: float,
) -> npt.NDArray[np.complex128]:
    """All coefficients <f, M_{l b} T_{k a} g> on the lattice a Z x b Z.

    Returns an (n/sa, n/sb) array indexed by (k, l), where sa and sb are
    the step counts of a and b; both must divide n evenly.
    """
    grid = signal.grid
    if window.grid != grid:
        raise ValueError("signal and window live on different grids")
    sa = steps_of(a, grid.dt)
    sb = steps_of(b, grid.dnu)
    if sa < 1 or sb < 1 or grid.n % sa or grid.n % sb:
        raise ValueError("lattice steps must be positive and divide the grid evenly")
    f = signal.canonical().values
    g = window.canonical().values
    n_shift, n_mod = grid.n // sa, grid.n // sb
    coeffs = np.empty((n_shift, n_mod), dtype=np.complex128)
    for k in range(n_shift):
        u = f * np.conj(np.roll(g, k * sa))
        coeffs[k] = grid.dt * np.fft.fft(u)[:: sb][:n_mod]
    return coeffs


def _zak_rows(values: npt.NDArray[np.complex128], grid: GridSpec, rows: int):
    m = grid.ell * grid.n_per_T
    k_blocks = grid.periods
    idx = (np.arange(rows)[None, :] - np.arange(k_blocks)[:, None] * m) % grid.n
    slices = values[idx]
    return k_blocks * np.fft.ifft(slices, axis=0).T


def zak_transform(signal: SampledSignal) -> PlaneArray:
    """Zak transform on the cell [0, ell T) x [-omega/2, omega/2)."""
    if signal.domain != "time":
        raise ValueError("zak_transform expects a time-domain signal")
    s = signal.canonical()
    m = s.grid.ell * s.grid.n_per_T
    return PlaneArray(s.grid, _zak_rows(s.values, s.grid, m), "time_freq")


def zak_full(signal: SampledSignal) -> npt.NDArray[np.complex128]:
    """Zak values on the full time grid, shape (n, periods).

    Row i + ell * n_per_T equals exp(2 pi i nu ell T) times row i, so this
    is the quasi-periodic extension of the transform cell.
    """
    if signal.domain != "time":
        raise ValueError("zak_full expects a time-domain signal")
    s = signal.canonical()
    return _zak_rows(s.values, s.grid, s.grid.n)


def zak_inverse(plane: PlaneArray) -> SampledSignal:
    """Exact inverse of zak_transform."""
    grid = plane.grid
    m = grid.ell * grid.n_per_T
    if plane.values.shape != (m, grid.periods):
        raise ValueError("zak_inverse expects a (ell*n_per_T, periods) plane")
    blocks = np.fft.fft(plane.values, axis=1).T / grid.periods
    values = np.empty(grid.n, dtype=np.complex128)
    for n_block in range(grid.periods):
        idx = (np.arange(m) - n_block * m) % grid.n
        values[idx] = blocks[n_block]
    return SampledSignal(grid, values, 0, "time")
