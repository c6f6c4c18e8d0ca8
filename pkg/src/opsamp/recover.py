"""Recovery of an operator from its response to one weighted delta train.

All routes consume the response y = Hw of an operator whose spreading
function lives, with margin at least the window transition width delta,
inside the L cells of a sampling scheme.  Scheme offsets are removed up
front: ytilde(x) = e^{-2 pi i nu0 x} y(x) is the pure-train response of
the operator with spreading eta(t + tau0, gamma + nu0), so the
zero-offset formulas below run on ytilde and the results are rolled and
rephased back at the end.

Zak route.  The quasi-periodic Zak extension of ytilde obeys

    L T Zy(t + pT, nu) = sum_u c_{p-u} sum_w eta(t + uT, nu + w Omega)
                         e^{2 pi i (nu + w Omega)(t + pT)},

so multiplying by r(t) phi_hat(nu) e^{-2 pi i nu p T} turns the row
values at p = 0..L-1 into the system matrix A acting on the L windowed
slices

    Y_j(t, nu) = r(t) phi_hat(nu) eta(t + k_j T, nu + n_j Omega)
                 e^{2 pi i (nu + n_j Omega) t},

and b = A^{-1} isolates them.  Undoing the chirp and scattering each
slice back to its cell rebuilds eta, with the window factor divided out
per kind: quadratic windows multiply by r phi_hat once more (squares sum
to 1), linear windows scatter as is (translates sum to 1), rect windows
divide by the plateau value L T.

Kernel route.  The same inversion in the time domain gives the direct
double sum

    h(x, t) = L T sum_j r(t - k_j T) e^{2 pi i n_j Omega (k_j T - t + x)}
              sum_q b_{jq} y(t + (q - k_j) T) phi((x - t) - (q - k_j) T)

for window pairs with phi_hat of plateau height 1 (rect pairs already
carry the L T inside phi_hat, so the prefactor is dropped).

Coefficient route.  With quadratic windows and oversampling rates
beta1 >= 1 + 2 delta / Omega, beta2 >= 1 + 2 delta / T, the lattice
steps a = L T / beta1 and b = L Omega / beta2 are fine enough that

    sigma^(j)_{m,l} = sum_q b_{jq} phi(-(q + k_j) T - m a)
                      <y, T_{qT} M_{lb} r>

are Nyquist samples of the transformed windowed slice, and the symbol is
rebuilt exactly by

    sigma(x, xi) = (L^2 T / (beta1 beta2)) sum_j e^{2 pi i x n_j Omega}
                   e^{-2 pi i k_j T xi} sum_{m,l} sigma^(j)_{m,l}
                   V(x + k_j T + m a, xi + n_j Omega - l b),

where V(X, Xi) = dt sum_u r(u) phi(X - u) e^{-2 pi i u Xi} is evaluated
once on the full grid so every shifted copy lands on grid points with no
interpolation.  The coefficient at (j, m, l) sits at the center of its
atom, x = T/2 - k_j T - m a and xi = l b - n_j Omega, which is what
subset masks select on.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.typing as npt

from .grid import GridSpec, PlaneArray, SampledSignal, steps_of, wrap_signed
from .identify import SamplingScheme
from .serialize import _meta_line, _parse_meta
from .transforms import stft_lattice, zak_full
from .windows import WindowPair


def _require_compatible(response: SampledSignal, scheme: SamplingScheme, windows: WindowPair):
    """Shared geometry checks; returns (grid, m_T, K, d_t, d_nu, sites)."""
    grid = response.grid
    if response.domain != "time":
        raise ValueError("response must be a time-domain signal")
    if windows.grid != grid:
        raise ValueError("windows live on a different grid")
    if scheme.b is None:
        raise ValueError("scheme has no weights; call make_weights first")
    scheme.validate_grid(grid)
    if grid.ell != scheme.L or steps_of(scheme.T, grid.dt) != grid.n_per_T:
        raise ValueError("grid block structure must match the scheme (ell = L, T per block)")
    if windows.delta > scheme.delta + 1e-12:
        raise ValueError("window transition width exceeds the scheme padding")
    m_t = grid.n_per_T
    k_bins = grid.periods
    d_t = steps_of(windows.delta, grid.dt)
    d_nu = steps_of(windows.delta, grid.dnu)
    return grid, m_t, k_bins, d_t, d_nu, grid.n // m_t


def _detwist(response: SampledSignal, scheme: SamplingScheme):
    """Remove the scheme offsets; returns (ytilde values, s_tau, s_nu)."""
    grid = response.grid
    s_tau = steps_of(scheme.tau0, grid.dt)
    s_nu = steps_of(scheme.nu0, grid.dnu)
    values = response.canonical().values
    if s_nu:
        values = values * np.exp(-2j * np.pi * s_nu * np.arange(grid.n) / grid.n)
    return values, s_tau, s_nu


@dataclass(eq=False)
class ZakSlices:
    """Windowed spreading slices Y_j on the padded window cell.

    values[j, a, b] holds Y_j at t = (row0 + a) dt, nu = (col0 + b) dnu;
    the row range covers [-delta, T + delta), the column range
    [-Omega/2 - delta, Omega/2 + delta).
    """

    scheme: SamplingScheme
    windows: WindowPair
    values: npt.NDArray[np.complex128]
    row0: int
    col0: int

    @property
    def grid(self) -> GridSpec:
        return self.windows.grid

    def row_indices(self) -> npt.NDArray[np.int64]:
        return np.arange(self.row0, self.row0 + self.values.shape[1])

    def col_indices(self) -> npt.NDArray[np.int64]:
        return np.arange(self.col0, self.col0 + self.values.shape[2])


def zak_system_solve(
    response: SampledSignal, scheme: SamplingScheme, windows: WindowPair
) -> ZakSlices:
    """Invert the train mixing in the Zak domain into per-cell slices."""
    grid, m_t, k_bins, d_t, d_nu, _ = _require_compatible(response, scheme, windows)
    values, _, _ = _detwist(response, scheme)
    zfull = zak_full(SampledSignal(grid, values))
    big_l, lt = scheme.L, scheme.L * scheme.T
    i_r = np.arange(-d_t, m_t + d_t)
    i_nu = np.arange(-(k_bins // 2) - d_nu, k_bins // 2 + d_nu)
    window = lt * windows.r.values[i_r % grid.n][:, None] * windows.phi_hat.values[i_nu % grid.n][None, :]
    stack = np.empty((big_l, len(i_r), len(i_nu)), dtype=np.complex128)
    for p in range(big_l):
        zp = zfull[np.ix_((i_r + p * m_t) % grid.n, i_nu % k_bins)]
        stack[p] = window * zp * np.exp(-2j * np.pi * i_nu[None, :] * p / (big_l * k_bins))
    return ZakSlices(
        scheme,
        windows,
        np.einsum("jp,pab->jab", scheme.b, stack),
        int(i_r[0]),
        int(i_nu[0]),
    )


def eta_from_slices(slices: ZakSlices) -> PlaneArray:
    """Reassemble the spreading function from the windowed slices."""
    grid = slices.grid
    scheme, pair = slices.scheme, slices.windows
    i_r, i_nu = slices.row_indices(), slices.col_indices()
    if pair.kind == "quadratic_pou":
        weight = pair.r.values[i_r % grid.n][:, None] * pair.phi_hat.values[i_nu % grid.n][None, :]
    elif pair.kind == "linear_pou":
        weight = 1.0
    else:
        weight = 1.0 / (scheme.L * scheme.T)
    eta = np.zeros((grid.n, grid.n), dtype=np.complex128)
    k_bins = grid.periods
    for j, (k_j, n_j) in enumerate(scheme.shifts):
        ig = i_nu + n_j * k_bins
        chirp = np.exp(-2j * np.pi * ig[None, :] * i_r[:, None] / grid.n)
        rows = (i_r + k_j * grid.n_per_T) % grid.n
        np.add.at(eta, np.ix_(rows, ig % grid.n), weight * slices.values[j] * chirp)
    s_tau = steps_of(scheme.tau0, grid.dt)
    s_nu = steps_of(scheme.nu0, grid.dnu)
    if s_tau or s_nu:
        eta = np.roll(np.roll(eta, s_tau, axis=0), s_nu, axis=1)
    return PlaneArray(grid, eta, "time_freq")


def _comb_columns(
    values: npt.NDArray[np.complex128],
    site_weights: npt.NDArray[np.complex128],
    t_cols: npt.NDArray[np.int64],
    m_t: int,
    phi_values: npt.NDArray[np.complex128],
):
    """Rows of sum_u w_u y(t + u T) phi(x - t - u T), one per column index."""
    n = len(values)
    sites = np.arange(n // m_t)
    idx = (t_cols[:, None] + sites[None, :] * m_t) % n
    spikes = np.zeros((len(t_cols), n), dtype=np.complex128)
    spikes[np.arange(len(t_cols))[:, None], idx] = site_weights[None, :] * values[idx]
    return np.fft.ifft(np.fft.fft(spikes, axis=1) * np.fft.fft(phi_values)[None, :], axis=1)


def recover_kernel_rect(response: SampledSignal, t_period: float, phi: SampledSignal) -> PlaneArray:
    """Impulse response of a single-cell operator from the plain train.

    Each column t in [0, T) interpolates the response samples y(t + kT)
    with translates phi(x - t - kT); phi must reproduce T-spaced samples
    of signals bandlimited to the cell, i.e. carry a spectrum equal to T
    across the occupied band and zero on its 1/T translates.
    """
    grid = response.grid
    if response.domain != "time":
        raise ValueError("response must be a time-domain signal")
    if phi.grid != grid or phi.domain != "time":
        raise ValueError("phi must be a time signal on the response grid")
    m_t = steps_of(t_period, grid.dt)
    if m_t < 1 or grid.n % m_t:
        raise ValueError("T must be a positive whole number of steps dividing the grid")
    t_cols = np.arange(m_t)
    ones = np.ones(grid.n // m_t, dtype=np.complex128)
    cols = _comb_columns(response.canonical().values, ones, t_cols, m_t, phi.canonical().values)
    h = np.zeros((grid.n, grid.n), dtype=np.complex128)
    h[:, :m_t] = cols.T
    return PlaneArray(grid, h, "impulse")


def recover_kernel_general(
    response: SampledSignal, scheme: SamplingScheme, windows: WindowPair
) -> PlaneArray:
    """Impulse response via the direct demixed interpolation sum."""
    grid, m_t, k_bins, d_t, _, sites = _require_compatible(response, scheme, windows)
    if (
        scheme.L == 1
        and windows.kind == "rect"
        and scheme.tau0 == 0.0
        and scheme.nu0 == 0.0
        and scheme.c[0] == 1.0
    ):
        return recover_kernel_rect(response, scheme.T, windows.phi)
    values, s_tau, s_nu = _detwist(response, scheme)
    scale = 1.0 if windows.kind == "rect" else scheme.L * scheme.T
    phi_eff = scale * windows.phi.values
    h = np.zeros((grid.n, grid.n), dtype=np.complex128)
    x_idx = np.arange(grid.n)
    for j, (k_j, n_j) in enumerate(scheme.shifts):
        t_cols = np.arange(-d_t, m_t + d_t) + k_j * m_t
        weights = scheme.b[j, (np.arange(sites) + k_j) % scheme.L]
        inner = _comb_columns(values, weights, t_cols, m_t, phi_eff)
        mod = np.exp(2j * np.pi * n_j * k_bins * (k_j * m_t - t_cols[:, None] + x_idx[None, :]) / grid.n)
        contrib = windows.r.values[(t_cols - k_j * m_t) % grid.n][:, None] * mod * inner
        h[:, t_cols % grid.n] += contrib.T
    if s_tau:
        h = np.roll(h, s_tau, axis=1)
    if s_nu:
        h = h * np.exp(2j * np.pi * s_nu * x_idx / grid.n)[:, None]
    return PlaneArray(grid, h, "impulse")


@dataclass(eq=False)
class CoefficientTable:
    """Symbol coefficients sigma^(j)_{m,l} on the oversampled lattice.

    values[j, m, l] pairs with an atom centered at x = T/2 - k_j T - m a
    and xi = l b - n_j Omega, with lattice steps a = L T / beta1 and
    b = L Omega / beta2 wrapped over the ambient ranges.
    """

    scheme: SamplingScheme
    windows: WindowPair
    beta1: float
    beta2: float
    values: npt.NDArray[np.complex128]

    @property
    def grid(self) -> GridSpec:
        return self.windows.grid

    @property
    def a_time(self) -> float:
        """Time lattice step L T / beta1."""
        return self.scheme.L * self.scheme.T / self.beta1

    @property
    def b_freq(self) -> float:
        """Frequency lattice step L Omega / beta2."""
        return self.scheme.L * self.scheme.omega / self.beta2

    def entry(self, j: int, m: int, l: int) -> complex:
        return complex(self.values[j, m % self.values.shape[1], l % self.values.shape[2]])

    def center_indices(self, j: int):
        """Grid indices (x, xi) of the atom centers of row j."""
        grid = self.grid
        m_t = grid.n_per_T
        g = steps_of(self.a_time, grid.dt)
        s = steps_of(self.b_freq, grid.dnu)
        k_j, n_j = self.scheme.shifts[j]
        x_idx = (m_t // 2 - k_j * m_t - np.arange(self.values.shape[1]) * g) % grid.n
        xi_idx = (np.arange(self.values.shape[2]) * s - n_j * grid.periods) % grid.n
        return x_idx, xi_idx

    def positions(self, j: int):
        """Physical atom centers (x, xi) of row j, wrapped and signed."""
        x_idx, xi_idx = self.center_indices(j)
        grid = self.grid
        return (
            wrap_signed(x_idx * grid.dt, grid.extent),
            wrap_signed(xi_idx * grid.dnu, 1.0 / grid.dt),
        )

    def bound_constant(self) -> float:
        """Measured constant C with max |entries| <= C sup|sigma|."""
        grid = self.grid
        v = _interp_atom(self.windows)
        return float(grid.dt * grid.dnu * np.sum(np.abs(v)) / (self.scheme.L * self.scheme.T))

    def to_csv(self) -> str:
        buf = io.StringIO()
        meta = {
            "L": self.scheme.L,
            "T": self.scheme.T,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "kind": self.windows.kind,
        }
        buf.write(_meta_line(meta) + "\n")
        writer = csv.writer(buf)
        writer.writerow(["j", "m", "l", "x_pos", "xi_pos", "re", "im"])
        for j in range(self.values.shape[0]):
            x_pos, xi_pos = self.positions(j)
            for m in range(self.values.shape[1]):
                for l in range(self.values.shape[2]):
                    v = self.values[j, m, l]
                    writer.writerow(
                        [j, m, l, repr(float(x_pos[m])), repr(float(xi_pos[l])), repr(float(v.real)), repr(float(v.imag))]
                    )
        return buf.getvalue()


def coefficients_from_csv(text: str):
    """Parse a CoefficientTable CSV back into (meta dict, values array)."""
    lines = text.splitlines()
    meta = _parse_meta(lines[0])
    rows = [row for row in csv.reader(lines[2:]) if row]
    shape = tuple(max(int(row[k]) for row in rows) + 1 for k in range(3))
    values = np.zeros(shape, dtype=np.complex128)
    for row in rows:
        values[int(row[0]), int(row[1]), int(row[2])] = float(row[5]) + 1j * float(row[6])
    return meta, values


def _oversampling_steps(grid: GridSpec, scheme: SamplingScheme, beta1: float, beta2: float):
    """Lattice step counts (g, s) of the coefficient lattice, validated."""
    if beta1 < 1 + 2 * scheme.delta / scheme.omega - 1e-9:
        raise ValueError("beta1 below the oversampling floor 1 + 2 delta / Omega")
    if beta2 < 1 + 2 * scheme.delta / scheme.T - 1e-9:
        raise ValueError("beta2 below the oversampling floor 1 + 2 delta / T")
    g = steps_of(scheme.L * scheme.T / beta1, grid.dt)
    s = steps_of(scheme.L * scheme.omega / beta2, grid.dnu)
    if g < 1 or s < 1 or grid.n % g or grid.n % s:
        raise ValueError("oversampling lattice must divide the ambient grid evenly")
    return g, s


def discrete_coefficients(
    response: SampledSignal,
    scheme: SamplingScheme,
    windows: WindowPair,
    beta1: float,
    beta2: float,
) -> CoefficientTable:
    """Coefficient table from lattice inner products of the response."""
    grid, m_t, _, _, _, sites = _require_compatible(response, scheme, windows)
    if windows.kind != "quadratic_pou":
        raise ValueError("coefficient extraction needs quadratic_pou windows")
    g, s = _oversampling_steps(grid, scheme, beta1, beta2)
    n_m, n_l = grid.n // g, grid.n // s
    values, _, _ = _detwist(response, scheme)
    lat = stft_lattice(SampledSignal(grid, values), windows.r, scheme.T, scheme.L * scheme.omega / beta2)
    q = np.arange(sites)
    ip = lat * np.exp(2j * np.pi * np.arange(n_l)[None, :] * s * q[:, None] * m_t / grid.n)
    phi = windows.phi.values
    table = np.empty((scheme.L, n_m, n_l), dtype=np.complex128)
    for j, (k_j, n_j) in enumerate(scheme.shifts):
        gather = phi[(-(q[None, :] + k_j) * m_t - np.arange(n_m)[:, None] * g) % grid.n]
        table[j] = (gather * scheme.b[j, q % scheme.L][None, :]) @ ip
    return CoefficientTable(scheme, windows, float(beta1), float(beta2), table)


def _interp_atom(windows: WindowPair) -> npt.NDArray[np.complex128]:
    """V(X, Xi) = dt sum_u r(u) phi(X - u) e^{-2 pi i u Xi} on the grid."""
    grid = windows.grid
    r = windows.r.values
    support = np.flatnonzero(np.abs(r))
    x = np.arange(grid.n)
    m = np.zeros((grid.n, grid.n), dtype=np.complex128)
    m[:, support] = r[support][None, :] * windows.phi.values[(x[:, None] - support[None, :]) % grid.n]
    return grid.dt * np.fft.fft(m, axis=1)


def symbol_from_coefficients(
    table: CoefficientTable, subset: Optional[npt.NDArray[np.bool_]] = None
) -> PlaneArray:
    """Symbol rebuilt from the full table or a symbol-plane subset of it."""
    grid = table.grid
    scheme = table.scheme
    n, m_t, k_bins = grid.n, grid.n_per_T, grid.periods
    if subset is not None and subset.shape != (n, n):
        raise ValueError("subset mask must cover the full symbol plane")
    g = steps_of(table.a_time, grid.dt)
    s = steps_of(table.b_freq, grid.dnu)
    v_hat = np.fft.fft2(_interp_atom(table.windows))
    x = np.arange(n)
    out = np.zeros((n, n), dtype=np.complex128)
    for j, (k_j, n_j) in enumerate(scheme.shifts):
        x_idx, xi_idx = table.center_indices(j)
        coeffs = table.values[j]
        if subset is not None:
            coeffs = coeffs * subset[np.ix_(x_idx, xi_idx)]
        spikes = np.zeros((n, n), dtype=np.complex128)
        rows = (-k_j * m_t - np.arange(coeffs.shape[0]) * g) % n
        cols = (np.arange(coeffs.shape[1]) * s - n_j * k_bins) % n
        np.add.at(spikes, np.ix_(rows, cols), coeffs)
        conv = np.fft.ifft2(np.fft.fft2(spikes) * v_hat)
        phases = np.exp(2j * np.pi * (n_j * k_bins * x[:, None] - k_j * m_t * x[None, :]) / n)
        out += phases * conv
    out *= scheme.L**2 * scheme.T / (table.beta1 * table.beta2)
    s_tau = steps_of(scheme.tau0, grid.dt)
    s_nu = steps_of(scheme.nu0, grid.dnu)
    if s_tau or s_nu:
        out *= np.exp(2j * np.pi * (s_nu * x[:, None] - s_tau * x[None, :]) / n)
    return PlaneArray(grid, out, "symbol")
