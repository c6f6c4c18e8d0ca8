"""Partition-of-unity window pairs, mollifiers, and Gabor frame tools.

A window pair (r, phi) discretizes one cover cell of the time-frequency
plane.  The cell convention is fixed for every kind: the time window r
covers [0, T] (support widened to [-delta, T + delta]), and the band
window phi_hat covers the centered cell [-Omega/2, Omega/2] (support
widened by delta), with Omega = 1 / (ell T).  Three kinds are supported:

  rect           r is the indicator of [0, T), phi_hat equals ell * T on
                 [-Omega/2, Omega/2); delta is 0.
  linear_pou     translates of r along T Z and of phi_hat along Omega Z
                 sum to 1 exactly.
  quadratic_pou  squared translates along the same lattices sum to 1
                 exactly.

The transitions are built from one smooth even bump, so the partition
identities hold to roundoff by construction, not by tuning.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.typing as npt
from scipy import ndimage
from scipy.integrate import cumulative_trapezoid

from .grid import GridSpec, SampledSignal, steps_of
from .transforms import inverse_ft, forward_ft, stft_lattice

KINDS = ("rect", "linear_pou", "quadratic_pou")


def bump(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Smooth even bump exp(-1 / (1 - x^2)) on (-1, 1), zero outside."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def _edge_profiles(n_d: int, kind: str):
    """Rising and falling transition samples over 2 n_d + 1 points."""
    v = np.linspace(-1.0, 1.0, 2 * n_d + 1)
    c = cumulative_trapezoid(bump(v), v, initial=0.0)
    c /= c[-1]
    if kind == "linear_pou":
        return c, 1.0 - c
    up, down = np.sin(0.5 * np.pi * c), np.cos(0.5 * np.pi * c)
    up[-1], down[-1] = 1.0, 0.0
    return up, down


def _assemble_window(n_axis: int, n_int: int, n_d: int, kind: str) -> npt.NDArray[np.float64]:
    """Window over [0, n_int) steps with n_d transition steps on each side."""
    w = np.zeros(n_axis)
    if n_d == 0:
        w[:n_int] = 1.0
        return w
    up, down = _edge_profiles(n_d, kind)
    w[np.arange(n_d, n_int - n_d + 1) % n_axis] = 1.0
    w[np.arange(-n_d, n_d) % n_axis] = up[: 2 * n_d]
    w[np.arange(n_int - n_d + 1, n_int + n_d + 1) % n_axis] = down[1:]
    return w


@dataclass
class WindowPair:
    """Cover-cell window pair: time window r and band window phi."""

    kind: str
    grid: GridSpec
    delta: float
    r: SampledSignal
    phi_hat: SampledSignal
    phi: SampledSignal


def build_pou_pair(grid: GridSpec, kind: str, delta: float) -> WindowPair:
    """Construct the window pair of the given kind on the grid.

    delta must be a whole number of steps on both axes, with 2 delta < T
    and 2 delta < Omega so the flat regions are nonempty.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown window kind {kind!r}")
    k_bins = grid.periods
    if k_bins % 2:
        raise ValueError("centered band windows need an even bin count per Omega")
    if kind == "rect":
        if delta != 0:
            raise ValueError("rect windows have no transition region")
        r_vals = np.zeros(grid.n)
        r_vals[: grid.n_per_T] = 1.0
        ph_vals = np.zeros(grid.n)
        ph_vals[np.arange(-(k_bins // 2), k_bins // 2) % grid.n] = grid.ell * grid.T
    else:
        n_d = steps_of(delta, grid.dt)
        n_dnu = steps_of(delta, grid.dnu)
        if n_d < 1 or n_dnu < 1:
            raise ValueError("delta must be positive and grid aligned on both axes")
        if 2 * n_d >= grid.n_per_T or 2 * n_dnu >= k_bins:
            raise ValueError("delta must stay below T/2 and Omega/2")
        r_vals = _assemble_window(grid.n, grid.n_per_T, n_d, kind)
        ph_vals = np.roll(_assemble_window(grid.n, k_bins, n_dnu, kind), -(k_bins // 2))
    r = SampledSignal(grid, r_vals + 0j)
    phi_hat = SampledSignal(grid, ph_vals + 0j, 0, "frequency")
    return WindowPair(kind, grid, float(delta), r, phi_hat, inverse_ft(phi_hat))


def pou_defect(pair: WindowPair) -> dict:
    """Largest deviation of the partition sums from 1, per axis."""
    power = 2 if pair.kind == "quadratic_pou" else 1
    grid = pair.grid
    r = np.abs(pair.r.values) ** power
    n_shifts = grid.n // grid.n_per_T
    sum_t = sum(np.roll(r, k * grid.n_per_T) for k in range(n_shifts))
    ph = np.abs(pair.phi_hat.values) ** power
    if pair.kind == "rect":
        ph = ph * (grid.omega ** power)
    n_bands = grid.n // grid.periods
    sum_nu = sum(np.roll(ph, k * grid.periods) for k in range(n_bands))
    return {
        "time": float(np.max(np.abs(sum_t - 1.0))),
        "freq": float(np.max(np.abs(sum_nu - 1.0))),
    }


@dataclass
class Mollifier:
    """Unit-mass smooth bump with measured spectral flatness on a band."""

    phi_moll: SampledSignal
    delta: float
    band: float
    flatness_eps: float
    target_eps: Optional[float]
    met: bool


def build_mollifier(
    grid: GridSpec, delta: float, band: float, target_eps: Optional[float] = None
) -> Mollifier:
    """Unit-integral bump of half-width delta with flatness measured on [-band, band].

    If target_eps is given and the measured flatness is worse, the
    mollifier is still returned with met=False and the achieved value.
    """
    steps_of(delta, grid.dt)
    t = grid.times()
    vals = bump(t / delta)
    total = vals.sum() * grid.dt
    if total <= 0:
        raise ValueError("delta too small for the grid")
    vals = vals / total
    phi_moll = SampledSignal(grid, vals + 0j)
    hat = forward_ft(phi_moll)
    on_band = np.abs(grid.freqs()) <= band + 1e-12
    eps = float(np.max(np.abs(hat.values[on_band] - 1.0)))
    met = target_eps is None or eps <= target_eps
    return Mollifier(phi_moll, float(delta), float(band), eps, target_eps, met)


def build_lowpass(grid: GridSpec, band: float, cutoff: float) -> SampledSignal:
    """Interpolation window whose spectrum is 1 on [-band, band] and falls
    smoothly to 0 by |nu| = cutoff.

    Both band and cutoff must sit on frequency bins with cutoff > band.
    The smooth rolloff makes the time-domain window decay much faster
    than the sharp-cutoff kernel, at the price of a wider passband.
    """
    n_flat = steps_of(band, grid.dnu)
    n_cut = steps_of(cutoff, grid.dnu)
    n_d = n_cut - n_flat
    if n_d < 1:
        raise ValueError("cutoff must exceed band by at least one bin")
    if 2 * n_cut >= grid.n:
        raise ValueError("cutoff exceeds the representable frequency range")
    v = np.linspace(-1.0, 1.0, n_d + 1)
    c = cumulative_trapezoid(bump(v), v, initial=0.0)
    falling = 1.0 - c / c[-1] if c[-1] > 0 else np.zeros_like(c)
    k = np.abs(np.fft.fftfreq(grid.n, d=1.0) * grid.n).round().astype(int)
    hat = np.zeros(grid.n)
    hat[k <= n_flat] = 1.0
    edge = (k > n_flat) & (k < n_cut)
    hat[edge] = falling[k[edge] - n_flat]
    return inverse_ft(SampledSignal(grid, hat + 0j, domain="frequency"))


@dataclass
class GaborFrameSpec:
    """Gabor system of a window over the lattice a Z x b Z."""

    g: SampledSignal
    a: float
    b: float
    declared_bound: Optional[float] = None

    def __post_init__(self):
        grid = self.g.grid
        sa = steps_of(self.a, grid.dt)
        sb = steps_of(self.b, grid.dnu)
        if sa < 1 or sb < 1 or grid.n % sa or grid.n % sb:
            raise ValueError("lattice steps must be positive and divide the grid evenly")


def gabor_synthesis(
    coeffs: npt.NDArray[np.complex128], window: SampledSignal, a: float, b: float
) -> SampledSignal:
    """Sum of coeffs[k, l] * M_{l b} T_{k a} g over the lattice."""
    grid = window.grid
    sa = steps_of(a, grid.dt)
    sb = steps_of(b, grid.dnu)
    g = window.canonical().values
    out = np.zeros(grid.n, dtype=np.complex128)
    spectrum = np.zeros(grid.n, dtype=np.complex128)
    for k in range(coeffs.shape[0]):
        spectrum[:] = 0.0
        spectrum[:: sb] = coeffs[k]
        out += np.roll(g, k * sa) * (grid.n * np.fft.ifft(spectrum))
    return SampledSignal(grid, out)


def frame_operator(frame: GaborFrameSpec, signal: SampledSignal) -> SampledSignal:
    """Analysis followed by synthesis over the full lattice."""
    coeffs = stft_lattice(signal, frame.g, frame.a, frame.b)
    return gabor_synthesis(coeffs, frame.g, frame.a, frame.b)


def frame_bounds(
    frame: GaborFrameSpec, tol: float = 1e-8, max_iter: int = 5000, seed: int = 0
) -> tuple[float, float]:
    """Optimal frame bounds (A, B) via power iteration on the frame operator.

    B is the largest eigenvalue of S.  A comes from a second power
    iteration on c I - S with c slightly above B, whose largest
    eigenvalue is c - A.  Iterations stop when the Rayleigh quotient
    stagnates to the requested relative tolerance.
    """
    grid = frame.g.grid
    rng = np.random.default_rng(seed)

    def extreme(apply_op):
        v = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(max_iter):
            w = apply_op(v)
            lam_new = float(np.real(np.vdot(v, w)))
            norm = np.linalg.norm(w)
            if norm == 0.0:
                return 0.0
            v = w / norm
            if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-30):
                return lam_new
            lam = lam_new
        return lam

    def apply_s(vec):
        return frame_operator(frame, SampledSignal(grid, vec)).values

    b_bound = extreme(apply_s)
    c = 1.25 * b_bound if b_bound > 0 else 1.0

    def apply_shifted(vec):
        return c * vec - apply_s(vec)

    a_bound = c - extreme(apply_shifted)
    return a_bound, b_bound


def localization_measure(
    signal: SampledSignal, frame: GaborFrameSpec, lattice_mask: npt.NDArray[np.bool_]
) -> float:
    """Fraction of Gabor coefficient energy inside the lattice mask."""
    coeffs = stft_lattice(signal, frame.g, frame.a, frame.b)
    if lattice_mask.shape != coeffs.shape:
        raise ValueError("mask shape does not match the coefficient lattice")
    power = np.abs(coeffs) ** 2
    total = float(power.sum())
    if total == 0.0:
        return 0.0
    return float(power[lattice_mask].sum() / total)


def _periodic_edt(mask: npt.NDArray[np.bool_], sampling) -> npt.NDArray[np.float64]:
    """Distance to the nearest True sample, with both axes periodic."""
    tiled = np.tile(mask, (3, 3))
    dist = ndimage.distance_transform_edt(~tiled, sampling=sampling)
    nx, ny = mask.shape
    return dist[nx : 2 * nx, ny : 2 * ny]


def erode(mask: npt.NDArray[np.bool_], margin: float, sampling) -> npt.NDArray[np.bool_]:
    """Samples deeper than margin inside the mask (periodic)."""
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    if margin == 0 or not mask.any():
        return mask.copy()
    depth = _periodic_edt(~mask, sampling)
    return depth > margin + 1e-12


def dilate(mask: npt.NDArray[np.bool_], margin: float, sampling) -> npt.NDArray[np.bool_]:
    """Samples within margin of the mask (periodic)."""
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    if margin == 0 or mask.all() or not mask.any():
        return mask.copy()
    dist = _periodic_edt(mask, sampling)
    return dist <= margin + 1e-12


def window_report(pair: WindowPair, mollifier: Optional[Mollifier] = None) -> dict:
    """Measured invariants of a window pair, as a JSON-ready dict."""
    grid = pair.grid
    defect = pou_defect(pair)
    r_abs = np.abs(pair.r.values)
    ph_abs = np.abs(pair.phi_hat.values)
    t = grid.times()
    nu = grid.freqs()
    report = {
        "kind": pair.kind,
        "delta": pair.delta,
        "T": grid.T,
        "omega": grid.omega,
        "pou_defect_time": defect["time"],
        "pou_defect_freq": defect["freq"],
        "r_support": [float(t[r_abs > 0].min()), float(t[r_abs > 0].max())] if r_abs.any() else None,
        "phi_hat_support": [float(nu[ph_abs > 0].min()), float(nu[ph_abs > 0].max())],
        "r_max": float(r_abs.max()),
        "phi_hat_max": float(ph_abs.max()),
    }
    if mollifier is not None:
        report["mollifier"] = {
            "delta": mollifier.delta,
            "band": mollifier.band,
            "flatness_eps": mollifier.flatness_eps,
            "met": mollifier.met,
        }
    return report
