"""Grids, sampled signals, and two-variable arrays on a periodic domain.

Everything is computed on a uniform grid of N = ell * n_per_T * periods
samples with spacing dt.  The ambient interval of length P = N * dt is
treated as a circle: sample i represents the time (i * dt) mod P, and
signed coordinates wrap to [-P/2, P/2).  The dual frequency grid has
spacing dnu = 1 / P and total extent 1 / dt, wrapped the same way.

Index 0 always carries coordinate 0.  Signals may relabel that through
origin_index; canonical() rolls it back to index 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt


class GridAlignmentError(ValueError):
    """Raised when a requested coordinate does not land on the grid."""


def wrap_signed(x, period):
    """Map coordinates into [-period/2, period/2)."""
    return (np.asarray(x) + period / 2) % period - period / 2


def steps_of(x: float, step: float) -> int:
    """Number of grid steps in x, raising if x is not a whole multiple."""
    r = x / step
    j = round(r)
    if abs(r - j) > 1e-9 * max(1.0, abs(r)):
        raise GridAlignmentError(f"coordinate {x} is not a multiple of step {step}")
    return int(j)


def is_aligned(x: float, step: float) -> bool:
    """True when x is a whole number of grid steps."""
    try:
        steps_of(x, step)
    except GridAlignmentError:
        return False
    return True


@dataclass(frozen=True)
class GridSpec:
    """Uniform discretization of the ambient circle.

    dt * n_per_T is the lattice step T of the scheme the grid serves, ell
    is that scheme's period count L (1 when no scheme is involved), and
    the circle holds `periods` repetitions of the length ell * T block.
    """

    dt: float
    n_per_T: int
    periods: int
    ell: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        for name in ("n_per_T", "periods", "ell"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer")

    @property
    def T(self) -> float:
        return self.dt * self.n_per_T

    @property
    def n(self) -> int:
        """Total number of samples N."""
        return self.ell * self.n_per_T * self.periods

    @property
    def extent(self) -> float:
        """Length P of the ambient circle."""
        return self.n * self.dt

    @property
    def dnu(self) -> float:
        """Frequency spacing 1 / P."""
        return 1.0 / self.extent

    @property
    def omega(self) -> float:
        """Frequency lattice step 1 / (ell * T); always periods * dnu."""
        return 1.0 / (self.ell * self.T)

    def times(self) -> npt.NDArray[np.float64]:
        return wrap_signed(np.arange(self.n) * self.dt, self.extent)

    def freqs(self) -> npt.NDArray[np.float64]:
        return wrap_signed(np.arange(self.n) * self.dnu, 1.0 / self.dt)

    def time_index(self, t: float) -> int:
        """Index of the sample at time t (mod P)."""
        return steps_of(t, self.dt) % self.n

    def freq_index(self, nu: float) -> int:
        """Index of the frequency bin at nu (mod 1/dt)."""
        return steps_of(nu, self.dnu) % self.n

    def refine(self, factor: int) -> "GridSpec":
        """Same physical layout with dt reduced by an integer factor."""
        if not isinstance(factor, (int, np.integer)) or factor < 1:
            raise ValueError("factor must be a positive integer")
        return GridSpec(self.dt / factor, self.n_per_T * factor, self.periods, self.ell)


@dataclass(eq=False)
class SampledSignal:
    """Complex samples over one ambient period, in index order.

    domain selects the step: "time" samples are dt apart, "frequency"
    samples are dnu apart.  Sample origin_index carries coordinate 0.
    """

    grid: GridSpec
    values: npt.NDArray[np.complex128]
    origin_index: int = 0
    domain: str = "time"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.n,):
            raise ValueError(f"values must have shape ({self.grid.n},)")
        if self.domain not in ("time", "frequency"):
            raise ValueError("domain must be 'time' or 'frequency'")
        if not 0 <= self.origin_index < self.grid.n:
            raise ValueError("origin_index out of range")

    @property
    def step(self) -> float:
        return self.grid.dt if self.domain == "time" else self.grid.dnu

    def coords(self) -> npt.NDArray[np.float64]:
        period = self.grid.n * self.step
        return wrap_signed((np.arange(self.grid.n) - self.origin_index) * self.step, period)

    def canonical(self) -> "SampledSignal":
        """Same signal with origin_index 0."""
        if self.origin_index == 0:
            return self
        return SampledSignal(self.grid, np.roll(self.values, -self.origin_index), 0, self.domain)

    def energy(self) -> float:
        """Squared norm with the quadrature weight."""
        return float(self.step * np.sum(np.abs(self.values) ** 2))

    def norm(self) -> float:
        return float(np.sqrt(self.energy()))

    def at(self, coord: float) -> complex:
        """Value at a grid-aligned coordinate (mod the ambient period)."""
        j = steps_of(coord, self.step) + self.origin_index
        return complex(self.values[j % self.grid.n])

    def shifted(self, coord: float) -> "SampledSignal":
        """Circular translate by a grid-aligned coordinate."""
        s = self.canonical()
        return SampledSignal(self.grid, np.roll(s.values, steps_of(coord, self.step)), 0, self.domain)

    def __add__(self, other: "SampledSignal") -> "SampledSignal":
        self._check_compatible(other)
        a, b = self.canonical(), other.canonical()
        return SampledSignal(self.grid, a.values + b.values, 0, self.domain)

    def __sub__(self, other: "SampledSignal") -> "SampledSignal":
        self._check_compatible(other)
        a, b = self.canonical(), other.canonical()
        return SampledSignal(self.grid, a.values - b.values, 0, self.domain)

    def __mul__(self, scalar: complex) -> "SampledSignal":
        return SampledSignal(self.grid, self.values * scalar, self.origin_index, self.domain)

    __rmul__ = __mul__

    def _check_compatible(self, other: "SampledSignal") -> None:
        if self.grid != other.grid or self.domain != other.domain:
            raise ValueError("signals live on different grids or domains")


PLANE_SEMANTICS = ("time_freq", "symbol", "kernel", "impulse")

_PLANE_STEPS = {
    "time_freq": ("dt", "dnu"),
    "symbol": ("dt", "dnu"),
    "kernel": ("dt", "dt"),
    "impulse": ("dt", "dt"),
}


@dataclass(eq=False)
class PlaneArray:
    """Two-variable array tied to a grid.

    axis_semantics picks the axis steps: time_freq and symbol planes use
    (dt, dnu), kernel and impulse planes use (dt, dt).  An axis of grid.n
    entries wraps like the ambient circle.  Shorter axes arise only on
    Zak domains: a short first axis starts at 0 and does not wrap, a
    short second axis wraps over its own span.
    """

    grid: GridSpec
    values: npt.NDArray[np.complex128]
    axis_semantics: str

    def __post_init__(self):
        if self.axis_semantics not in _PLANE_STEPS:
            raise ValueError(f"unknown axis_semantics {self.axis_semantics!r}")
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 2:
            raise ValueError("values must be two dimensional")
        for size in self.values.shape:
            if self.grid.n % size != 0:
                raise ValueError("axis lengths must divide grid.n")

    @property
    def x_step(self) -> float:
        return getattr(self.grid, _PLANE_STEPS[self.axis_semantics][0])

    @property
    def y_step(self) -> float:
        return getattr(self.grid, _PLANE_STEPS[self.axis_semantics][1])

    def x_coords(self) -> npt.NDArray[np.float64]:
        nx = self.values.shape[0]
        if nx == self.grid.n:
            return wrap_signed(np.arange(nx) * self.x_step, nx * self.x_step)
        return np.arange(nx) * self.x_step

    def y_coords(self) -> npt.NDArray[np.float64]:
        ny = self.values.shape[1]
        return wrap_signed(np.arange(ny) * self.y_step, ny * self.y_step)

    def energy(self) -> float:
        """Squared norm with the quadrature weights."""
        return float(self.x_step * self.y_step * np.sum(np.abs(self.values) ** 2))

    def norm(self) -> float:
        return float(np.sqrt(self.energy()))

    def at(self, x: float, y: float) -> complex:
        """Value at grid-aligned coordinates (mod each axis span)."""
        i = steps_of(x, self.x_step) % self.values.shape[0]
        k = steps_of(y, self.y_step) % self.values.shape[1]
        return complex(self.values[i, k])
