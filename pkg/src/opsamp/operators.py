"""Operators with compactly supported spreading functions.

An operator H is stored through its spreading function eta on the
(t, gamma) plane and acts on signals by

    H f(x) = integral integral eta(t, gamma)
             exp(2 pi i gamma x) f(x - t) dt dgamma,

so a spreading spike at (t0, g0) translates by t0 and then modulates
by g0.

Equivalent representations are derived lazily and cached: the symbol
sigma (symplectic transform of eta), the kernel kappa(x, y) with
H f(x) = integral kappa(x, y) f(y) dy, and the impulse response
h(x, t) = kappa(x, x - t), which is the inverse transform of eta in
gamma.  The support region of eta is tracked explicitly; identification
machinery relies on its area staying below 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import numpy.typing as npt

from .grid import GridSpec, PlaneArray, SampledSignal, wrap_signed
from .serialize import grid_from_dict, grid_to_dict, mask_from_rle, mask_to_rle
from .transforms import symplectic_ft
from .windows import bump, dilate, erode

_SUPPORT_TOL = 1e-12


@dataclass(eq=False)
class SupportRegion:
    """Boolean region on the (t, gamma) plane of a grid.

    When built from rectangles the exact physical bounds are kept, which
    makes derived quantities (bounding box, node lattices) independent
    of the grid resolution.
    """

    grid: GridSpec
    mask: npt.NDArray[np.bool_]
    rects: Optional[list[tuple[float, float, float, float]]] = None

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        n = self.grid.n
        if self.mask.shape != (n, n):
            raise ValueError(f"mask must have shape ({n}, {n})")

    @classmethod
    def from_rectangles(cls, grid: GridSpec, rects) -> "SupportRegion":
        """Union of half-open rectangles [t0, t1) x [g0, g1) given as tuples."""
        t = grid.times()[:, None]
        g = grid.freqs()[None, :]
        mask = np.zeros((grid.n, grid.n), dtype=bool)
        half_t, half_nu = grid.extent / 2, 1 / (2 * grid.dt)
        for t0, t1, g0, g1 in rects:
            if not (-half_t <= t0 < t1 <= half_t and -half_nu <= g0 < g1 <= half_nu):
                raise ValueError("rectangle exceeds the ambient ranges")
            mask |= (t >= t0) & (t < t1) & (g >= g0) & (g < g1)
        return cls(grid, mask, [tuple(map(float, r)) for r in rects])

    @property
    def area(self) -> float:
        """Lebesgue measure of the region (cell-counting)."""
        return float(self.mask.sum() * self.grid.dt * self.grid.dnu)

    @property
    def bounding_box(self) -> tuple[float, float, float, float]:
        """(t_min, t_max, g_min, g_max) of the region."""
        if self.rects:
            r = np.asarray(self.rects)
            return (float(r[:, 0].min()), float(r[:, 1].max()), float(r[:, 2].min()), float(r[:, 3].max()))
        if not self.mask.any():
            raise ValueError("empty region has no bounding box")
        t = self.grid.times()
        g = self.grid.freqs()
        rows = self.mask.any(axis=1)
        cols = self.mask.any(axis=0)
        return (
            float(t[rows].min()),
            float(t[rows].max() + self.grid.dt),
            float(g[cols].min()),
            float(g[cols].max() + self.grid.dnu),
        )

    def eroded(self, margin: float) -> "SupportRegion":
        return SupportRegion(self.grid, erode(self.mask, margin, (self.grid.dt, self.grid.dnu)))

    def dilated(self, margin: float) -> "SupportRegion":
        return SupportRegion(self.grid, dilate(self.mask, margin, (self.grid.dt, self.grid.dnu)))

    def on_grid(self, grid: GridSpec) -> "SupportRegion":
        """The same physical region discretized on another grid."""
        if self.rects is None:
            raise ValueError("resampling requires a rectangle description")
        return SupportRegion.from_rectangles(grid, self.rects)

    def to_json(self) -> str:
        doc = {"grid": grid_to_dict(self.grid), "mask": mask_to_rle(self.mask)}
        if self.rects is not None:
            doc["rects"] = [list(r) for r in self.rects]
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "SupportRegion":
        doc = json.loads(text)
        rects = [tuple(r) for r in doc["rects"]] if "rects" in doc else None
        return cls(grid_from_dict(doc["grid"]), mask_from_rle(doc["mask"]), rects)


def _infer_support(grid: GridSpec, eta_values: npt.NDArray[np.complex128]) -> SupportRegion:
    peak = np.max(np.abs(eta_values))
    if peak == 0:
        return SupportRegion(grid, np.zeros((grid.n, grid.n), dtype=bool))
    return SupportRegion(grid, np.abs(eta_values) > _SUPPORT_TOL * peak)


@dataclass(eq=False)
class BandlimitedOperator:
    """Operator stored through its spreading function."""

    eta: PlaneArray
    support: SupportRegion
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.eta.axis_semantics != "time_freq":
            raise ValueError("eta must be a time_freq plane")
        n = self.grid.n
        if self.eta.values.shape != (n, n):
            raise ValueError("eta must cover the full plane")
        if self.support.grid != self.grid:
            raise ValueError("support lives on a different grid")
        off = self.eta.values[~self.support.mask]
        peak = max(float(np.max(np.abs(self.eta.values))), 1.0)
        if off.size and np.max(np.abs(off)) > _SUPPORT_TOL * peak:
            raise ValueError("eta has mass outside the declared support")

    @property
    def grid(self) -> GridSpec:
        return self.eta.grid

    @classmethod
    def from_eta(cls, eta: PlaneArray, support: Optional[SupportRegion] = None) -> "BandlimitedOperator":
        if support is None:
            support = _infer_support(eta.grid, eta.values)
        return cls(eta, support)

    @classmethod
    def from_impulse_response(
        cls, h: PlaneArray, support: Optional[SupportRegion] = None
    ) -> "BandlimitedOperator":
        if h.axis_semantics != "impulse":
            raise ValueError("expected an impulse plane")
        eta_values = h.grid.dt * np.fft.fft(h.values, axis=0).T
        eta = PlaneArray(h.grid, eta_values, "time_freq")
        op = cls.from_eta(eta, support)
        op._cache["impulse"] = h
        return op

    @classmethod
    def from_kernel(cls, kappa: PlaneArray, support: Optional[SupportRegion] = None) -> "BandlimitedOperator":
        if kappa.axis_semantics != "kernel":
            raise ValueError("expected a kernel plane")
        h = PlaneArray(kappa.grid, _shear(kappa.values), "impulse")
        op = cls.from_impulse_response(h, support)
        op._cache["kernel"] = kappa
        return op

    @classmethod
    def from_symbol(cls, sigma: PlaneArray, support: Optional[SupportRegion] = None) -> "BandlimitedOperator":
        if sigma.axis_semantics != "symbol":
            raise ValueError("expected a symbol plane")
        eta = symplectic_ft(sigma)
        op = cls.from_eta(eta, support)
        op._cache["symbol"] = sigma
        return op

    def symbol(self) -> PlaneArray:
        if "symbol" not in self._cache:
            self._cache["symbol"] = symplectic_ft(self.eta)
        return self._cache["symbol"]

    def impulse_response(self) -> PlaneArray:
        if "impulse" not in self._cache:
            h = (np.fft.ifft(self.eta.values, axis=1) / self.grid.dt).T
            self._cache["impulse"] = PlaneArray(self.grid, h, "impulse")
        return self._cache["impulse"]

    def kernel(self) -> PlaneArray:
        if "kernel" not in self._cache:
            h = self.impulse_response().values
            self._cache["kernel"] = PlaneArray(self.grid, _shear(h), "kernel")
        return self._cache["kernel"]

    def apply(self, f: SampledSignal, route: str = "spreading") -> SampledSignal:
        """Apply the operator to a signal through the chosen representation."""
        if f.grid != self.grid or f.domain != "time":
            raise ValueError("signal must be a time signal on the operator grid")
        v = f.canonical().values
        if route == "kernel":
            out = self.grid.dt * self.kernel().values @ v
        elif route == "spreading":
            h = self.impulse_response().values
            rows = np.flatnonzero(self.support.mask.any(axis=1))
            out = np.zeros(self.grid.n, dtype=np.complex128)
            for i_t in rows:
                out += h[:, i_t] * np.roll(v, i_t)
            out *= self.grid.dt
        else:
            raise ValueError(f"unknown route {route!r}")
        return SampledSignal(self.grid, out)

    def adjoint(self) -> "BandlimitedOperator":
        kappa = self.kernel().values
        return BandlimitedOperator.from_kernel(PlaneArray(self.grid, np.conj(kappa.T), "kernel"))

    def to_json(self) -> str:
        doc = {
            "grid": grid_to_dict(self.grid),
            "support": json.loads(self.support.to_json()),
            "eta": np.stack([self.eta.values.real, self.eta.values.imag], axis=-1).tolist(),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "BandlimitedOperator":
        doc = json.loads(text)
        grid = grid_from_dict(doc["grid"])
        arr = np.asarray(doc["eta"], dtype=float)
        eta = PlaneArray(grid, arr[..., 0] + 1j * arr[..., 1], "time_freq")
        support = SupportRegion.from_json(json.dumps(doc["support"]))
        return cls(eta, support)


def _shear(values: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
    """Exchange kernel and impulse layouts: out[i, j] = in[i, (i - j) mod n]."""
    n = values.shape[0]
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return values[i, (i - j) % n]


def convert(op: BandlimitedOperator, representation: str) -> PlaneArray:
    """One of the four equivalent planes of the operator."""
    if representation == "spreading":
        return op.eta
    if representation == "symbol":
        return op.symbol()
    if representation == "kernel":
        return op.kernel()
    if representation == "impulse":
        return op.impulse_response()
    raise ValueError(f"unknown representation {representation!r}")


@dataclass(eq=False)
class RandomField:
    """Seeded smooth random field, evaluable on arbitrary coordinates.

    Complex Gaussian weights sit on a node lattice anchored to multiples
    of the smoothness scales, and each node carries a separable smooth
    bump twice that wide, so the field is a fixed physical function: it
    depends only on the seed, the smoothness, and the bounding box, not
    on where it is later sampled.
    """

    nodes_t: npt.NDArray[np.float64]
    nodes_g: npt.NDArray[np.float64]
    weights: npt.NDArray[np.complex128]
    s_t: float
    s_g: float

    def profiles_t(self, t: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        """Node bump profiles along time, one row per node."""
        return bump((np.asarray(t, dtype=float)[None, :] - self.nodes_t[:, None]) / (2 * self.s_t))

    def profiles_g(self, g: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        """Node bump profiles along frequency, one row per node."""
        return bump((np.asarray(g, dtype=float)[None, :] - self.nodes_g[:, None]) / (2 * self.s_g))

    def eval(
        self, t: npt.NDArray[np.float64], g: npt.NDArray[np.float64]
    ) -> npt.NDArray[np.complex128]:
        """Field values on the product grid t x g, shape (len(t), len(g))."""
        return self.profiles_t(t).T @ self.weights @ self.profiles_g(g)


def random_field(
    seed: int, smoothness: tuple[float, float], box: tuple[float, float, float, float]
) -> RandomField:
    """Random field whose nodes pad the physical box by one scale each side."""
    s_t, s_g = smoothness
    t0, t1, g0, g1 = box
    nodes_t = np.arange(np.floor(t0 / s_t) - 1, np.ceil(t1 / s_t) + 2) * s_t
    nodes_g = np.arange(np.floor(g0 / s_g) - 1, np.ceil(g1 / s_g) + 2) * s_g
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((nodes_t.size, nodes_g.size)) + 1j * rng.standard_normal(
        (nodes_t.size, nodes_g.size)
    )
    return RandomField(nodes_t, nodes_g, z, float(s_t), float(s_g))


def random_opw(
    grid: GridSpec,
    support: SupportRegion,
    seed: int,
    smoothness: Optional[tuple[float, float]] = None,
) -> BandlimitedOperator:
    """Random operator with spreading support in the given region.

    The spreading function is a fixed smooth random field sampled on the
    grid and masked by the region, so refining the grid resamples the
    same operator.
    """
    if support.grid != grid:
        raise ValueError("support lives on a different grid")
    if support.area >= 1:
        raise ValueError("support area must stay below 1")
    if not support.mask.any():
        raise ValueError("support is empty")
    if smoothness is None:
        smoothness = (4 * grid.dt, 4 * grid.dnu)
    field_ = random_field(seed, smoothness, support.bounding_box)
    values = field_.eval(grid.times(), grid.freqs())
    values[~support.mask] = 0.0
    return BandlimitedOperator(PlaneArray(grid, values, "time_freq"), support)


def sup_norm_on(op: BandlimitedOperator, mask: Optional[npt.NDArray[np.bool_]] = None) -> float:
    """Largest symbol magnitude, optionally restricted to a symbol-plane mask."""
    sigma = np.abs(op.symbol().values)
    if mask is None:
        return float(sigma.max())
    if mask.shape != sigma.shape:
        raise ValueError("mask shape does not match the symbol plane")
    if not mask.any():
        return 0.0
    return float(sigma[mask].max())


def operator_norm_estimate(
    op: BandlimitedOperator, tol: float = 1e-6, max_iter: int = 500, seed: int = 0
) -> float:
    """Largest singular value of the operator, by power iteration on H* H.

    Iterations stop when the estimate stagnates to the relative
    tolerance.  The adjoint is applied through the conjugate transposed
    kernel, so the estimate measures the same dt-weighted norm that
    SampledSignal.norm reports.
    """
    a = op.grid.dt * op.kernel().values
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.grid.n) + 1j * rng.standard_normal(op.grid.n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = a.conj().T @ (a @ v)
        lam_new = float(np.real(np.vdot(v, w)))
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-30):
            lam = lam_new
            break
        lam = lam_new
    return float(np.sqrt(max(lam, 0.0)))
