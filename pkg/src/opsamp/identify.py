"""Identification geometry: cell covers, weight sequences, and identifiers.

A sampling scheme tiles the time-frequency plane by translates of the
cell R = [0, T) x [-Omega/2, Omega/2), T Omega = 1/L, placed at
(k_j T + tau0, n_j Omega + nu0) for j = 0..L-1.  The origin offsets
(tau0, nu0) record the coordinate translation that makes a support
region fall inside whole cells; the shifts (k_j, n_j) are integers in
the translated frame and must have distinct residues mod L.  The weight
sequence c defines the delta-train identifier sum_n c_{n mod L}
delta_{nT - tau0} and the L x L system matrix A with entries

    A[p, j] = c_{p - k_j} exp(2 pi i n_j p / L),

the mixing the train response produces in the Zak domain: row p
collects the windowed Zak values at t + pT and the column phases follow
the raw row index p.  The rows of b = A^{-1} (L-periodic in their
column index) undo that mixing.  gabor_system_matrix enumerates the
same translate-modulate orbit in its own fixed convention for spark
certificates; either convention spans the same column set up to phases.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import numpy.typing as npt

from .grid import GridSpec, SampledSignal, is_aligned, steps_of, wrap_signed
from .operators import SupportRegion
from .windows import Mollifier

CONDITION_LIMIT = 1e8


def is_prime(n: int) -> bool:
    """True for prime n."""
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n**0.5) + 1))


def translate_modulate(c: npt.NDArray[np.complex128], k: int, n: int) -> npt.NDArray[np.complex128]:
    """Cyclic shift by k and modulation by n: (T^k M^n c)_p = e^{2 pi i n(p+k)/L} c_{p+k}."""
    c = np.asarray(c, dtype=np.complex128)
    big_l = len(c)
    p = np.arange(big_l)
    return np.exp(2j * np.pi * n * (p + k) / big_l) * c[(p + k) % big_l]


def gabor_system_matrix(c: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
    """L x L^2 matrix with columns T^k M^l c, ordered (k, l) lexicographic."""
    c = np.asarray(c, dtype=np.complex128)
    big_l = len(c)
    cols = [translate_modulate(c, k, l) for k in range(big_l) for l in range(big_l)]
    return np.column_stack(cols)


def full_spark_min_det(c: npt.NDArray[np.complex128], sample: Optional[int] = None, seed: int = 0) -> float:
    """Smallest |det| over L x L submatrices of the Gabor system matrix.

    Exhaustive over all C(L^2, L) column choices by default; with sample
    given, checks that many random choices instead (for larger L).
    """
    g = gabor_system_matrix(c)
    big_l = len(c)
    if sample is None:
        combos = np.array(list(itertools.combinations(range(big_l * big_l), big_l)))
    else:
        rng = np.random.default_rng(seed)
        combos = np.array([rng.choice(big_l * big_l, size=big_l, replace=False) for _ in range(sample)])
    smallest = np.inf
    for start in range(0, len(combos), 8192):
        batch = combos[start : start + 8192]
        dets = np.linalg.det(g[:, batch].transpose(1, 0, 2))
        smallest = min(smallest, float(np.abs(dets).min()))
    return smallest


@dataclass(eq=False)
class SamplingScheme:
    """Cover geometry plus (optionally) the weight sequence and its inverse."""

    L: int
    T: float
    delta: float
    shifts: tuple[tuple[int, int], ...]
    tau0: float = 0.0
    nu0: float = 0.0
    c: Optional[npt.NDArray[np.complex128]] = None
    A: Optional[npt.NDArray[np.complex128]] = field(default=None, init=False)
    b: Optional[npt.NDArray[np.complex128]] = field(default=None, init=False)
    condition_number: Optional[float] = field(default=None, init=False)

    def __post_init__(self):
        if self.L < 1 or (self.L > 1 and not is_prime(self.L)):
            raise ValueError("L must be 1 or a prime")
        if self.T <= 0 or self.delta < 0:
            raise ValueError("T must be positive and delta nonnegative")
        self.shifts = tuple((int(k), int(n)) for k, n in self.shifts)
        if len(self.shifts) != self.L:
            raise ValueError("need exactly L translate cells")
        residues = {(k % self.L, n % self.L) for k, n in self.shifts}
        if len(residues) != self.L:
            raise ValueError("translate residues mod L must be distinct")
        if self.c is not None:
            self._attach_weights()

    def _attach_weights(self):
        self.c = np.asarray(self.c, dtype=np.complex128)
        if self.c.shape != (self.L,):
            raise ValueError("weight sequence must have length L")
        p = np.arange(self.L)
        cols = [
            self.c[(p - k) % self.L] * np.exp(2j * np.pi * n * p / self.L)
            for k, n in self.shifts
        ]
        self.A = np.column_stack(cols)
        self.condition_number = float(np.linalg.cond(self.A))
        if not np.isfinite(self.condition_number) or self.condition_number >= CONDITION_LIMIT:
            raise ValueError(f"system matrix too ill-conditioned: {self.condition_number:.3g}")
        self.b = np.linalg.inv(self.A)

    @property
    def omega(self) -> float:
        """Frequency cell height Omega = 1 / (L T)."""
        return 1.0 / (self.L * self.T)

    def with_weights(self, c: npt.NDArray[np.complex128]) -> "SamplingScheme":
        """Copy of the scheme with the weight sequence attached."""
        return replace(self, c=np.asarray(c, dtype=np.complex128))

    def b_periodic(self, j: int, q: int) -> complex:
        """Row j of the inverse matrix, L-periodic in the column index."""
        return self.b[j, q % self.L]

    def validate_grid(self, grid: GridSpec) -> None:
        """Check the scheme is realizable on the grid lattice."""
        m = steps_of(self.T, grid.dt)
        if grid.n % m:
            raise ValueError("ambient period must hold a whole number of T steps")
        sites = grid.n // m
        if sites % self.L:
            raise ValueError("site count per ambient period must be a multiple of L")
        steps_of(self.omega, grid.dnu)
        steps_of(self.tau0, grid.dt)
        steps_of(self.nu0, grid.dnu)
        if self.delta:
            steps_of(self.delta, grid.dt)
            steps_of(self.delta, grid.dnu)

    def to_json(self) -> dict:
        """JSON-ready dict of the scheme."""
        out = {
            "L": self.L,
            "T": self.T,
            "Omega": self.omega,
            "delta": self.delta,
            "shifts": [list(s) for s in self.shifts],
            "tau0": self.tau0,
            "nu0": self.nu0,
        }
        if self.c is not None:
            out["c"] = [[float(v.real), float(v.imag)] for v in self.c]
            out["condition_number"] = self.condition_number
        return out

    @staticmethod
    def from_json(data: dict) -> "SamplingScheme":
        """Rebuild a scheme from its JSON dict."""
        c = None
        if "c" in data:
            c = np.array([complex(re, im) for re, im in data["c"]])
        return SamplingScheme(
            L=int(data["L"]),
            T=float(data["T"]),
            delta=float(data["delta"]),
            shifts=tuple((int(k), int(n)) for k, n in data["shifts"]),
            tau0=float(data.get("tau0", 0.0)),
            nu0=float(data.get("nu0", 0.0)),
            c=c,
        )


def make_weights(scheme: SamplingScheme, seed: int = 0, max_draws: int = 20) -> SamplingScheme:
    """Attach a weight sequence with a well-conditioned system matrix.

    Prime L >= 5 first tries the deterministic cubic-phase sequence
    c_n = e^{pi i n^3 / L}, whose translation-modulation matrix is full
    spark at L = 5 (exhaustively checked) and at L = 7, 11 (spot
    checked); L in {2, 3} and any fallback use random unimodular draws,
    accepting the first with cond(A) below 1e8.
    """
    if scheme.L == 1:
        return scheme.with_weights(np.ones(1, dtype=np.complex128))
    if scheme.L >= 5:
        n = np.arange(scheme.L)
        try:
            return scheme.with_weights(np.exp(1j * np.pi * n**3 / scheme.L))
        except ValueError:
            pass
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(max_draws):
        c = np.exp(2j * np.pi * rng.random(scheme.L))
        try:
            out = scheme.with_weights(c)
        except ValueError:
            a = np.column_stack([translate_modulate(c, k, n) for k, n in scheme.shifts])
            best = min(best, float(np.linalg.cond(a)))
            continue
        return out
    raise ValueError(f"no acceptable weights in {max_draws} draws; best condition {best:.3g}")


def _signed_samples(region: SupportRegion):
    """Signed (time, frequency) step indices of the True mask samples."""
    grid = region.grid
    idx_t, idx_nu = np.nonzero(region.mask)
    half = grid.n // 2
    return (idx_t + half) % grid.n - half, (idx_nu + half) % grid.n - half


def _complement_distance(t, g, cells, t_val, omega, tau0, nu0, count_k, count_n):
    """Distance from each point to the complement of the selected cells.

    Cells tile the ambient torus, so neighbor lookups wrap; points whose
    own cell is unselected are at distance 0.  Points surrounded by
    selected neighbors are capped at one cell dimension, which never
    overestimates the true distance.
    """
    selected = np.zeros((count_k, count_n), dtype=bool)
    for ck, cn in cells:
        selected[ck % count_k, cn % count_n] = True

    def member(k, n):
        return selected[k % count_k, n % count_n]

    cap = min(t_val, omega)
    eps = 1e-9 * min(t_val, omega)
    best = np.full(np.shape(t), np.inf)
    rel_t = np.asarray(t, dtype=float) - tau0
    rel_g = np.asarray(g, dtype=float) - nu0 + omega / 2
    for nudge_t in (eps, -eps):
        for nudge_g in (eps, -eps):
            k = np.floor((rel_t + nudge_t) / t_val).astype(int)
            n = np.floor((rel_g + nudge_g) / omega).astype(int)
            ex_lo = np.maximum(rel_t - k * t_val, 0.0)
            ex_hi = np.maximum((k + 1) * t_val - rel_t, 0.0)
            ey_lo = np.maximum(rel_g - n * omega, 0.0)
            ey_hi = np.maximum((n + 1) * omega - rel_g, 0.0)
            d = np.full(np.shape(t), float(cap))
            for dk, dn, cand in (
                (-1, 0, ex_lo),
                (1, 0, ex_hi),
                (0, -1, ey_lo),
                (0, 1, ey_hi),
                (-1, -1, np.hypot(ex_lo, ey_lo)),
                (-1, 1, np.hypot(ex_lo, ey_hi)),
                (1, -1, np.hypot(ex_hi, ey_lo)),
                (1, 1, np.hypot(ex_hi, ey_hi)),
            ):
                open_side = ~member(k + dk, n + dn)
                d = np.where(open_side, np.minimum(d, cand), d)
            d = np.where(member(k, n), d, 0.0)
            best = np.minimum(best, d)
    return best


def _cover_margin(region: SupportRegion, cells, t_val, omega, tau0, nu0) -> float:
    """How far the region stays inside the selected cells.

    Exact when the region carries its rectangles (evaluated at closure
    corners); otherwise measured at mask samples with one grid step of
    slack removed.
    """
    grid = region.grid
    count_k = round(grid.extent / t_val)
    count_n = round((1.0 / grid.dt) / omega)
    if region.rects is not None:
        pts_t, pts_g = [], []
        for t0, t1, g0, g1 in region.rects:
            pts_t += [t0, t0, t1, t1]
            pts_g += [g0, g1, g0, g1]
        d = _complement_distance(
            np.array(pts_t), np.array(pts_g), cells, t_val, omega, tau0, nu0, count_k, count_n
        )
        return float(d.min())
    idx_t, idx_nu = np.nonzero(region.mask)
    half = grid.n // 2
    t = ((idx_t + half) % grid.n - half) * grid.dt
    g = ((idx_nu + half) % grid.n - half) * grid.dnu
    d = _complement_distance(t, g, cells, t_val, omega, tau0, nu0, count_k, count_n)
    return max(float(d.min()) - max(grid.dt, grid.dnu), 0.0)


def _pad_cells(cells: list[tuple[int, int]], big_l: int) -> list[tuple[int, int]]:
    """Extend to L cells with distinct residues, preferring small shifts."""
    used = {(k % big_l, n % big_l) for k, n in cells}
    out = list(cells)
    for n in sorted(range(-(big_l // 2), big_l - big_l // 2), key=abs):
        for k in range(big_l):
            if len(out) == big_l:
                return out
            if (k % big_l, n % big_l) not in used:
                used.add((k % big_l, n % big_l))
                out.append((k, n))
    return out


def _snap_delta(limit: float, grid: GridSpec, t_val: float, omega: float) -> float:
    """Largest padding <= limit, aligned to both steps, strictly below half cells."""
    coarse, fine = max(grid.dt, grid.dnu), min(grid.dt, grid.dnu)
    for j in range(int(np.floor(limit / coarse + 1e-9)), 0, -1):
        delta = j * coarse
        if 2 * delta >= t_val * (1 - 1e-9) or 2 * delta >= omega * (1 - 1e-9):
            continue
        if is_aligned(delta, fine):
            return delta
    return 0.0


def find_cover(region: SupportRegion, l_max: int = 7) -> SamplingScheme:
    """Search for the smallest-L cell cover of the region.

    Feasible candidates put every mask sample inside at most L cells of
    a T x Omega tiling (origin offsets of half a cell are tried on both
    axes) with distinct residues.  Among candidates with the smallest L
    the largest padding delta wins, then the largest T.  Raises with
    per-candidate diagnostics when nothing up to l_max works.
    """
    if region.area >= 1:
        raise ValueError("support region must have area < 1")
    grid = region.grid
    samp_t, samp_nu = _signed_samples(region)
    diagnostics: list[str] = []
    ls = [l for l in range(1, l_max + 1) if l == 1 or is_prime(l)]
    for big_l in ls:
        feasible = []
        if grid.n % big_l:
            diagnostics.append(f"L={big_l}: ambient sample count not divisible")
            continue
        for m in range(2, grid.n // (2 * big_l) + 1):
            if grid.n % (big_l * m):
                continue
            bins = grid.n // (big_l * m)
            if bins % 2 or bins < 2:
                continue
            for s_tau in (0, m // 2):
                for s_nu in (0, bins // 2):
                    k = (samp_t - s_tau) // m
                    n = (samp_nu - s_nu + bins // 2) // bins
                    cells = sorted(set(zip(k.tolist(), n.tolist())))
                    t_val = m * grid.dt
                    omega = 1.0 / (big_l * t_val)
                    if len(cells) > big_l:
                        diagnostics.append(f"L={big_l} T={t_val:g}: {len(cells)} cells occupied")
                        continue
                    residues = {(ck % big_l, cn % big_l) for ck, cn in cells}
                    if len(residues) != len(cells):
                        diagnostics.append(f"L={big_l} T={t_val:g}: residue clash")
                        continue
                    cells = _pad_cells(cells, big_l)
                    margin = _cover_margin(region, cells, t_val, omega, s_tau * grid.dt, s_nu * grid.dnu)
                    delta = _snap_delta(margin, grid, t_val, omega)
                    if big_l > 1 and delta <= 0:
                        diagnostics.append(f"L={big_l} T={t_val:g}: no room for window padding")
                        continue
                    feasible.append(
                        SamplingScheme(
                            big_l,
                            t_val,
                            delta,
                            tuple(cells),
                            tau0=s_tau * grid.dt,
                            nu0=s_nu * grid.dnu,
                        )
                    )
        if feasible:
            return max(feasible, key=lambda s: (s.delta, s.T))
    raise ValueError("no cover found up to L_max; " + "; ".join(diagnostics[-8:]))


@dataclass(eq=False)
class IdentifierSpec:
    """A realized identifier signal and the choices that produced it."""

    scheme: SamplingScheme
    truncation_interval: Optional[tuple[float, float]]
    mollifier: Optional[Mollifier]
    signal: SampledSignal
    site_count: int


def realize_identifier(
    scheme: SamplingScheme,
    grid: GridSpec,
    interval: Optional[tuple[float, float]] = None,
    mollifier: Optional[Mollifier] = None,
) -> IdentifierSpec:
    """Sample the (optionally truncated, mollified) weighted delta train.

    Sites sit at n T - tau0; site n carries weight c_{n mod L}.  With a
    truncation interval only sites whose wrapped position falls inside
    it survive; with a mollifier each kept impulse becomes a translated
    copy of the unit-mass bump.
    """
    scheme.validate_grid(grid)
    if scheme.c is None:
        raise ValueError("scheme has no weights; call make_weights first")
    if mollifier is not None and mollifier.phi_moll.grid != grid:
        raise ValueError("mollifier grid mismatch")
    m = steps_of(scheme.T, grid.dt)
    s_tau = steps_of(scheme.tau0, grid.dt)
    n_sites = grid.n // m
    positions = wrap_signed(np.arange(n_sites) * scheme.T - scheme.tau0, grid.extent)
    keep = np.ones(n_sites, dtype=bool)
    if interval is not None:
        lo, hi = interval
        keep = (positions >= lo - 1e-12) & (positions <= hi + 1e-12)
    weights = scheme.c[np.arange(n_sites) % scheme.L]
    values = np.zeros(grid.n, dtype=np.complex128)
    site_idx = (np.arange(n_sites) * m - s_tau) % grid.n
    if mollifier is None:
        np.add.at(values, site_idx[keep], weights[keep] / grid.dt)
    else:
        for idx, w in zip(site_idx[keep], weights[keep]):
            values += w * np.roll(mollifier.phi_moll.values, idx)
    return IdentifierSpec(scheme, interval, mollifier, SampledSignal(grid, values), int(keep.sum()))
