"""Configuration-driven numerical experiments with machine-readable reports.

Each experiment consumes an ExperimentConfig (name, seed, parameter dict,
output directory), runs a deterministic sweep, and produces a Report with
per-trial metrics, a summary, and boolean verdicts; run() never raises on
an infeasible configuration but records a structured error instead.

Refinement studies avoid the inverse crime by fixing a continuum operator
first: a seeded low-rank random field times separable piecewise-linear
plateau windows per support rectangle.  Such spreading functions evaluate
exactly on every grid, and their operator action costs O(rank n log n)
via the factored form

    (H f)(x) = sum_c sum_{ab} W[a,b] ((u_a wt_c) * f)(x) (v_b wg_c)^(x),

so reference actions run on grids far finer than any recovery grid while
the recovered operators are compared against those references on shared
sample points.  All randomness flows from the config seed; trials within
a sweep run in parallel with one derived seed per trial, and the metric
rows are ordered by trial index so reports are byte-reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .grid import GridSpec, PlaneArray, SampledSignal, wrap_signed
from .identify import SamplingScheme, find_cover, make_weights, realize_identifier
from .operators import (
    BandlimitedOperator,
    RandomField,
    SupportRegion,
    operator_norm_estimate,
    random_field,
    random_opw,
    sup_norm_on,
)
from .recover import (
    discrete_coefficients,
    recover_kernel_general,
    recover_kernel_rect,
    symbol_from_coefficients,
)
from .transforms import symplectic_ft
from .windows import (
    GaborFrameSpec,
    build_lowpass,
    build_mollifier,
    build_pou_pair,
    bump,
    dilate,
    frame_bounds,
    localization_measure,
)

REPORT_SCHEMA = 1

EXPERIMENTS = (
    "recover-rect",
    "recover-general",
    "coeff-recover",
    "local-subset",
    "truncate-sweep",
    "nodecay-demo",
    "frame-check",
    "norm-equiv",
)


class ConfigError(ValueError):
    """Raised when an experiment configuration cannot be interpreted."""


DEFAULTS: dict[str, dict] = {
    "recover-rect": {
        "grid": [1 / 64, 64, 16, 1],
        "region": [0.0, 1.0, -0.45, 0.45],
        "ramps": [0.125, 0.0625],
        "smoothness": [0.125, 0.125],
        "band": 0.4375,
        "cutoff": 0.5625,
        "steps": 2,
        "ref_factor": 8,
        "probes": 3,
        "probe_half": 0.75,
    },
    "recover-general": {
        "covers": [
            {
                "label": "two-cell",
                "grid": [1 / 16, 16, 8, 2],
                "rects": [
                    [0.125, 0.875, -0.125, 0.125],
                    [1.125, 1.875, -0.625, -0.375],
                ],
                "ramps": [1 / 8, 1 / 16],
                "smoothness": [0.25, 0.25],
            },
            {
                "label": "three-cell",
                "grid": [1 / 16, 16, 8, 3],
                "rects": [
                    [0.25, 0.75, -1 / 24, 1 / 24],
                    [1.25, 1.75, 1 / 6 + 1 / 8, 1 / 2 - 1 / 8],
                    [2.25, 2.75, -1 / 2 + 1 / 8, -1 / 6 - 1 / 8],
                ],
                "ramps": [1 / 4, 1 / 24],
                "smoothness": [0.5, 0.05],
            },
        ],
        "steps": 3,
        "ref_factor": 8,
        "trials": 2,
        "probes": 2,
        "probe_half": 0.8,
    },
    "coeff-recover": {
        "grid": [1 / 16, 16, 8, 2],
        "rects": [
            [0.125, 0.875, -0.125, 0.125],
            [1.125, 1.875, -0.625, -0.375],
        ],
        "ramps": [1 / 16, 1 / 16],
        "smoothness": [0.35, 0.25],
        "betas": [2.0, 2.0],
        "steps": 2,
        "ref_factor": 8,
    },
    "local-subset": {
        "grid": [1 / 16, 16, 8, 2],
        "rects": [
            [0.125, 0.875, -0.125, 0.125],
            [1.125, 1.875, -0.625, -0.375],
        ],
        "scheme": {"T": 1.0, "delta": 1 / 8, "shifts": [[0, 0], [1, -1]]},
        "betas": [2.0, 2.0],
        "f_center": 0.5,
        "f_half": 0.35,
        "loc_box": [-0.4, 1.4, -3.0, 3.0],
        "gabor_half": 0.4,
        "gabor_steps": [4, 4],
        "margins": [1.0, 2.5, 4.0],
    },
    "truncate-sweep": {
        "grid": [1 / 16, 16, 24, 2],
        "rects": [
            [0.25, 0.75, -0.125, 0.125],
            [1.25, 1.75, -0.625, -0.375],
        ],
        "scheme": {"T": 1.0, "delta": 1 / 16, "shifts": [[0, 0], [1, -1]]},
        "moll_delta": 0.125,
        "moll_band": 0.5,
        "radii_lt": [2.0, 4.0, 8.0],
        "f_center": 0.5,
        "f_half": 4.0,
    },
    "nodecay-demo": {
        "grid": [1 / 16, 16, 40, 1],
        "delta": 0.125,
        "phi_half": 1.0,
        "n_max": 18,
        "radius": 10.0,
        "beyond_pad": 3.0,
    },
    "frame-check": {
        "cases": [
            {"grid": [1 / 16, 16, 40, 1], "delta": 0.125},
            {"grid": [1 / 16, 16, 48, 3], "delta": 0.0625},
        ]
    },
    "norm-equiv": {
        "grid": [1 / 16, 16, 8, 2],
        "rects": [
            [0.125, 0.875, -0.125, 0.125],
            [1.125, 1.875, -0.625, -0.375],
        ],
        "ops": 50,
        "ratio_limit": 100.0,
    },
}


@dataclass
class ExperimentConfig:
    """One experiment request: name, master seed, parameters, output dir."""

    experiment: str
    seed: int
    params: dict
    outdir: str = "opsamp_out"

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        name = doc.get("experiment")
        if name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {name!r}; choose one of {', '.join(EXPERIMENTS)}")
        if not isinstance(doc.get("seed"), int):
            raise ConfigError("config requires an integer seed")
        params = dict(DEFAULTS[name])
        overrides = doc.get("params", {})
        if not isinstance(overrides, dict):
            raise ConfigError("params must be an object")
        unknown = set(overrides) - set(params)
        if unknown:
            raise ConfigError(f"unknown params for {name}: {', '.join(sorted(unknown))}")
        params.update(overrides)
        extra = set(doc) - {"experiment", "seed", "params", "outdir"}
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        return cls(name, doc["seed"], params, doc.get("outdir", "opsamp_out"))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def echo(self) -> dict:
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "params": self.params,
            "outdir": self.outdir,
        }


@dataclass
class Report:
    """Self-describing experiment outcome."""

    config: dict
    metrics: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    error: Optional[dict] = None
    elapsed_seconds: float = 0.0
    version: str = ""
    schema: int = REPORT_SCHEMA
    plots: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.verdicts) and all(self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "version": self.version,
            "config": self.config,
            "metrics": self.metrics,
            "summary": self.summary,
            "verdicts": self.verdicts,
            "passed": self.passed,
            "error": self.error,
            "elapsed_seconds": self.elapsed_seconds,
        }


def version_hash() -> str:
    """Package version tag: digest over the installed module sources."""
    root = Path(__file__).resolve().parent
    digest = hashlib.sha256()
    for path in sorted(root.glob("*.py")):
        digest.update(path.name.encode())
        digest.update(path.read_bytes())
    return f"{__package__}-{digest.hexdigest()[:12]}"


def _parallel(fn: Callable, items: list, threads: int) -> list:
    """Map preserving order; threads only change wall time, not results."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _grid_from(params_grid) -> GridSpec:
    dt, n_per_t, periods, ell = params_grid
    return GridSpec(float(dt), int(n_per_t), int(periods), int(ell))


def _trapezoid(x, lo: float, hi: float, ramp: float):
    """Piecewise-linear plateau: 0 at lo and hi, 1 on [lo+ramp, hi-ramp].

    The derivative kinks give action quadratures a clean second order,
    so halving the grid step reduces the error by a factor near four.
    """
    up = np.clip((np.asarray(x, dtype=float) - lo) / ramp, 0.0, 1.0)
    down = np.clip((hi - np.asarray(x, dtype=float)) / ramp, 0.0, 1.0)
    return np.minimum(up, down)


def _components(grid: GridSpec, rects, ramps, profile_t: str = "linear"):
    """Separable windows per rectangle, sampled on the grid.

    profile_t "linear" ramps the time window piecewise linearly; "bump"
    uses a smooth bump over the whole time extent, whose fast symbol
    decay keeps sup-norm symbol comparisons clear of aliasing at the
    edge of the frequency range.
    """
    t, nu = grid.times(), grid.freqs()
    ramp_t, ramp_g = ramps
    out = []
    for t0, t1, g0, g1 in rects:
        if profile_t == "bump":
            wt = bump((t - 0.5 * (t0 + t1)) / (0.5 * (t1 - t0)))
        else:
            wt = _trapezoid(t, t0, t1, ramp_t)
        out.append((wt, _trapezoid(nu, g0, g1, ramp_g)))
    return out


def _rank_action(field_: RandomField, comps, grid: GridSpec, f_values):
    """Operator action in factored form, never building an n x n plane."""
    fhat = np.fft.fft(np.asarray(f_values, dtype=np.complex128))
    t, nu = grid.times(), grid.freqs()
    out = np.zeros(grid.n, dtype=np.complex128)
    for wt, wg in comps:
        pt = field_.profiles_t(t) * wt[None, :]
        pg = field_.profiles_g(nu) * wg[None, :]
        conv = np.fft.ifft(np.fft.fft(pt, axis=1) * fhat[None, :], axis=1) * grid.dt
        vhat = np.fft.ifft(pg, axis=1) / grid.dt
        out += np.einsum("ab,an,bn->n", field_.weights, conv, vhat)
    return out


def _rank_plane(field_: RandomField, comps, grid: GridSpec):
    """Spreading function of the windowed field rasterized on the grid."""
    t, nu = grid.times(), grid.freqs()
    eta = np.zeros((grid.n, grid.n), dtype=np.complex128)
    for wt, wg in comps:
        eta += (field_.profiles_t(t) * wt[None, :]).T @ field_.weights @ (
            field_.profiles_g(nu) * wg[None, :]
        )
    return eta


def _apply_impulse(h_values, f_values, dt: float):
    """Action of an impulse-response plane h(x, t) on sample values of f."""
    conv = np.fft.ifft(np.fft.fft(h_values, axis=1) * np.fft.fft(f_values)[None, :], axis=1)
    idx = np.arange(len(f_values))
    return dt * conv[idx, idx]


def _probe(grid: GridSpec, center: float, half: float) -> SampledSignal:
    """Smooth compactly supported test signal, the same on every grid."""
    vals = bump(wrap_signed(grid.times() - center, grid.extent) / half)
    return SampledSignal(grid, vals + 0j)


def _pure_train(grid: GridSpec, t_steps: int):
    values = np.zeros(grid.n, dtype=np.complex128)
    values[::t_steps] = 1.0 / grid.dt
    return values


def _freq_subsample_index(n_coarse: int, n_ref: int):
    k = np.arange(n_coarse)
    return np.where(k < n_coarse // 2, k, k + (n_ref - n_coarse))


def _rel_l2(got, want) -> float:
    return float(np.linalg.norm(got - want) / np.linalg.norm(want))


def _monotone_decreasing(values, strict: bool) -> bool:
    pairs = zip(values, values[1:])
    if strict:
        return all(b < a for a, b in pairs)
    return all(b <= a * (1 + 1e-9) for a, b in pairs)


def _run_recover_rect(params: dict, seed: int, threads: int):
    base = _grid_from(params["grid"])
    t0, t1, g0, g1 = params["region"]
    field_ = random_field(seed, tuple(params["smoothness"]), tuple(params["region"]))
    rng = np.random.default_rng(seed + 1)
    centers = rng.uniform(0.25 * base.extent, 0.75 * base.extent, int(params["probes"]))
    ref = base.refine(2 ** (int(params["steps"]) - 1) * int(params["ref_factor"]))
    ref_comps = _components(ref, [params["region"]], params["ramps"])

    def trial(step: int):
        grid = base.refine(2**step)
        comps = _components(grid, [params["region"]], params["ramps"])
        train = _pure_train(grid, grid.n_per_T)
        response = SampledSignal(grid, _rank_action(field_, comps, grid, train))
        phi = SampledSignal(grid, base.T * build_lowpass(grid, params["band"], params["cutoff"]).values)
        h = recover_kernel_rect(response, base.T, phi)
        ratio = ref.n // grid.n
        errs = []
        for center in centers:
            got = _apply_impulse(h.values, _probe(grid, center, params["probe_half"]).values, grid.dt)
            want = _rank_action(field_, ref_comps, ref, _probe(ref, center, params["probe_half"]).values)
            errs.append(_rel_l2(got, want[::ratio]))
        return grid.dt, errs

    results = _parallel(trial, list(range(int(params["steps"]))), threads)
    metrics = [
        {"dt": dt, "probe": p, "action_error": e}
        for dt, errs in results
        for p, e in enumerate(errs)
    ]
    per_grid = [max(errs) for _, errs in results]
    factors = [a / b for a, b in zip(per_grid, per_grid[1:])]
    summary = {
        "max_action_error": max(per_grid),
        "errors_by_grid": per_grid,
        "refinement_factors": factors,
    }
    verdicts = {
        "base_action_error_le_1e-3": per_grid[0] <= 1e-3,
        "halving_reduces_ge_2x": all(f >= 2.0 for f in factors),
    }
    plots = {
        "error_vs_dt": {"dt": [dt for dt, _ in results], "action_error": per_grid},
    }
    return metrics, summary, verdicts, plots


def _run_recover_general(params: dict, seed: int, threads: int):
    metrics, plots = [], {}
    base_errors, all_monotone = [], True
    for c_idx, cover_params in enumerate(params["covers"]):
        base = _grid_from(cover_params["grid"])
        rects = [tuple(r) for r in cover_params["rects"]]
        region = SupportRegion.from_rectangles(base, rects)
        scheme = make_weights(find_cover(region), seed=seed)
        ref = base.refine(2 ** (int(params["steps"]) - 1) * int(params["ref_factor"]))
        ref_comps = _components(ref, rects, cover_params["ramps"])
        rng = np.random.default_rng(seed + 100 + c_idx)
        centers = rng.uniform(0.2 * base.extent, 0.8 * base.extent, int(params["probes"]))
        box = region.bounding_box

        def trial(args):
            trial_idx, step = args
            field_ = random_field(seed + 10 * c_idx + trial_idx, tuple(cover_params["smoothness"]), box)
            grid = base.refine(2**step)
            comps = _components(grid, rects, cover_params["ramps"])
            train = realize_identifier(scheme, grid).signal
            response = SampledSignal(grid, _rank_action(field_, comps, grid, train.values))
            pair = build_pou_pair(grid, "linear_pou", scheme.delta)
            h = recover_kernel_general(response, scheme, pair)
            ratio = ref.n // grid.n
            errs = []
            for center in centers:
                got = _apply_impulse(h.values, _probe(grid, center, params["probe_half"]).values, grid.dt)
                want = _rank_action(field_, ref_comps, ref, _probe(ref, center, params["probe_half"]).values)
                errs.append(_rel_l2(got, want[::ratio]))
            return max(errs)

        jobs = [(t, s) for t in range(int(params["trials"])) for s in range(int(params["steps"]))]
        errors = _parallel(trial, jobs, threads)
        n_steps = int(params["steps"])
        for t in range(int(params["trials"])):
            chain = errors[t * n_steps : (t + 1) * n_steps]
            base_errors.append(chain[0])
            all_monotone = all_monotone and _monotone_decreasing(chain, strict=True)
            for s, err in enumerate(chain):
                metrics.append(
                    {
                        "cover": cover_params["label"],
                        "L": scheme.L,
                        "trial": t,
                        "dt": base.dt / 2**s,
                        "action_error": err,
                    }
                )
        plots[f"error_vs_dt_{cover_params['label']}"] = {
            "dt": [base.dt / 2**s for s in range(n_steps)],
            **{
                f"trial{t}": errors[t * n_steps : (t + 1) * n_steps]
                for t in range(int(params["trials"]))
            },
        }
    summary = {"max_base_error": max(base_errors), "strictly_decreasing": all_monotone}
    verdicts = {
        "base_action_error_le_1e-2": max(base_errors) <= 1e-2,
        "error_strictly_decreasing": all_monotone,
    }
    return metrics, summary, verdicts, plots


def _run_coeff_recover(params: dict, seed: int, threads: int):
    base = _grid_from(params["grid"])
    rects = [tuple(r) for r in params["rects"]]
    region = SupportRegion.from_rectangles(base, rects)
    scheme = make_weights(find_cover(region), seed=seed)
    field_ = random_field(seed, tuple(params["smoothness"]), region.bounding_box)
    beta1, beta2 = params["betas"]
    ref = base.refine(2 ** (int(params["steps"]) - 1) * int(params["ref_factor"]))
    eta_ref = PlaneArray(
        ref, _rank_plane(field_, _components(ref, rects, params["ramps"], "bump"), ref), "time_freq"
    )
    sigma_ref = symplectic_ft(eta_ref).values

    def rebuilt(args):
        step, b1, b2 = args
        grid = base.refine(2**step)
        comps = _components(grid, rects, params["ramps"], "bump")
        train = realize_identifier(scheme, grid).signal
        response = SampledSignal(grid, _rank_action(field_, comps, grid, train.values))
        pair = build_pou_pair(grid, "quadratic_pou", scheme.delta)
        table = discrete_coefficients(response, scheme, pair, b1, b2)
        return symbol_from_coefficients(table).values

    chain = _parallel(rebuilt, [(s, beta1, beta2) for s in range(int(params["steps"]))], threads)
    sup_ref = np.max(np.abs(sigma_ref))
    errors = []
    for step, sigma in enumerate(chain):
        grid_n = base.n * 2**step
        rows = np.arange(grid_n) * (ref.n // grid_n)
        cols = _freq_subsample_index(grid_n, ref.n)
        errors.append(float(np.max(np.abs(sigma - sigma_ref[np.ix_(rows, cols)])) / sup_ref))
    doubled = rebuilt((0, 2 * beta1, 2 * beta2))
    beta_gap = float(np.max(np.abs(chain[0] - doubled)) / np.max(np.abs(chain[0])))
    metrics = [
        {"dt": base.dt / 2**s, "symbol_error": e} for s, e in enumerate(errors)
    ] + [{"dt": base.dt, "beta_doubling_gap": beta_gap}]
    summary = {
        "base_symbol_error": errors[0],
        "errors_by_grid": errors,
        "beta_doubling_gap": beta_gap,
    }
    verdicts = {
        "base_symbol_error_le_1e-2": errors[0] <= 1e-2,
        "error_decreasing": _monotone_decreasing(errors, strict=True),
        "beta_doubling_le_1e-8": beta_gap <= 1e-8,
    }
    plots = {
        "symbol_error_vs_dt": {
            "dt": [base.dt / 2**s for s in range(len(errors))],
            "symbol_error": errors,
        }
    }
    return metrics, summary, verdicts, plots


def _box_mask(grid: GridSpec, box, x_coords, xi_coords):
    x0, x1, xi0, xi1 = box
    return ((x_coords >= x0) & (x_coords <= x1))[:, None] & (
        (xi_coords >= xi0) & (xi_coords <= xi1)
    )[None, :]


def _run_local_subset(params: dict, seed: int, threads: int):
    grid = _grid_from(params["grid"])
    region = SupportRegion.from_rectangles(grid, [tuple(r) for r in params["rects"]])
    sch = params["scheme"]
    scheme = make_weights(
        SamplingScheme(len(sch["shifts"]), sch["T"], sch["delta"], tuple(map(tuple, sch["shifts"]))),
        seed=seed,
    )
    op = random_opw(grid, region, seed=seed)
    mu = sup_norm_on(op)
    pair = build_pou_pair(grid, "quadratic_pou", scheme.delta)
    response = op.apply(realize_identifier(scheme, grid).signal, route="spreading")
    table = discrete_coefficients(response, scheme, pair, *params["betas"])
    f = _probe(grid, params["f_center"], params["f_half"])
    window = SampledSignal(grid, bump(wrap_signed(grid.times(), grid.extent) / params["gabor_half"]) + 0j)
    sa, sb = params["gabor_steps"]
    frame = GaborFrameSpec(window, sa * grid.dt, sb * grid.dnu)
    lattice_mask = _box_mask(
        grid,
        params["loc_box"],
        wrap_signed(np.arange(grid.n // sa) * sa * grid.dt, grid.extent),
        wrap_signed(np.arange(grid.n // sb) * sb * grid.dnu, 1.0 / grid.dt),
    )
    rho = localization_measure(f, frame, lattice_mask)
    s_mask = _box_mask(grid, params["loc_box"], grid.times(), grid.freqs())
    h_true = op.apply(f, route="spreading")

    def trial(margin: float):
        kept = dilate(s_mask, margin, (grid.dt, grid.dnu))
        h_tilde = BandlimitedOperator.from_symbol(symbol_from_coefficients(table, kept))
        return float((h_true - h_tilde.apply(f, route="spreading")).norm() / f.norm())

    errors = _parallel(trial, [float(m) for m in params["margins"]], threads)
    metrics = [
        {"margin": m, "action_error": e, "rho": rho}
        for m, e in zip(params["margins"], errors)
    ]
    summary = {"rho": rho, "errors_by_margin": errors, "mu": mu}
    verdicts = {
        "localization_ge_0.99": rho >= 0.99,
        "error_nonincreasing_in_margin": _monotone_decreasing(errors, strict=False),
        "largest_margin_error_le_1e-2_mu": errors[-1] <= 1e-2 * mu,
    }
    plots = {"error_vs_margin": {"margin": list(params["margins"]), "action_error": errors}}
    return metrics, summary, verdicts, plots


def _run_truncate_sweep(params: dict, seed: int, threads: int):
    grid = _grid_from(params["grid"])
    region = SupportRegion.from_rectangles(grid, [tuple(r) for r in params["rects"]])
    sch = params["scheme"]
    scheme = make_weights(
        SamplingScheme(len(sch["shifts"]), sch["T"], sch["delta"], tuple(map(tuple, sch["shifts"]))),
        seed=seed,
    )
    op = random_opw(grid, region, seed=seed)
    mu = sup_norm_on(op)
    moll = build_mollifier(grid, params["moll_delta"], params["moll_band"])
    pair = build_pou_pair(grid, "linear_pou", scheme.delta)
    f = _probe(grid, params["f_center"], params["f_half"])
    want = op.apply(f, route="spreading")
    lt = scheme.L * scheme.T

    def trial(radius_lt: float):
        radius = radius_lt * lt
        ident = realize_identifier(scheme, grid, interval=(-radius, radius), mollifier=moll)
        h = recover_kernel_general(op.apply(ident.signal, route="spreading"), scheme, pair)
        got = SampledSignal(grid, _apply_impulse(h.values, f.values, grid.dt))
        return float((want - got).norm() / (mu * f.norm())), ident.site_count

    results = _parallel(trial, [float(r) for r in params["radii_lt"]], threads)
    errors = [e for e, _ in results]
    metrics = [
        {"radius_lt": r, "sites_kept": s, "scaled_action_error": e}
        for r, (e, s) in zip(params["radii_lt"], results)
    ]
    summary = {"errors_by_radius": errors, "mu": mu, "moll_flatness": moll.flatness_eps}
    verdicts = {
        "error_decreasing_in_radius": _monotone_decreasing(errors, strict=True),
        "largest_radius_error_le_1e-3": errors[-1] <= 1e-3,
    }
    plots = {
        "error_vs_radius": {"radius_lt": list(params["radii_lt"]), "scaled_action_error": errors}
    }
    return metrics, summary, verdicts, plots


def _run_nodecay_demo(params: dict, seed: int, threads: int):
    grid = _grid_from(params["grid"])
    pair = build_pou_pair(grid, "linear_pou", params["delta"])
    scheme = make_weights(SamplingScheme(1, grid.T, 0.0, ((0, 0),)), seed=seed)
    t = grid.times()
    shifts = np.arange(-int(params["n_max"]), int(params["n_max"]) + 1)
    atoms = bump(wrap_signed(t[None, :] - shifts[:, None] * grid.T, grid.extent) / params["phi_half"])

    def family_norms(train_values):
        envelope = grid.dt * np.fft.ifft(np.fft.fft(pair.r.values) * np.fft.fft(train_values))
        return np.sqrt(grid.dt) * np.linalg.norm(atoms * envelope[None, :], axis=1)

    pure = family_norms(realize_identifier(scheme, grid).signal.values)
    radius = float(params["radius"])
    truncated = family_norms(
        realize_identifier(scheme, grid, interval=(-radius, radius)).signal.values
    )
    beyond = np.abs(shifts) * grid.T >= radius + params["beyond_pad"]
    pure_ratio = float(pure.min() / pure.max())
    beyond_ratio = float(truncated[beyond].max() / truncated.max())
    metrics = [
        {"n": int(n), "norm_pure": float(p), "norm_truncated": float(q)}
        for n, p, q in zip(shifts, pure, truncated)
    ]
    summary = {"pure_min_over_max": pure_ratio, "beyond_ratio": beyond_ratio}
    verdicts = {
        "pure_min_over_max_ge_0.5": pure_ratio >= 0.5,
        "beyond_radius_le_1e-3": beyond_ratio <= 1e-3,
    }
    plots = {
        "family_norms": {
            "n": shifts.tolist(),
            "norm_pure": pure.tolist(),
            "norm_truncated": truncated.tolist(),
        }
    }
    return metrics, summary, verdicts, plots


def _run_frame_check(params: dict, seed: int, threads: int):
    metrics = []
    tight_ok, bound_ok = True, True
    for case in params["cases"]:
        grid = _grid_from(case["grid"])
        delta = case["delta"]
        beta2 = 1 + 2 * delta / grid.T
        pair = build_pou_pair(grid, "quadratic_pou", delta)
        b_lat = grid.ell * grid.omega / beta2
        lower, upper = frame_bounds(GaborFrameSpec(pair.r, grid.T, b_lat), seed=seed)
        tightness = upper / lower - 1
        target = beta2 * grid.T
        deviation = abs(lower - target) / target
        tight_ok = tight_ok and tightness <= 1e-8
        bound_ok = bound_ok and deviation <= 1e-8
        metrics.append(
            {
                "T": grid.T,
                "omega": grid.omega,
                "delta": delta,
                "beta2": beta2,
                "lower": float(lower),
                "upper": float(upper),
                "tightness": float(tightness),
                "bound_deviation": float(deviation),
            }
        )
    summary = {
        "max_tightness": max(m["tightness"] for m in metrics),
        "max_bound_deviation": max(m["bound_deviation"] for m in metrics),
    }
    verdicts = {"frames_tight_le_1e-8": tight_ok, "lower_bound_matches_beta2_T": bound_ok}
    plots = {
        "frame_bounds": {
            "case": list(range(len(metrics))),
            "lower": [m["lower"] for m in metrics],
            "upper": [m["upper"] for m in metrics],
        }
    }
    return metrics, summary, verdicts, plots


def _run_norm_equiv(params: dict, seed: int, threads: int):
    grid = _grid_from(params["grid"])
    region = SupportRegion.from_rectangles(grid, [tuple(r) for r in params["rects"]])

    def trial(k: int):
        op = random_opw(grid, region, seed=seed + k)
        return float(operator_norm_estimate(op, seed=seed + k) / sup_norm_on(op))

    ratios = _parallel(trial, list(range(int(params["ops"]))), threads)
    spread = max(ratios) / min(ratios)
    metrics = [{"op": k, "norm_ratio": r} for k, r in enumerate(ratios)]
    summary = {
        "ratio_interval": [min(ratios), max(ratios)],
        "interval_spread": spread,
    }
    verdicts = {"ratio_spread_le_limit": spread <= float(params["ratio_limit"])}
    plots = {"norm_ratios": {"op": list(range(len(ratios))), "norm_ratio": ratios}}
    return metrics, summary, verdicts, plots


_RUNNERS = {
    "recover-rect": _run_recover_rect,
    "recover-general": _run_recover_general,
    "coeff-recover": _run_coeff_recover,
    "local-subset": _run_local_subset,
    "truncate-sweep": _run_truncate_sweep,
    "nodecay-demo": _run_nodecay_demo,
    "frame-check": _run_frame_check,
    "norm-equiv": _run_norm_equiv,
}


def run(config: ExperimentConfig, threads: int = 1) -> Report:
    """Execute the configured experiment; infeasibility lands in .error."""
    start = time.perf_counter()
    report = Report(config=config.echo(), version=version_hash())
    try:
        metrics, summary, verdicts, plots = _RUNNERS[config.experiment](
            config.params, config.seed, threads
        )
        report.metrics, report.summary = metrics, summary
        report.verdicts, report.plots = verdicts, plots
    except (ValueError, ArithmeticError) as exc:
        report.error = {"type": type(exc).__name__, "message": str(exc)}
    report.elapsed_seconds = time.perf_counter() - start
    return report


def _csv_bytes(columns: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(columns.keys())
    for row in zip(*columns.values()):
        writer.writerow([v if isinstance(v, (int, str)) else repr(float(v)) for v in row])
    return buf.getvalue()


def write_report(report: Report, outdir: str) -> list[str]:
    """Write report.json, metrics.csv, and one CSV per plot; returns paths."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "report.json"]
    paths[0].write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    if report.metrics:
        keys = list(report.metrics[0].keys())
        columns = {k: [row.get(k, "") for row in report.metrics] for k in keys}
        path = out / "metrics.csv"
        path.write_text(_csv_bytes(columns))
        paths.append(path)
    for name, columns in report.plots.items():
        path = out / f"plot_{name}.csv"
        path.write_text(_csv_bytes(columns))
        paths.append(path)
    return [str(p) for p in paths]
