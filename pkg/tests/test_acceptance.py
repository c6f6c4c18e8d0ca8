"""Acceptance checks: every stated tolerance of the library in one place.

Each test pins one end-to-end guarantee (transform exactness, window
partitions, frame tightness, recovery accuracy and its refinement
behavior, spark of the weight system, localized and truncated
identification, norm equivalence) together with its wall-time budget.
"""

import math
import time

import numpy as np
import pytest

from opsamp import (
    ExperimentConfig,
    GridSpec,
    SampledSignal,
    SamplingScheme,
    SupportRegion,
    build_pou_pair,
    forward_ft,
    full_spark_min_det,
    inverse_ft,
    make_weights,
    pou_defect,
    random_opw,
    run_experiment,
    zak_inverse,
    zak_transform,
)


def _timed(budget_seconds):
    """Context manager asserting the block stays within its time budget."""

    class _Timer:
        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.start
            if exc == (None, None, None):
                assert self.elapsed < budget_seconds, f"took {self.elapsed:.1f}s"
            return False

    return _Timer()


def _run(experiment, seed=3, threads=2, **params):
    cfg = ExperimentConfig.from_dict({"experiment": experiment, "seed": seed, "params": params})
    report = run_experiment(cfg, threads=threads)
    assert report.error is None, report.error
    return report


def test_transform_round_trips_are_exact():
    grid = GridSpec(1 / 64, 64, 64)
    assert grid.n == 4096
    rng = np.random.default_rng(0)
    worst = 0.0
    with _timed(5.0):
        for _ in range(100):
            f = SampledSignal(grid, rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n))
            spectrum = forward_ft(f)
            back = inverse_ft(spectrum)
            worst = max(worst, np.max(np.abs(back.values - f.values)) / np.max(np.abs(f.values)))
            worst = max(worst, abs(spectrum.energy() - f.energy()) / f.energy())
            zak_back = zak_inverse(zak_transform(f))
            worst = max(worst, np.max(np.abs(zak_back.values - f.values)) / np.max(np.abs(f.values)))
    assert worst <= 1e-12


@pytest.mark.parametrize(
    "grid, delta",
    [(GridSpec(1 / 16, 16, 8, 1), 1 / 8), (GridSpec(1 / 16, 16, 16, 3), 1 / 16)],
    ids=["T1-Omega1", "T1-Omega1/3"],
)
def test_window_partitions_are_exact(grid, delta):
    with _timed(1.0):
        for kind in ("quadratic_pou", "linear_pou", "rect"):
            defect = pou_defect(build_pou_pair(grid, kind, delta if kind != "rect" else 0.0))
            assert defect["time"] <= 1e-12
            assert defect["freq"] <= 1e-12


def test_window_frames_are_tight_with_known_bound():
    with _timed(10.0):
        report = _run("frame-check")
    assert report.summary["max_tightness"] <= 1e-8
    for row in report.metrics:
        target = row["beta2"] / row["T"]
        assert abs(row["lower"] - target) <= 1e-8 * target
    assert report.passed


def test_spreading_and_kernel_routes_agree():
    grid = GridSpec(1 / 16, 16, 8, ell=2)
    region = SupportRegion.from_rectangles(
        grid, [(0.125, 0.875, -0.125, 0.125), (1.125, 1.875, -0.625, -0.375)]
    )
    rng = np.random.default_rng(1)
    worst = 0.0
    with _timed(30.0):
        for op_seed in range(10):
            op = random_opw(grid, region, seed=op_seed)
            for _ in range(20):
                f = SampledSignal(grid, rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n))
                a = op.apply(f, route="spreading").values
                b = op.apply(f, route="kernel").values
                worst = max(worst, np.linalg.norm(a - b) / np.linalg.norm(a))
    assert worst <= 1e-10


def test_rect_recovery_action_error_and_refinement():
    with _timed(60.0):
        report = _run("recover-rect")
    assert report.config["params"]["grid"] == [1 / 64, 64, 16, 1]
    assert report.config["params"]["region"] == [0.0, 1.0, -0.45, 0.45]
    assert report.summary["max_action_error"] <= 1e-3
    assert all(f >= 2.0 for f in report.summary["refinement_factors"])
    assert report.passed


def test_general_recovery_covers_found_and_errors_shrink():
    with _timed(180.0):
        report = _run("recover-general")
    assert {m["L"] for m in report.metrics} == {2, 3}
    assert report.summary["max_base_error"] <= 1e-2
    assert report.summary["strictly_decreasing"]
    assert report.passed


def test_symbol_from_coefficients_converges_and_is_beta_invariant():
    with _timed(180.0):
        report = _run("coeff-recover")
    errors = report.summary["errors_by_grid"]
    assert errors[0] <= 1e-2
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert report.summary["beta_doubling_gap"] <= 1e-8
    assert report.passed


def test_weight_system_has_full_spark():
    scheme = make_weights(SamplingScheme(5, 1.0, 0.0, ((0, 0), (1, 1), (2, 2), (3, 3), (4, 4))))
    assert math.comb(25, 5) == 53130
    assert np.allclose(np.abs(scheme.c), 1.0)
    with _timed(120.0):
        smallest = full_spark_min_det(scheme.c)
    assert smallest > 1e-8


def test_localized_identification_of_localized_signals():
    with _timed(180.0):
        report = _run("local-subset")
    assert report.summary["rho"] >= 0.99
    errors = report.summary["errors_by_margin"]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(errors, errors[1:]))
    assert errors[-1] <= 1e-2 * report.summary["mu"]
    assert report.passed


def test_truncated_mollified_identifier_error_decays():
    with _timed(180.0):
        report = _run("truncate-sweep")
    assert report.config["params"]["moll_delta"] == 1 / 8
    assert report.config["params"]["radii_lt"] == [2.0, 4.0, 8.0]
    errors = report.summary["errors_by_radius"]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert errors[-1] <= 1e-3
    assert report.passed


def test_identifier_family_norms_do_not_decay():
    with _timed(60.0):
        report = _run("nodecay-demo")
    assert report.summary["pure_min_over_max"] >= 0.5
    assert report.summary["beyond_ratio"] <= 1e-3
    assert report.passed


def test_operator_norms_are_equivalent_over_class():
    with _timed(120.0):
        report = _run("norm-equiv")
    assert len(report.metrics) == 50
    lo, hi = report.summary["ratio_interval"]
    assert 0 < lo <= hi
    assert hi / lo <= 100.0
    assert report.passed
