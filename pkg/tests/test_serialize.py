import numpy as np
import pytest

from opsamp import GridSpec, PlaneArray, SampledSignal
from opsamp.serialize import (
    mask_from_rle,
    mask_to_rle,
    plane_from_csv,
    plane_from_json,
    plane_to_csv,
    plane_to_json,
    signal_from_csv,
    signal_from_json,
    signal_to_csv,
    signal_to_json,
)


def sample_signal():
    grid = GridSpec(dt=1 / 8, n_per_T=8, periods=2, ell=1)
    rng = np.random.default_rng(5)
    v = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
    return SampledSignal(grid, v, origin_index=3, domain="time")


def test_signal_json_round_trip():
    s = sample_signal()
    back = signal_from_json(signal_to_json(s))
    assert back.grid == s.grid
    assert back.origin_index == s.origin_index
    assert back.domain == s.domain
    assert np.array_equal(back.values, s.values)


def test_signal_csv_round_trip_is_exact():
    s = sample_signal()
    text = signal_to_csv(s)
    back = signal_from_csv(text)
    assert back.grid == s.grid
    assert np.array_equal(back.values, s.values)


def test_serialization_is_deterministic():
    s = sample_signal()
    assert signal_to_json(s) == signal_to_json(s)
    assert signal_to_csv(s) == signal_to_csv(s)


def test_plane_round_trips():
    grid = GridSpec(dt=1 / 4, n_per_T=4, periods=2)
    rng = np.random.default_rng(9)
    values = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    p = PlaneArray(grid, values, "symbol")
    for back in (plane_from_json(plane_to_json(p)), plane_from_csv(plane_to_csv(p))):
        assert back.grid == p.grid
        assert back.axis_semantics == "symbol"
        assert np.array_equal(back.values, p.values)


def test_plane_json_rejects_mismatched_shape():
    grid = GridSpec(dt=1 / 4, n_per_T=4, periods=2)
    p = PlaneArray(grid, np.zeros((grid.n, grid.n)), "symbol")
    doc = plane_to_json(p).replace('"shape": [8, 8]', '"shape": [4, 16]')
    with pytest.raises(ValueError):
        plane_from_json(doc)


@pytest.mark.parametrize(
    "mask",
    [
        np.zeros((4, 5), dtype=bool),
        np.ones((4, 5), dtype=bool),
        np.array([[True, False, False], [True, True, False]]),
        np.array([[False]]),
    ],
)
def test_mask_rle_round_trip(mask):
    doc = mask_to_rle(mask)
    back = mask_from_rle(doc)
    assert np.array_equal(back, mask)
    assert sum(doc["runs"]) == mask.size


def test_mask_rle_rejects_truncated_runs():
    with pytest.raises(ValueError):
        mask_from_rle({"shape": [2, 2], "runs": [3]})
