import numpy as np
import pytest

from opsamp.grid import GridSpec, SampledSignal
from opsamp.identify import (
    IdentifierSpec,
    SamplingScheme,
    find_cover,
    full_spark_min_det,
    gabor_system_matrix,
    is_prime,
    make_weights,
    realize_identifier,
    translate_modulate,
    _pad_cells,
)
from opsamp.operators import SupportRegion
from opsamp.windows import build_mollifier


def diagonal_scheme(big_l, t_val=1.0, delta=0.0):
    return SamplingScheme(big_l, t_val, delta, tuple((j, j) for j in range(big_l)))


def test_primality_helper():
    assert [n for n in range(1, 12) if is_prime(n)] == [2, 3, 5, 7, 11]


def test_gabor_matrix_basis_weights():
    g = gabor_system_matrix(np.array([1.0, 0.0]))
    expected = np.array([[1, 1, 0, 0], [0, 0, 1, 1]], dtype=complex)
    assert np.allclose(g, expected)


def test_gabor_matrix_complex_weights():
    c = np.array([1.0, 1j])
    g = gabor_system_matrix(c)
    # Column (k, l) = (1, 0) is the plain cyclic shift of c.
    assert np.allclose(g[:, 2], np.array([1j, 1.0]))
    sub = np.column_stack([g[:, 0], g[:, 2]])
    assert np.linalg.det(sub) == pytest.approx(2.0)


def test_gabor_matrix_zero_weights_is_degenerate():
    c = np.zeros(3, dtype=complex)
    assert np.all(gabor_system_matrix(c) == 0)
    assert full_spark_min_det(c) == 0.0


def test_translate_modulate_composition():
    rng = np.random.default_rng(3)
    c = np.exp(2j * np.pi * rng.random(5))
    # T^k M^n picks up the deterministic phase when the shift wraps.
    direct = translate_modulate(c, 7, 3)
    reduced = translate_modulate(c, 2, 3)
    assert np.allclose(direct, np.exp(2j * np.pi * 3 * 5 / 5) * reduced)


def test_scheme_validation_rejects():
    with pytest.raises(ValueError):
        SamplingScheme(4, 1.0, 0.0, ((0, 0), (1, 1), (2, 2), (3, 3)))
    with pytest.raises(ValueError):
        SamplingScheme(2, 1.0, 0.0, ((0, 0),))
    with pytest.raises(ValueError):
        SamplingScheme(2, 1.0, 0.0, ((0, 0), (2, 0)))
    with pytest.raises(ValueError):
        SamplingScheme(2, -1.0, 0.0, ((0, 0), (1, 1)))
    with pytest.raises(ValueError):
        diagonal_scheme(2).with_weights(np.array([1.0, 1.0, 1.0]))


def test_singular_weights_are_rejected():
    scheme = SamplingScheme(2, 1.0, 0.0, ((0, 0), (1, 0)))
    with pytest.raises(ValueError):
        scheme.with_weights(np.array([1.0, 1.0]))


@pytest.mark.parametrize("big_l", [1, 2, 3, 5, 7])
def test_make_weights_produces_invertible_systems(big_l):
    scheme = make_weights(diagonal_scheme(big_l))
    assert scheme.c.shape == (big_l,)
    assert np.allclose(np.abs(scheme.c), 1.0)
    assert scheme.condition_number < 1e8
    assert np.max(np.abs(scheme.A @ scheme.b - np.eye(big_l))) < 1e-10


def test_cubic_phase_weights_for_large_prime():
    scheme = make_weights(diagonal_scheme(5))
    n = np.arange(5)
    assert np.allclose(scheme.c, np.exp(1j * np.pi * n**3 / 5))


def test_b_rows_are_l_periodic():
    scheme = make_weights(diagonal_scheme(3))
    for j in range(3):
        for q in range(3):
            assert scheme.b_periodic(j, q + 3) == scheme.b_periodic(j, q)
            assert scheme.b_periodic(j, q - 3) == scheme.b_periodic(j, q)


def test_cubic_phase_spot_spark():
    n = np.arange(5)
    c = np.exp(1j * np.pi * n**3 / 5)
    assert full_spark_min_det(c, sample=500) > 1e-8


def test_pad_cells_completes_distinct_residues():
    cells = _pad_cells([(0, 0), (1, 1)], 5)
    assert len(cells) == 5
    assert len({(k % 5, n % 5) for k, n in cells}) == 5
    assert cells[:2] == [(0, 0), (1, 1)]


def test_scheme_json_round_trip():
    scheme = make_weights(diagonal_scheme(3), seed=1)
    data = scheme.to_json()
    back = SamplingScheme.from_json(data)
    assert back.L == scheme.L and back.T == scheme.T
    assert back.shifts == scheme.shifts
    assert np.allclose(back.c, scheme.c)
    assert np.allclose(back.b, scheme.b)


def test_find_cover_single_cell_rectangle():
    grid = GridSpec(1 / 64, 64, 16)
    region = SupportRegion.from_rectangles(grid, [(0.0, 0.9, -0.45, 0.45)])
    scheme = find_cover(region)
    assert scheme.L == 1
    assert scheme.T == pytest.approx(1.0)
    assert scheme.shifts == ((0, 0),)
    assert scheme.delta == 0.0
    assert scheme.nu0 == 0.0 and scheme.tau0 == 0.0


def test_find_cover_two_block_region():
    grid = GridSpec(1 / 64, 64, 32, ell=2)
    region = SupportRegion.from_rectangles(
        grid, [(0.05, 0.95, 0.02, 0.31), (1.05, 1.95, -0.31, -0.02)]
    )
    scheme = find_cover(region)
    assert scheme.L == 2
    assert scheme.T == pytest.approx(1.0)
    assert scheme.omega == pytest.approx(0.5)
    assert sorted(scheme.shifts) == [(0, 0), (1, -1)]
    assert scheme.nu0 == pytest.approx(0.25)
    assert scheme.tau0 == 0.0
    assert scheme.delta >= 1 / 64


def test_find_cover_three_cell_region():
    grid = GridSpec(1 / 60, 60, 20, ell=3)
    rects = [
        (0.05, 0.95, -0.15, 0.15),
        (1.05, 1.95, -1 / 3 - 0.15, -1 / 3 + 0.15),
        (-0.95, -0.05, -0.15, 0.15),
    ]
    region = SupportRegion.from_rectangles(grid, rects)
    scheme = find_cover(region)
    assert scheme.L == 3
    assert scheme.T == pytest.approx(1.0)
    assert sorted(scheme.shifts) == [(-1, 0), (0, 0), (1, -1)]
    residues = sorted((k % 3, n % 3) for k, n in scheme.shifts)
    assert residues == [(0, 0), (1, 2), (2, 0)]
    assert scheme.delta == pytest.approx(1 / 60)


def test_find_cover_reports_diagnostics_when_infeasible():
    grid = GridSpec(1 / 32, 32, 16)
    region = SupportRegion.from_rectangles(grid, [(-1.5, 1.5, -0.13, 0.13)])
    with pytest.raises(ValueError, match="cells occupied"):
        find_cover(region, l_max=2)


def test_find_cover_requires_small_area():
    grid = GridSpec(1 / 32, 32, 8)
    region = SupportRegion.from_rectangles(grid, [(-1.0, 1.0, -0.3, 0.3)])
    with pytest.raises(ValueError, match="area"):
        find_cover(region)


GRID = GridSpec(1 / 64, 64, 16)


def test_pure_train_heights_and_spacing():
    scheme = make_weights(SamplingScheme(1, 1.0, 0.0, ((0, 0),)))
    ident = realize_identifier(scheme, GRID)
    w = ident.signal.values
    sites = np.arange(GRID.n) % 64 == 0
    assert np.allclose(w[sites], 64.0)
    assert np.all(w[~sites] == 0)
    assert ident.site_count == 16


def test_pure_train_weight_pattern_and_periodicity():
    grid = GridSpec(1 / 32, 32, 8, ell=2)
    scheme = make_weights(SamplingScheme(2, 1.0, 0.0, ((0, 0), (1, 1))), seed=0)
    ident = realize_identifier(scheme, grid)
    w = ident.signal.values
    assert w[0] == pytest.approx(scheme.c[0] * 32)
    assert w[32] == pytest.approx(scheme.c[1] * 32)
    assert np.allclose(w, np.roll(w, 2 * 32))


def test_truncated_mollified_identifier_support():
    scheme = make_weights(SamplingScheme(1, 1.0, 0.0, ((0, 0),)))
    moll = build_mollifier(GRID, delta=1 / 8, band=0.5)
    ident = realize_identifier(scheme, GRID, interval=(-4.0, 4.0), mollifier=moll)
    assert ident.site_count == 9
    t = GRID.times()
    outside = (t < -4 - 1 / 8) & (t > -8 + 1)
    assert np.all(np.abs(ident.signal.values[outside]) == 0)
    assert np.all(ident.signal.values.real >= -1e-15)
    assert ident.signal.values.real.sum() * GRID.dt == pytest.approx(9.0)


def test_empty_truncation_gives_zero_signal():
    scheme = make_weights(SamplingScheme(1, 1.0, 0.0, ((0, 0),)))
    ident = realize_identifier(scheme, GRID, interval=(0.1, 0.2))
    assert ident.site_count == 0
    assert np.all(ident.signal.values == 0)


def test_identifier_site_offset():
    grid = GridSpec(1 / 32, 32, 8)
    scheme = make_weights(SamplingScheme(1, 1.0, 0.0, ((0, 0),), tau0=0.5))
    ident = realize_identifier(scheme, grid)
    w = ident.signal.values
    assert w[(0 * 32 - 16) % grid.n] == pytest.approx(32.0)
    assert w[0] == 0


def test_realize_identifier_validation():
    scheme_no_weights = SamplingScheme(1, 1.0, 0.0, ((0, 0),))
    with pytest.raises(ValueError, match="weights"):
        realize_identifier(scheme_no_weights, GRID)
    scheme = make_weights(SamplingScheme(1, 0.7, 0.0, ((0, 0),)))
    with pytest.raises(Exception):
        realize_identifier(scheme, GRID)
    good = make_weights(SamplingScheme(1, 1.0, 0.0, ((0, 0),)))
    other = GridSpec(1 / 32, 32, 8)
    moll = build_mollifier(other, delta=1 / 8, band=0.5)
    with pytest.raises(ValueError, match="grid"):
        realize_identifier(good, GRID, mollifier=moll)
