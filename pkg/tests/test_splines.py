import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from homwave.datasets import grid_1d
from homwave.lattice import build_nets, sample_random_system
from homwave.space import MetricMeasureSpace
from homwave.splines import (
    draw_seed,
    estimate_splines,
    load_splines,
    restore_splines,
    save_splines,
    support_radii,
    verify_spline_regularity,
)


@pytest.fixture(scope="module")
def grid256_splines(grid256):
    nets = build_nets(grid256, 0.25)
    return estimate_splines(grid256, nets, R=400, seed=5)


def test_single_point_spline_is_one():
    s = MetricMeasureSpace.from_coords([0.0], [1.0])
    nets = build_nets(s, 0.25, k_min=0, k_max=2)
    sp = estimate_splines(s, nets, R=3)
    assert all(np.array_equal(sp.values[k], [[1.0]]) for k in nets.levels)


def test_one_draw_gives_indicators(grid256):
    nets = build_nets(grid256, 0.25)
    sp = estimate_splines(grid256, nets, R=1, seed=2)
    system = sample_random_system(nets, draw_seed(2, 0))
    for k in nets.levels:
        assert set(np.unique(sp.values[k])) <= {0.0, 1.0}
        assert np.array_equal(sp.values[k].argmax(axis=0), nets.position(k)[system.cube_of[k]])
    assert sp.partition_error() == 0.0


def test_indicator_refinement_coefficients(grid256):
    nets = build_nets(grid256, 0.25)
    sp = estimate_splines(grid256, nets, R=1, seed=2)
    system = sample_random_system(nets, draw_seed(2, 0))
    for k in range(nets.k_min, nets.k_max):
        p = sp.p_coeffs[k]
        assert set(np.unique(p)) <= {0.0, 1.0}
        fine = nets.nets[k + 1]
        expected = system.cube_of[k][fine][None, :] == nets.nets[k][:, None]
        assert np.array_equal(p == 1.0, expected)


def test_frequencies_match_stored_draws(grid256_splines, grid256):
    nets = grid256_splines.nets
    counts = {k: np.zeros((nets.size(k), grid256.n)) for k in nets.levels}
    for r in range(400):
        system = sample_random_system(nets, draw_seed(5, r))
        for k in nets.levels:
            counts[k][nets.position(k)[system.cube_of[k]], np.arange(grid256.n)] += 1
    for k in nets.levels:
        assert np.array_equal(counts[k] / 400, grid256_splines.values[k])


def test_exact_probabilities_within_sampling_error():
    x = np.array([0.0, 0.07, 0.2, 0.33, 0.5, 0.61, 0.8, 0.93, 1.0])
    space = MetricMeasureSpace.from_coords(x, np.full(x.size, 1 / x.size))
    nets = build_nets(space, 0.4)
    exact = oracles.exact_splines(space.dist.tolist(), {k: nets.nets[k].tolist() for k in nets.levels}, 0.4)
    R = 4000
    sp = estimate_splines(space, nets, R=R, seed=1)
    for k in nets.levels:
        sigma = np.sqrt(exact[k] * (1 - exact[k]) / R)
        assert np.all(np.abs(sp.values[k] - exact[k]) <= 5 * sigma + 1e-12)


def test_partition_and_interpolation(grid256_splines):
    assert grid256_splines.partition_error() <= 1e-12
    assert grid256_splines.partition_error(nested=True) <= 1e-12
    assert grid256_splines.interpolation_error() == 0.0
    assert grid256_splines.interpolation_error(nested=True) == 0.0


def test_refinement_coefficients_bounds(grid256_splines):
    nets = grid256_splines.nets
    for k, p in grid256_splines.p_coeffs.items():
        assert p.min() >= 0.0 and p.max() <= 1.0
        persist = np.isin(nets.nets[k + 1], nets.nets[k])
        rows = nets.position(k)[nets.nets[k + 1][persist]]
        assert np.all(p[rows, np.nonzero(persist)[0]] == 1.0)


def test_refinement_residual_within_monte_carlo_bound(grid256_splines):
    bound = 2 / np.sqrt(grid256_splines.samples)
    assert max(grid256_splines.residuals.values()) <= bound


def test_nested_family_refines_exactly(grid256_splines):
    sp = grid256_splines
    for k in range(sp.nets.k_min, sp.nets.k_max):
        assert np.allclose(sp.p_coeffs[k] @ sp.nested[k + 1], sp.nested[k], atol=1e-13)


def test_support_radii_sandwich_integrals(grid256_splines, grid256):
    sp = grid256_splines
    for k in sp.levels:
        r_in, r_out = support_radii(sp, k)
        centers = sp.nets.nets[k]
        scale = sp.nets.scale(k)
        nu = sp.nu(k)
        lo = grid256.volumes(centers, r_in * scale)
        # s vanishes outside the closed ball, so pad the open-ball volume past r_out
        hi = grid256.volumes(centers, r_out * scale * (1 + 1e-9) + 1e-12)
        assert np.all(lo - 1e-12 <= nu) and np.all(nu <= hi + 1e-12)


def test_regularity_of_averaged_splines(grid256_splines):
    rep = verify_spline_regularity(grid256_splines)
    assert rep["ok"] and rep["checked_levels"]
    assert rep["eta_pooled"] > 0.3
    # per-level exponents shrink toward atomic scales but stay positive
    assert all(e["eta_est"] > 0 for e in rep["levels"] if e["k"] in rep["checked_levels"])


def test_indicator_splines_flagged_non_regular(grid256):
    nets = build_nets(grid256, 0.25)
    rep = verify_spline_regularity(estimate_splines(grid256, nets, R=1))
    fitted = [e for e in rep["levels"] if e["eta_est"] is not None]
    assert fitted
    assert all(abs(e["eta_est"]) < 1e-9 and e["regular"] is False for e in fitted)


def test_constant_regions_are_skipped(grid256_splines):
    rep = verify_spline_regularity(grid256_splines, max_pairs=500)
    for e in rep["levels"]:
        nets = grid256_splines.nets
        assert e["pairs"] < 500 * nets.size(e["k"])


def test_results_do_not_depend_on_workers(grid256):
    nets = build_nets(grid256, 0.25)
    a = estimate_splines(grid256, nets, R=40, seed=9, workers=1)
    b = estimate_splines(grid256, nets, R=40, seed=9, workers=4)
    assert all(np.array_equal(a.values[k], b.values[k]) for k in nets.levels)


def test_save_load_restore(tmp_path, grid256_splines):
    save_splines(grid256_splines, tmp_path / "s")
    header, table = load_splines(tmp_path / "s")
    assert header["samples"] == 400
    back = restore_splines(grid256_splines.nets, table, 400, header["seed"])
    for k in grid256_splines.levels:
        assert np.array_equal(back.values[k], grid256_splines.values[k])
        assert np.array_equal(back.nested[k], grid256_splines.nested[k])


def test_rejects_zero_draws():
    nets = build_nets(grid_1d(8), 0.25)
    with pytest.raises(ValueError):
        estimate_splines(nets.space, nets, R=0)


@given(st.lists(st.integers(0, 3000), min_size=2, max_size=25, unique=True), st.integers(1, 12), st.integers(0, 2**32))
def test_partition_of_unity_random_clouds(ints, R, seed):
    space = MetricMeasureSpace.from_coords(np.array(ints) / 3000.0)
    nets = build_nets(space, 0.3)
    sp = estimate_splines(space, nets, R=R, seed=seed)
    assert sp.partition_error() <= 1e-12
    assert sp.partition_error(nested=True) <= 1e-12
    assert sp.interpolation_error(nested=True) == 0.0
