import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from homwave.datasets import grid_1d
from homwave.lattice import build_nets, sample_random_system
from homwave.space import MetricMeasureSpace
from homwave.splines import draw_seed, estimate_splines
from homwave.wavelets import (
    CoefficientField,
    GramError,
    analyze,
    build_wavelets,
    gram,
    inv_sqrt,
    load_basis,
    neumann_coefficients,
    riesz_check,
    save_basis,
    synthesize,
    verify_decay,
    verify_lower_bound,
)

# -- Gram matrices -----------------------------------------------------------


def test_indicator_gram_is_diagonal_cube_ratio(grid256):
    nets = build_nets(grid256, 0.25)
    sp = estimate_splines(grid256, nets, R=1, seed=4)
    system = sample_random_system(nets, draw_seed(4, 0))
    for k in nets.levels:
        g = gram(sp, k)
        expected = system.cube_masses(k) / sp.mu[k]
        assert np.allclose(np.diag(g.M), expected, rtol=1e-12)
        assert np.allclose(g.M - np.diag(np.diag(g.M)), 0.0)


def test_single_net_point_gram():
    space = grid_1d(16)
    nets = build_nets(space, 0.25)
    g = gram(estimate_splines(space, nets, R=8), nets.k_min)
    assert g.M.shape == (1, 1) and g.M[0, 0] > 0


def test_projected_gram_spectrum_positive(small_pipeline):
    _, nets, _, splines, _ = small_pipeline
    for k in range(nets.k_min, nets.k_max):
        g = gram(splines, k)
        if g.Mtilde is None or g.Mtilde.size == 0:
            continue
        ev = np.linalg.eigvalsh(g.Mtilde)
        assert ev.min() > 0 and ev.max() <= np.linalg.norm(g.Mtilde, 2) * (1 + 1e-12)


# -- inverse square roots ------------------------------------------------------


@pytest.mark.parametrize("method", ["eig", "neumann"])
def test_inv_sqrt_identity(method):
    assert np.allclose(inv_sqrt(np.eye(5), method), np.eye(5), atol=1e-10)


@pytest.mark.parametrize("method", ["eig", "neumann"])
def test_inv_sqrt_diagonal(method):
    assert np.allclose(inv_sqrt(np.diag([4.0, 1.0]), method), np.diag([0.5, 1.0]), atol=1e-10)


def test_inv_sqrt_random_pd_cross_methods():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((8, 8))
    m = a @ a.T + 0.5 * np.eye(8)
    eig = inv_sqrt(m, "eig")
    neu = inv_sqrt(m, "neumann")
    ref = oracles.inv_sqrt_scipy(m)
    assert np.abs(eig - neu).max() <= 1e-7
    assert np.abs(eig - ref).max() <= 1e-8


@given(st.integers(1, 12), st.integers(0, 10**6), st.floats(0.05, 2.0))
def test_inv_sqrt_property(n, seed, shift):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    m = a @ a.T / n + shift * np.eye(n)
    s = inv_sqrt(m, "eig")
    assert np.allclose(s @ m @ s, np.eye(n), atol=1e-9)
    assert np.abs(s - inv_sqrt(m, "neumann")).max() <= 1e-7


def test_inv_sqrt_rejects_bad_input():
    with pytest.raises(GramError):
        inv_sqrt(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(GramError):
        inv_sqrt(np.diag([1.0, -1.0]))
    with pytest.raises(GramError):
        inv_sqrt(np.diag([1.0, -1.0]), "neumann")
    with pytest.raises(ValueError):
        inv_sqrt(np.eye(2), "schur")


def test_neumann_coefficients_exact():
    got = neumann_coefficients(65)
    exact = np.array([float(oracles.neumann_coefficient(j)) for j in range(65)])
    assert np.abs(got - exact).max() <= 1e-12
    assert np.all(got > 0) and np.all(got <= 1)


def test_neumann_reports_terms():
    _, info = inv_sqrt(np.diag([3.0, 1.0, 2.0]), "neumann", return_info=True)
    assert info["terms"] >= 1 and info["residual"] <= 1e-9


# -- basis exactness -----------------------------------------------------------


def test_orthonormal_complete_basis(grid_artifacts):
    basis = grid_artifacts.basis
    assert basis.orthonormality_error() <= 1e-8
    assert basis.cancellation_errors().max() <= 1e-8
    assert basis.cross_level_error(grid_artifacts.splines) <= 1e-8


def test_dimension_bookkeeping(grid_artifacts):
    basis, nets = grid_artifacts.basis, grid_artifacts.nets
    assert basis.count + basis.coarse.shape[0] == grid_artifacts.space.n
    for k in range(nets.k_min, nets.k_max):
        assert np.count_nonzero(basis.level == k) == nets.new_points(k).size
    assert basis.coarse.shape[0] == nets.size(nets.k_min)


def test_wavelet_spaces_complete_the_spline_spaces(small_pipeline):
    space, nets, _, splines, basis = small_pipeline
    w = space.weights
    for k in range(nets.k_min, nets.k_max):
        if not np.any(basis.level == k):
            continue
        both = np.vstack([splines.nested[k], basis.values[basis.level == k]])
        assert oracles.subspace_gap(both, splines.nested[k + 1], w) <= 1e-6


def test_analyze_wavelet_is_one_hot(grid_artifacts):
    basis = grid_artifacts.basis
    for i in (0, 17, basis.count - 1):
        cf = analyze(basis, basis.values[i])
        expected = np.zeros(basis.count)
        expected[i] = 1.0
        assert np.abs(cf.wavelet - expected).max() <= 1e-10


def test_constant_has_only_coarse_coefficients(grid_artifacts):
    basis = grid_artifacts.basis
    cf = analyze(basis, np.full(grid_artifacts.space.n, 3.0))
    assert np.abs(cf.wavelet).max() <= 1e-10
    assert np.allclose(synthesize(basis, CoefficientField(np.zeros(basis.count), cf.coarse)), 3.0)


def test_random_round_trip_and_plancherel(grid_artifacts):
    basis, space = grid_artifacts.basis, grid_artifacts.space
    f = np.random.default_rng(1).standard_normal(space.n)
    cf = analyze(basis, f)
    assert np.abs(synthesize(basis, cf) - f).max() <= 1e-8
    assert cf.energy() == pytest.approx(space.inner(f, f), rel=1e-10)


def test_analyze_rejects_wrong_length(grid_artifacts):
    with pytest.raises(ValueError):
        analyze(grid_artifacts.basis, np.zeros(3))


def test_sign_anchored_at_center(grid_artifacts):
    basis = grid_artifacts.basis
    assert np.all(basis.values[np.arange(basis.count), basis.beta] > 0)


def test_levels_without_new_points_have_no_wavelets():
    space = grid_1d(4)
    nets = build_nets(space, 0.25, k_min=-1, k_max=3)
    empty = [k for k in range(nets.k_min, nets.k_max) if nets.new_points(k).size == 0]
    assert empty
    basis = build_wavelets(estimate_splines(space, nets, R=16))
    assert not np.isin(basis.level, empty).any()
    assert basis.orthonormality_error() <= 1e-8


def test_workers_do_not_change_the_basis(small_pipeline):
    _, _, system, splines, basis = small_pipeline
    again = build_wavelets(splines, system, workers=4)
    assert np.array_equal(again.values, basis.values)


def test_eig_and_neumann_bases_agree(small_pipeline):
    _, _, system, splines, basis = small_pipeline
    neu = build_wavelets(splines, system, method="neumann")
    assert np.abs(neu.values - basis.values).max() <= 1e-6


def test_save_load_basis(tmp_path, small_pipeline):
    space, _, _, _, basis = small_pipeline
    save_basis(basis, tmp_path / "b")
    back = load_basis(space, tmp_path / "b")
    assert np.array_equal(back.values, basis.values)
    assert np.array_equal(back.coarse, basis.coarse)
    assert back.eps0 == basis.eps0


@given(st.lists(st.integers(0, 5000), min_size=3, max_size=40, unique=True), st.integers(0, 1000))
def test_exactness_on_random_clouds(ints, seed):
    space = MetricMeasureSpace.from_coords(np.array(ints) / 5000.0)
    nets = build_nets(space, 0.25)
    basis = build_wavelets(estimate_splines(space, nets, R=32, seed=seed))
    assert basis.count + basis.coarse.shape[0] == space.n
    assert basis.orthonormality_error() <= 1e-8
    assert basis.cancellation_errors().max(initial=0.0) <= 1e-8
    f = np.random.default_rng(seed).standard_normal(space.n)
    assert np.abs(synthesize(basis, analyze(basis, f)) - f).max() <= 1e-8


# -- Riesz bounds, decay, lower bound -----------------------------------------


def test_riesz_bounds_finite_positive(small_pipeline):
    _, nets, _, splines, _ = small_pipeline
    for k in nets.levels:
        r = riesz_check(splines, k, trials=50)
        assert 0 < r["r_min"] <= r["r_max"] < np.inf


def test_decay_envelope(grid_artifacts):
    basis = grid_artifacts.basis
    rep = verify_decay(basis)
    assert rep["nu_fit"] > 0 and rep["violations"] == 0
    vol = grid_artifacts.space.volumes(basis.beta, basis.scales())
    at_center = np.abs(basis.values[np.arange(basis.count), basis.beta]) * np.sqrt(vol)
    assert np.all(at_center <= rep["C_fit"] * (1 + 1e-12))
    assert rep["eta_est"] is not None and rep["eta_est"] > 0


def test_lower_bound_grid(grid_artifacts):
    basis = grid_artifacts.basis
    rep = verify_lower_bound(basis)
    assert rep["ok"] and rep["c_lower"] > 0 and rep["c3"] > 0
    assert rep["eps0"] == 1 / 16
    idx = np.arange(basis.count)
    fine = grid_artifacts.space.volumes(basis.beta, basis.scales() * basis.delta)
    assert np.all(np.abs(basis.values[idx, basis.beta]) * np.sqrt(fine) >= rep["c3"] * (1 - 1e-12))


def test_lower_bound_monotone_in_eps(grid_artifacts):
    table = verify_lower_bound(grid_artifacts.basis)["table"]
    values = [row["c_lower"] for row in table]
    assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))


def test_core_masks_need_eps0():
    space = grid_1d(16)
    nets = build_nets(space, 0.25)
    basis = build_wavelets(estimate_splines(space, nets, R=8), lower_bound=False)
    with pytest.raises(ValueError):
        basis.core_masks()
