import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from homwave.datasets import grid_1d, grid_2d, random_geometric_graph, write_coords, write_graph, write_matrix
from homwave.space import MetricMeasureSpace, SpaceError, doubling_profile, load_space, volume

coords_1d = st.lists(st.integers(0, 2000), min_size=2, max_size=25, unique=True)


def space_from(ints, weights=None):
    x = np.array(ints, dtype=float) / 2000.0
    w = np.ones(len(ints)) if weights is None else np.asarray(weights)
    return MetricMeasureSpace.from_coords(x, w)


# -- construction --------------------------------------------------------------


def test_single_point_space():
    s = MetricMeasureSpace.from_coords([0.0], [1.0])
    assert s.total_mass == 1.0 and s.diam == 0.0


def test_two_points():
    s = MetricMeasureSpace.from_coords([0.0, 1.0], [0.5, 0.5])
    assert s.dist[0, 1] == 1.0 and s.total_mass == 1.0


def test_triangle_violation_rejected():
    d = [[0, 1, 3], [1, 0, 1], [3, 1, 0]]
    with pytest.raises(SpaceError, match="triangle"):
        MetricMeasureSpace.from_matrix(d, [1, 1, 1])


@pytest.mark.parametrize(
    "dist, weights, message",
    [
        ([[0, 1], [2, 0]], [1, 1], "symmetric"),
        ([[1, 1], [1, 0]], [1, 1], "diagonal"),
        ([[0, 1], [1, 0]], [1, 0], "positive"),
        ([[0, 1], [1, 0]], [1, 1, 1], "weights"),
    ],
)
def test_invalid_matrices(dist, weights, message):
    with pytest.raises(SpaceError, match=message):
        MetricMeasureSpace.from_matrix(dist, weights)


def test_disconnected_graph_rejected():
    with pytest.raises(SpaceError, match="connected"):
        MetricMeasureSpace.from_graph(3, [(0, 1, 1.0)], [1, 1, 1])


def test_snowflake_exponent_range():
    with pytest.raises(SpaceError):
        MetricMeasureSpace.from_coords([0.0, 1.0], snowflake=1.5)


# -- loading -----------------------------------------------------------------


def test_load_coords_roundtrip(tmp_path):
    s = grid_2d(4)
    path = write_coords(tmp_path / "c.csv", s.coords, s.weights)
    t = load_space(path, "coords")
    assert np.allclose(t.dist, s.dist) and np.allclose(t.weights, s.weights)


def test_load_matrix_roundtrip(tmp_path):
    s = grid_1d(5)
    path = write_matrix(tmp_path / "m.json", s.dist, s.weights)
    t = load_space(path, "matrix")
    assert np.array_equal(t.dist, s.dist)


def test_load_graph_roundtrip(tmp_path):
    s, edges = random_geometric_graph(30, seed=1)
    path = write_graph(tmp_path / "g.csv", edges, s.weights)
    t = load_space(path, "graph")
    assert np.allclose(t.dist, s.dist)


def test_missing_file_names_path(tmp_path):
    with pytest.raises(SpaceError, match="nope.csv"):
        load_space(tmp_path / "nope.csv")


def test_bad_number_reports_line(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("id,x,weight\na,0,1\nb,zz,1\n")
    with pytest.raises(SpaceError, match=r"c.csv:3"):
        load_space(p)


def test_matrix_file_with_snowflake(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"dist": [[0, 4], [4, 0]], "weights": [1, 1]}))
    assert load_space(p, "matrix", snowflake=0.5).dist[0, 1] == pytest.approx(2.0)


# -- volumes -----------------------------------------------------------------


def test_volume_four_point_line():
    s = MetricMeasureSpace.from_coords([0.0, 1.0, 2.0, 3.0], [1.0, 1.0, 1.0, 1.0])
    assert volume(s, 1, 1.5) == 3.0


def test_volume_zero_radius_is_zero():
    assert volume(grid_1d(10), 3, 0.0) == 0.0


def test_volume_large_radius_is_total():
    s = grid_1d(10)
    assert volume(s, 0, 2 * s.diam + 1) == pytest.approx(s.total_mass)


@given(coords_1d, st.floats(0, 1.2), st.data())
def test_volumes_match_direct_sums(ints, r, data):
    s = space_from(ints, weights=np.arange(1, len(ints) + 1))
    c = data.draw(st.integers(0, s.n - 1))
    expected = oracles.ball_volume(s.dist.tolist(), s.weights.tolist(), c, r)
    assert s.volume(c, r) == pytest.approx(expected, abs=1e-12)
    assert s.volumes([c], [r])[0] == pytest.approx(expected, abs=1e-12)
    assert s.volumes_row(c, [r])[0] == pytest.approx(expected, abs=1e-12)


@given(coords_1d, st.floats(0, 1), st.floats(0, 1))
def test_volume_monotone_in_radius(ints, r1, r2):
    s = space_from(ints)
    lo, hi = sorted((r1, r2))
    assert all(s.volume(c, lo) <= s.volume(c, hi) for c in range(s.n))


def test_pair_volume_excludes_far_endpoint():
    s = MetricMeasureSpace.from_coords([0.0, 1.0, 2.0], [1.0, 2.0, 4.0])
    pv = s.pair_volume()
    assert pv[0, 2] == 3.0 and pv[2, 0] == 6.0 and pv[1, 1] == 0.0


# -- doubling ----------------------------------------------------------------


def test_profile_single_point():
    p = doubling_profile(MetricMeasureSpace.from_coords([0.0], [1.0]))
    assert p.C_dbl == 1.0 and p.n == 0.0


def test_profile_1d_grid_away_from_atomic_scales(grid256):
    p = doubling_profile(grid256, sample_count=256, r_min=8.0 / 255.0)
    assert 1.8 <= p.C_dbl <= 2.3


def test_profile_2d_grid_exponent():
    s = grid_2d(16)
    p = doubling_profile(s, sample_count=256, r_min=8.0 / 15.0)
    assert 1.7 <= p.n <= 2.3


def test_profile_envelope_rechecks_on_fresh_samples(grid256):
    p = doubling_profile(grid256, sample_count=256, seed=1, r_min=8.0 / 255.0)
    rng = np.random.default_rng(9)
    for _ in range(300):
        x = int(rng.integers(grid256.n))
        r = float(rng.uniform(8.0 / 255.0, 1.0))
        lam = float(rng.uniform(1, 8))
        v1 = grid256.volume(x, r)
        assert grid256.volume(x, lam * r) <= 1.05 * p.C_dbl * lam**p.n0_est * v1


def test_profile_rejects_bad_sample_count():
    with pytest.raises(SpaceError):
        doubling_profile(grid_1d(4), sample_count=0)


def test_lp_norms():
    s = MetricMeasureSpace.from_coords([0.0, 1.0], [0.25, 0.75])
    f = np.array([2.0, -1.0])
    assert s.lp_norm(f, 1) == pytest.approx(1.25)
    assert s.lp_norm(f, 2) == pytest.approx(math.sqrt(1.75))
    assert s.lp_norm(f, math.inf) == 2.0
