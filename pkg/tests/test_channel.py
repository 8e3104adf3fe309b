import numpy as np
import pytest
from scipy import stats

from otafl.channel import UserGeometry, channel_gain, draw_channels, place_users
from otafl.errors import InvalidGeometryError


def test_single_user_inside_annulus(rng):
    g = place_users(1, 500.0, 10.0, rng)
    assert g.count == 1
    assert 10.0 <= g.distances[0] <= 500.0


def test_reference_population_size(rng):
    g = place_users(1000, 500.0, 10.0, rng)
    assert g.positions.shape == (1000, 2)
    assert np.all(g.distances <= 500.0) and np.all(g.distances >= 10.0)


def test_radius_squared_is_uniform_over_area(rng):
    g = place_users(10_000, 500.0, 10.0, rng)
    r2 = g.distances**2
    ks = stats.kstest(r2, stats.uniform(loc=10.0**2, scale=500.0**2 - 10.0**2).cdf)
    assert ks.statistic < 0.02


@pytest.mark.parametrize("min_distance", [500.0, 600.0, 0.0])
def test_invalid_geometry(rng, min_distance):
    with pytest.raises(InvalidGeometryError):
        place_users(5, 500.0, min_distance, rng)


def test_geometry_is_deterministic():
    a = place_users(50, 500.0, 10.0, np.random.default_rng(7))
    b = place_users(50, 500.0, 10.0, np.random.default_rng(7))
    assert np.array_equal(a.positions, b.positions)
    ca = draw_channels(a, 4, 3.0, np.random.default_rng(8))
    cb = draw_channels(b, 4, 3.0, np.random.default_rng(8))
    assert np.array_equal(ca.vectors, cb.vectors)


def _fixed(distance, count):
    pos = np.column_stack([np.full(count, distance), np.zeros(count)])
    return UserGeometry(pos, 500.0, 0.5)


def _mean_power_check(distance, n_ant, alpha, count, rng):
    h = draw_channels(_fixed(distance, count), n_ant, alpha, rng).vectors
    p = np.sum(np.abs(h) ** 2, axis=1)
    expected = n_ant * distance ** (-alpha)
    se = p.std(ddof=1) / np.sqrt(count)
    return p.mean(), expected, se


def test_unit_distance_has_no_path_loss(rng):
    mean, expected, se = _mean_power_check(1.0, 4, 3.0, 100_000, rng)
    assert expected == 4.0
    assert abs(mean - expected) < 3 * se


def test_mean_power_at_100m(rng):
    mean, expected, se = _mean_power_check(100.0, 4, 3.0, 100_000, rng)
    assert expected == pytest.approx(4e-6)
    assert abs(mean - expected) < 3 * se


def test_scaling_law(rng):
    c = 2.5
    m1, e1, se1 = _mean_power_check(40.0, 4, 3.0, 100_000, rng)
    m2, e2, se2 = _mean_power_check(40.0 * c, 4, 3.0, 100_000, rng)
    assert e2 / e1 == pytest.approx(c**-3.0)
    assert abs(m2 - c**-3.0 * m1) < 3 * np.hypot(se2, c**-3.0 * se1)


def test_entries_are_circular_unit_variance(rng):
    h = draw_channels(_fixed(1.0, 50_000), 4, 3.0, rng).vectors
    assert np.all(np.isfinite(h))
    assert abs(np.mean(h)) < 0.01
    assert abs(np.mean(h * h)) < 0.01  # circular symmetry: E[h^2] = 0
    assert np.mean(h.real**2) == pytest.approx(0.5, abs=0.01)


def test_rounds_with_different_seeds_are_uncorrelated():
    geo = _fixed(1.0, 25_000)
    a = draw_channels(geo, 4, 3.0, np.random.default_rng(1), round_index=1).vectors.ravel()
    b = draw_channels(geo, 4, 3.0, np.random.default_rng(2), round_index=2).vectors.ravel()
    corr = np.abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))
    assert corr < 0.01


@pytest.mark.parametrize("h, expected", [((1, 0, 0, 0), 1.0), ((3 + 4j,), 5.0)])
def test_channel_gain_examples(h, expected):
    assert channel_gain(np.array(h)) == pytest.approx(expected, abs=1e-15)


def test_channel_gain_matches_loop(rng):
    h = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    total = 0.0
    for z in h:
        total += z.real * z.real + z.imag * z.imag
    assert abs(channel_gain(h) - total**0.5) < 1e-12


def test_geometry_csv(tmp_path, rng):
    g = place_users(3, 500.0, 10.0, rng)
    path = tmp_path / "geo.csv"
    g.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "user_id,x_m,y_m,distance_m"
    assert len(lines) == 4
    row = lines[2].split(",")
    assert int(row[0]) == 1
    assert float(row[3]) == pytest.approx(g.distances[1], rel=1e-8)
