import numpy as np
import pytest

from simulate.noise import NoiseBundle, TimeGrid
from utils.errors import InvalidGridError


def test_grid_from_step():
    grid = TimeGrid.from_step(1.0, 0.125)
    assert grid.n_steps == 8
    assert grid.dt == pytest.approx(0.125)
    assert grid.times[-1] == pytest.approx(1.0)
    assert grid.index_of(0.5) == 4


@pytest.mark.parametrize("horizon, dt", [(1.0, 0.0), (1.0, -0.1), (0.0, 0.1), (1.0, 0.3)])
def test_invalid_grids_are_rejected(horizon, dt):
    with pytest.raises(InvalidGridError):
        TimeGrid.from_step(horizon, dt)


def test_off_grid_time_is_rejected(grid):
    with pytest.raises(InvalidGridError):
        grid.index_of(0.51)


def test_same_seed_gives_same_increments(grid):
    first = NoiseBundle.generate(grid, 8, 2, 1, seed=3)
    second = NoiseBundle.generate(grid, 8, 2, 1, seed=3)
    np.testing.assert_array_equal(first.dW, second.dW)
    np.testing.assert_array_equal(first.dB, second.dB)


def test_particle_streams_do_not_depend_on_n(grid):
    small = NoiseBundle.generate(grid, 4, 1, 1, seed=11)
    large = NoiseBundle.generate(grid, 32, 1, 1, seed=11)
    np.testing.assert_array_equal(small.dB, large.dB[:4])
    np.testing.assert_array_equal(small.dB, large.subset(4).dB)


def test_paths_are_distinct(grid):
    first = NoiseBundle.generate(grid, 2, 1, 1, seed=5, path=0)
    second = NoiseBundle.generate(grid, 2, 1, 1, seed=5, path=1)
    assert not np.array_equal(first.dW, second.dW)


def test_particle_seed_keeps_the_common_path(grid):
    base = NoiseBundle.generate(grid, 4, 1, 1, seed=5)
    other = base.resampled(particle_seed=99)
    np.testing.assert_array_equal(base.dW, other.dW)
    assert not np.array_equal(base.dB, other.dB)
    np.testing.assert_array_equal(
        other.dB, NoiseBundle.generate(grid, 4, 1, 1, seed=5, particle_seed=99).dB)
    np.testing.assert_array_equal(base.initial_normals(4, 1), other.initial_normals(4, 1))


def test_init_seed_only_moves_initial_draws(grid):
    base = NoiseBundle.generate(grid, 4, 1, 1, seed=5)
    other = base.resampled(init_seed=42)
    np.testing.assert_array_equal(base.dB, other.dB)
    assert not np.array_equal(base.initial_normals(4, 1), other.initial_normals(4, 1))


def test_increments_are_read_only(noise):
    with pytest.raises(ValueError):
        noise.dW[0, 0] = 1.0


def test_common_path_starts_at_zero(noise):
    W = noise.W
    assert W.shape == (noise.grid.n_steps + 1, 1)
    assert W[0, 0] == 0.0
    np.testing.assert_allclose(W[-1], noise.dW.sum(axis=0), atol=1e-14)


def test_coarsened_bundle_sums_fine_increments(noise):
    coarse = noise.coarsened(4)
    assert coarse.grid.n_steps == 5
    np.testing.assert_allclose(coarse.W[-1], noise.W[-1], atol=1e-12)
    np.testing.assert_allclose(coarse.dB[:, 0], noise.dB[:, :4].sum(axis=1), atol=1e-14)


def test_coarsening_must_divide_the_steps(noise):
    with pytest.raises(InvalidGridError):
        noise.coarsened(3)


def test_increment_variance_matches_the_step():
    grid = TimeGrid(1.0, 100)
    bundle = NoiseBundle.generate(grid, 200, 1, 1, seed=21)
    assert np.var(bundle.dB) == pytest.approx(grid.dt, rel=0.05)
