import numpy as np
import pytest

from measures.empirical_measure import EmpiricalMeasure
from mckv.law_trajectory import LawTrajectory, expected_metric, path_metric
from simulate.noise import NoiseBundle
from simulate.particle_system import run_particle_system
from utils.errors import IncompatibleTrajectoryError


def test_from_ensemble_keeps_conditioning(ou_model, noise, gaussian_initial):
    ensemble = run_particle_system(ou_model, 8, noise, gaussian_initial, mass=2.0)
    law = LawTrajectory.from_ensemble(ensemble)
    assert len(law.laws) == noise.grid.n_steps + 1
    assert law.conditioning == (noise.seed, noise.path)
    assert law.mass == 2.0
    np.testing.assert_array_equal(law.at_time(1.0).points, ensemble.states[:, -1])


def test_wrong_number_of_laws(grid):
    with pytest.raises(IncompatibleTrajectoryError):
        LawTrajectory(grid=grid, laws=(EmpiricalMeasure.dirac([0.0]),), seed=0, path=0, mass=1.0)


def test_laws_must_share_the_mass(grid):
    laws = [EmpiricalMeasure.dirac([0.0])] * grid.n_steps + [EmpiricalMeasure.dirac([0.0], 2.0)]
    with pytest.raises(ValueError):
        LawTrajectory(grid=grid, laws=laws, seed=0, path=0, mass=1.0)


def test_noise_of_another_path_is_rejected(noise, grid):
    law = LawTrajectory.constant(EmpiricalMeasure.dirac([0.0]), noise)
    law.check_noise(noise)
    with pytest.raises(IncompatibleTrajectoryError):
        law.check_noise(NoiseBundle.generate(grid, 1, 1, 1, seed=noise.seed, path=1))
    with pytest.raises(IncompatibleTrajectoryError):
        law.check_noise(noise.coarsened(2))


def test_path_metric_of_shifted_diracs(noise):
    first = LawTrajectory.constant(EmpiricalMeasure.dirac([0.0]), noise)
    second = LawTrajectory.constant(EmpiricalMeasure.dirac([0.1]), noise)
    assert path_metric(first, first) == 0.0
    assert path_metric(first, second) == pytest.approx(0.1, abs=1e-6)


def test_path_metric_needs_one_w_path(noise, grid):
    first = LawTrajectory.constant(EmpiricalMeasure.dirac([0.0]), noise)
    other = NoiseBundle.generate(grid, 1, 1, 1, seed=noise.seed + 1)
    second = LawTrajectory.constant(EmpiricalMeasure.dirac([0.0]), other)
    with pytest.raises(IncompatibleTrajectoryError):
        path_metric(first, second)


def test_expected_metric_of_a_single_pair_has_no_error(noise):
    first = LawTrajectory.constant(EmpiricalMeasure.dirac([0.0]), noise)
    second = LawTrajectory.constant(EmpiricalMeasure.dirac([0.1]), noise)
    mean, se = expected_metric([(first, second)])
    assert mean == pytest.approx(0.1, abs=1e-6)
    assert se == 0.0
    with pytest.raises(ValueError):
        expected_metric([])
