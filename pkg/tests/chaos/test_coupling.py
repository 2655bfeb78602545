import pytest

from chaos.coupling import coupling_errors_on_path, particle_coupling_error
from chaos.rate import RateProblem
from simulate.noise import TimeGrid
from utils.errors import ReferenceQualityError


def test_measure_free_particles_couple_exactly(shift_model, gaussian_initial):
    problem = RateProblem(coeffs=shift_model, initial=gaussian_initial, grid=TimeGrid(1.0, 5))
    errors = coupling_errors_on_path(problem, [4, 8], path=0, seed=1, n_reference=16)
    assert errors == [0.0, 0.0]


def test_ou_coupling_error_decays(ou_model, gaussian_initial):
    problem = RateProblem(coeffs=ou_model, initial=gaussian_initial, grid=TimeGrid(1.0, 10))
    result = particle_coupling_error(problem, [8, 32, 128], n_paths=16, seed=2)
    assert result.fit.slope < -0.3
    assert len(result.per_path_errors) == 16


def test_reference_run_must_be_large_enough(ou_model, gaussian_initial):
    problem = RateProblem(coeffs=ou_model, initial=gaussian_initial, grid=TimeGrid(1.0, 5))
    with pytest.raises(ReferenceQualityError):
        particle_coupling_error(problem, [8, 16, 32], n_paths=2, n_reference=64)
