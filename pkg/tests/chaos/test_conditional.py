import numpy as np
import pytest

from chaos.conditional import (INTEGRANDS, Integrand, chaos_gap_on_path,
                               conditional_chaos_gap, conditional_martingale_test, pair_average)
from measures.test_functions import bank_by_name
from simulate.noise import NoiseBundle
from simulate.particle_system import run_particle_system
from utils.errors import AssumptionViolationError, InsufficientSamplesError


def test_pair_average_skips_the_diagonal():
    values = np.array([1.0, 2.0, 3.0])
    assert pair_average(values, values) == pytest.approx(22.0 / 6.0)


def test_pair_average_needs_two_particles():
    with pytest.raises(InsufficientSamplesError):
        pair_average(np.array([1.0]), np.array([1.0]))


def test_identical_particles_have_no_chaos_gap():
    x1 = bank_by_name(1)["x1"]
    positions = np.full((5, 1), 0.7)
    assert chaos_gap_on_path(positions, x1, x1, 0.7, 0.7) == pytest.approx(0.0, abs=1e-15)


def test_chaos_gap_averages_over_paths(ou_model, grid, gaussian_initial):
    one = bank_by_name(1)["one"]
    ensembles = [run_particle_system(ou_model, 8, NoiseBundle.generate(grid, 8, 1, 1, 2, path=p),
                                     gaussian_initial) for p in range(3)]
    gap, se = conditional_chaos_gap(ensembles, one, one, grid.n_steps, [(1.0, 1.0)] * 3)
    assert gap == pytest.approx(0.0, abs=1e-12)
    assert se == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        conditional_chaos_gap(ensembles, one, one, grid.n_steps, [(1.0, 1.0)])


def test_registered_integrands():
    assert set(INTEGRANDS) == {"zero", "one", "sin_w", "cos_b", "tanh_wb"}


def test_zero_integrand_has_zero_statistic(noise):
    result = conditional_martingale_test(INTEGRANDS["zero"], noise, "B")
    assert result.estimate == 0.0
    assert result.statistic == 0.0


def test_b_integral_is_centred(noise):
    result = conditional_martingale_test(INTEGRANDS["cos_b"], noise, "B")
    assert result.standard_error > 0
    assert abs(result.statistic) < 5.0


def test_w_measurable_integrand_passes_exactly(noise):
    result = conditional_martingale_test(INTEGRANDS["sin_w"], noise, "W")
    assert result.statistic <= 1e-12
    assert result.standard_error == 0.0


def test_mixed_integrand_matches_its_conditional_mean(noise):
    result = conditional_martingale_test(INTEGRANDS["tanh_wb"], noise, "W")
    assert result.statistic <= 1e-12


def test_integrand_over_its_bound_is_rejected(noise):
    loud = Integrand(name="loud", bound=1.0, fn=lambda t, w, b: np.full(b.shape[0], 2.0))
    with pytest.raises(AssumptionViolationError):
        conditional_martingale_test(loud, noise, "B")


def test_one_resample_is_not_enough(grid):
    single = NoiseBundle.generate(grid, 1, 1, 1, seed=0)
    with pytest.raises(InsufficientSamplesError):
        conditional_martingale_test(INTEGRANDS["one"], single, "B")


def test_unknown_noise_is_rejected(noise):
    with pytest.raises(ValueError):
        conditional_martingale_test(INTEGRANDS["one"], noise, "Z")
