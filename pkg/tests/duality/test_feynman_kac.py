import numpy as np
import pytest

from coeffs.families import coefficient_family
from duality.feynman_kac import duality_gap, duality_gap_details, feynman_kac_bank, feynman_kac_f
from measures.empirical_measure import EmpiricalMeasure
from measures.test_functions import bank_by_name
from mckv.law_trajectory import LawTrajectory
from mckv.oracles import gaussian_expectation
from mckv.picard import frozen_ensemble
from simulate.noise import NoiseBundle
from utils.errors import (ConditioningMismatchError, IncompatibleTrajectoryError,
                          InsufficientSamplesError)


@pytest.fixture
def frozen(ou_model, noise, gaussian_initial):
    return LawTrajectory.from_ensemble(
        frozen_ensemble(ou_model, LawTrajectory.constant(EmpiricalMeasure.dirac([0.0]), noise),
                        noise, 32, gaussian_initial))


def test_shift_dual_is_the_transported_function(shift_model, noise, frozen):
    x = np.array([[-0.5], [0.0], [1.5]])
    dual = feynman_kac_f(shift_model, frozen, x, 0.0, 1.0, bank_by_name(1)["sin_x1"], noise,
                         n_inner=4)
    np.testing.assert_allclose(dual.values, np.sin(x[:, 0] + noise.W[-1, 0]), atol=1e-12)
    np.testing.assert_array_equal(dual.standard_errors, 0.0)
    assert dual.conditioning == (noise.seed, noise.path)


def test_dual_from_a_later_start(shift_model, noise, frozen):
    dual = feynman_kac_f(shift_model, frozen, np.zeros(1), 0.5, 1.0, bank_by_name(1)["x1"],
                         noise, n_inner=2)
    k = noise.grid.index_of(0.5)
    assert dual.values[0] == pytest.approx(noise.W[-1, 0] - noise.W[k, 0], abs=1e-12)


def test_shift_duality_gap_vanishes(shift_model, noise, frozen, gaussian_initial):
    phi = bank_by_name(1)["sin_x1"]
    forward = LawTrajectory.from_ensemble(
        frozen_ensemble(shift_model, frozen, noise, 16, gaussian_initial))
    dual = feynman_kac_f(shift_model, frozen, forward.laws[0].points, 0.0, 1.0, phi, noise, 3)
    gap, se = duality_gap([forward], [dual], phi, 1.0)
    assert abs(gap) < 1e-12
    assert se == 0.0


def test_idiosyncratic_noise_gives_an_error_bar(ou_model, noise, frozen):
    bank = [bank_by_name(1)["x1"], bank_by_name(1)["sin_x1"]]
    duals = feynman_kac_bank(ou_model, frozen, np.zeros((2, 1)), 0.0, 1.0, bank, noise, 50)
    assert [d.phi_name for d in duals] == ["x1", "sin_x1"]
    assert duals[0].samples.shape == (50, 2)
    assert np.all(duals[0].standard_errors > 0)


def test_dual_estimates_are_reproducible(ou_model, noise, frozen):
    phi = bank_by_name(1)["x1"]
    first = feynman_kac_f(ou_model, frozen, np.zeros(1), 0.0, 1.0, phi, noise, 8)
    second = feynman_kac_f(ou_model, frozen, np.zeros(1), 0.0, 1.0, phi, noise, 8)
    np.testing.assert_array_equal(first.samples, second.samples)


def test_inner_sample_count_is_checked(ou_model, noise, frozen):
    with pytest.raises(InsufficientSamplesError):
        feynman_kac_f(ou_model, frozen, np.zeros(1), 0.0, 1.0, bank_by_name(1)["x1"], noise, 1)


def test_start_after_terminal_time(ou_model, noise, frozen):
    with pytest.raises(ValueError):
        feynman_kac_f(ou_model, frozen, np.zeros(1), 1.0, 0.5, bank_by_name(1)["x1"], noise, 2)


def test_frozen_law_of_another_path(ou_model, noise, frozen, grid):
    other = NoiseBundle.generate(grid, 4, 1, 1, seed=noise.seed, path=1)
    with pytest.raises(IncompatibleTrajectoryError):
        feynman_kac_f(ou_model, frozen, np.zeros(1), 0.0, 1.0, bank_by_name(1)["x1"], other, 2)


def test_pairing_needs_the_query_points(shift_model, noise, frozen):
    dual = feynman_kac_f(shift_model, frozen, np.zeros((2, 1)), 0.0, 1.0,
                         bank_by_name(1)["x1"], noise, 2)
    with pytest.raises(ConditioningMismatchError):
        dual.pair(EmpiricalMeasure.uniform(np.ones((2, 1))))


def test_gap_needs_matching_paths(shift_model, noise, frozen, gaussian_initial, grid):
    phi = bank_by_name(1)["x1"]
    forward = LawTrajectory.from_ensemble(
        frozen_ensemble(shift_model, frozen, noise, 4, gaussian_initial))
    other = NoiseBundle.generate(grid, 4, 1, 1, seed=noise.seed, path=2)
    other_frozen = LawTrajectory.constant(EmpiricalMeasure.dirac([0.0]), other)
    dual = feynman_kac_f(shift_model, other_frozen, forward.laws[0].points, 0.0, 1.0, phi,
                         other, 2)
    with pytest.raises(ConditioningMismatchError):
        duality_gap([forward], [dual], phi, 1.0)
    with pytest.raises(ConditioningMismatchError):
        duality_gap([forward], [], phi, 1.0)


def test_gap_needs_the_same_test_function(shift_model, noise, frozen, gaussian_initial):
    forward = LawTrajectory.from_ensemble(
        frozen_ensemble(shift_model, frozen, noise, 4, gaussian_initial))
    dual = feynman_kac_f(shift_model, frozen, forward.laws[0].points, 0.0, 1.0,
                         bank_by_name(1)["x1"], noise, 2)
    with pytest.raises(ConditioningMismatchError):
        duality_gap([forward], [dual], bank_by_name(1)["sin_x1"], 1.0)


def test_outer_error_covers_several_paths(shift_model, grid, gaussian_initial):
    phi = bank_by_name(1)["x1"]
    forward, duals = [], []
    for path in range(3):
        bundle = NoiseBundle.generate(grid, 8, 1, 1, seed=5, path=path)
        law = LawTrajectory.constant(EmpiricalMeasure.dirac([0.0]), bundle)
        forward.append(LawTrajectory.from_ensemble(
            frozen_ensemble(shift_model, law, bundle, 8, gaussian_initial)))
        duals.append(feynman_kac_f(shift_model, law, forward[-1].laws[0].points, 0.0, 1.0,
                                   phi, bundle, 2))
    details = duality_gap_details(forward, duals, phi, 1.0)
    assert details.to_dict()["paths"] == 3
    assert abs(details.gap) < 1e-12
    assert details.standard_error < 1e-12


@pytest.fixture
def heat_model():
    """a = 1/2 with only idiosyncratic noise."""
    return coefficient_family("constant", {"sigma": 0.0, "alpha": 1.0, "b": 0.0}, d=1)


@pytest.fixture
def heat_law(noise):
    return LawTrajectory.constant(EmpiricalMeasure.dirac([0.0]), noise)


def test_heat_dual_matches_the_gaussian_convolution(heat_model, heat_law, noise):
    phi = bank_by_name(1)["gauss"]
    x = np.array([[-0.4], [0.8]])
    dual = feynman_kac_f(heat_model, heat_law, x, 0.0, 1.0, phi, noise, n_inner=400)
    expected = [gaussian_expectation(phi, point, 1.0) for point in x]
    assert np.all(dual.standard_errors > 0.0)
    assert np.all(np.abs(dual.values - expected) <= 3.0 * dual.standard_errors)


def test_propagating_through_an_intermediate_time_agrees(heat_model, heat_law, noise):
    phi, x1 = bank_by_name(1)["gauss"], bank_by_name(1)["x1"]
    x = np.array([0.3])
    direct = feynman_kac_f(heat_model, heat_law, x, 0.0, 1.0, phi, noise, n_inner=200)
    # positions at s = 0.5 of the inner paths started from x
    halfway = feynman_kac_f(heat_model, heat_law, x, 0.0, 0.5, x1, noise, n_inner=200)
    later = feynman_kac_f(heat_model, heat_law, halfway.samples[:, :1], 0.5, 1.0, phi, noise,
                          n_inner=50)
    staged = later.values
    combined_se = np.sqrt(direct.standard_errors[0] ** 2
                          + np.var(staged, ddof=1) / len(staged))
    assert abs(staged.mean() - direct.values[0]) <= 3.0 * combined_se


def test_shift_dual_satisfies_the_tower_property_exactly(shift_model, noise, frozen):
    phi, x1 = bank_by_name(1)["sin_x1"], bank_by_name(1)["x1"]
    x = np.array([[-0.2], [1.1]])
    direct = feynman_kac_f(shift_model, frozen, x, 0.0, 1.0, phi, noise, n_inner=2)
    halfway = feynman_kac_f(shift_model, frozen, x, 0.0, 0.5, x1, noise, n_inner=2)
    later = feynman_kac_f(shift_model, frozen, halfway.values[:, None], 0.5, 1.0, phi, noise,
                          n_inner=2)
    np.testing.assert_allclose(later.values, direct.values, atol=1e-12)
