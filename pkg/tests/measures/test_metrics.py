import numpy as np
import pytest

from measures.empirical_measure import EmpiricalMeasure
from measures.metrics import bl_distance, w1_1d
from utils.errors import MassMismatchError, UnsupportedDimensionError


def test_distance_to_itself_is_zero():
    mu = EmpiricalMeasure.uniform(np.random.default_rng(3).normal(size=(50, 1)))
    assert bl_distance(mu, mu) == 0.0


def test_distance_ignores_atom_order():
    points = np.random.default_rng(4).normal(size=(20, 1))
    mu = EmpiricalMeasure.uniform(points)
    nu = EmpiricalMeasure.uniform(points[::-1])
    assert bl_distance(mu, nu) == 0.0


def test_close_diracs_are_at_their_separation():
    mu, nu = EmpiricalMeasure.dirac([0.0]), EmpiricalMeasure.dirac([0.1])
    assert bl_distance(mu, nu) == pytest.approx(0.1, abs=1e-6)


def test_far_diracs_saturate_at_two():
    mu, nu = EmpiricalMeasure.dirac([0.0]), EmpiricalMeasure.dirac([10.0])
    assert bl_distance(mu, nu) == pytest.approx(2.0, abs=1e-6)


def test_unequal_masses_at_one_point_differ_by_the_mass_gap():
    mu, nu = EmpiricalMeasure.dirac([0.5], mass=2.0), EmpiricalMeasure.dirac([0.5], mass=1.0)
    assert bl_distance(mu, nu) == pytest.approx(1.0, abs=1e-6)


def test_distance_is_symmetric():
    rng = np.random.default_rng(5)
    mu = EmpiricalMeasure.uniform(rng.normal(size=(30, 1)))
    nu = EmpiricalMeasure.uniform(rng.normal(0.5, 1.0, size=(40, 1)))
    assert bl_distance(mu, nu) == pytest.approx(bl_distance(nu, mu), rel=1e-9)


def test_distance_is_bounded_by_w1_for_equal_masses():
    rng = np.random.default_rng(6)
    mu = EmpiricalMeasure.uniform(rng.normal(size=(30, 1)))
    nu = EmpiricalMeasure.uniform(rng.normal(0.3, 1.0, size=(30, 1)))
    assert bl_distance(mu, nu) <= w1_1d(mu, nu) + 1e-9


def test_exact_mode_needs_one_dimension():
    mu, nu = EmpiricalMeasure.dirac([0.0, 0.0]), EmpiricalMeasure.dirac([0.3, 0.4])
    with pytest.raises(UnsupportedDimensionError):
        bl_distance(mu, nu)


def test_sliced_mode_is_a_lower_bound_in_two_dimensions():
    mu, nu = EmpiricalMeasure.dirac([0.0, 0.0]), EmpiricalMeasure.dirac([0.3, 0.4])
    value = bl_distance(mu, nu, mode="sliced", n_projections=128, seed=1)
    assert 0.0 < value <= 0.5 + 1e-9


def test_sliced_mode_is_reproducible():
    rng = np.random.default_rng(8)
    mu = EmpiricalMeasure.uniform(rng.normal(size=(20, 3)))
    nu = EmpiricalMeasure.uniform(rng.normal(size=(20, 3)))
    first = bl_distance(mu, nu, mode="sliced", seed=2)
    assert bl_distance(mu, nu, mode="sliced", seed=2) == first


def test_dimension_mismatch_is_rejected():
    with pytest.raises(UnsupportedDimensionError):
        bl_distance(EmpiricalMeasure.dirac([0.0]), EmpiricalMeasure.dirac([0.0, 1.0]),
                    mode="sliced")


def test_w1_of_diracs_scales_with_mass():
    assert w1_1d(EmpiricalMeasure.dirac([0.0]), EmpiricalMeasure.dirac([1.0])) == pytest.approx(1.0)
    assert w1_1d(EmpiricalMeasure.dirac([0.0], mass=2.0),
                 EmpiricalMeasure.dirac([1.0], mass=2.0)) == pytest.approx(2.0)


def test_w1_rejects_unequal_masses_and_higher_dimensions():
    with pytest.raises(MassMismatchError):
        w1_1d(EmpiricalMeasure.dirac([0.0]), EmpiricalMeasure.dirac([0.0], mass=2.0))
    with pytest.raises(UnsupportedDimensionError):
        w1_1d(EmpiricalMeasure.dirac([0.0, 0.0]), EmpiricalMeasure.dirac([0.0, 0.0]))


@pytest.mark.parametrize("separation, expected", [(1.0, 1.0), (3.0, 2.0)])
def test_unit_diracs_follow_min_of_separation_and_two(separation, expected):
    mu, nu = EmpiricalMeasure.dirac([0.0]), EmpiricalMeasure.dirac([separation])
    assert bl_distance(mu, nu) == pytest.approx(expected, abs=1e-6)


def test_triangle_inequality():
    rng = np.random.default_rng(9)
    mu = EmpiricalMeasure.uniform(rng.normal(0.0, 1.0, size=(25, 1)))
    nu = EmpiricalMeasure.uniform(rng.normal(1.0, 0.5, size=(25, 1)))
    lam = EmpiricalMeasure.uniform(rng.normal(-0.5, 2.0, size=(25, 1)), mass=1.5)
    direct = bl_distance(mu, lam, grid_resolution=1024)
    via_nu = (bl_distance(mu, nu, grid_resolution=1024)
              + bl_distance(nu, lam, grid_resolution=1024))
    assert direct <= via_nu + 1e-2


def test_refining_the_grid_never_decreases_the_distance():
    rng = np.random.default_rng(10)
    mu = EmpiricalMeasure.uniform(rng.normal(size=(15, 1)))
    nu = EmpiricalMeasure.uniform(rng.normal(0.4, 1.2, size=(20, 1)))
    values = [bl_distance(mu, nu, grid_resolution=r) for r in (16, 32, 64, 128, 256)]
    assert all(fine >= coarse - 1e-12 for coarse, fine in zip(values, values[1:]))


def test_unknown_mode_is_rejected_in_one_dimension():
    with pytest.raises(ValueError, match="unknown mode"):
        bl_distance(EmpiricalMeasure.dirac([0.0]), EmpiricalMeasure.dirac([1.0]), mode="sinkhorn")
