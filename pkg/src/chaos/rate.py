"""Convergence rate of the empirical measure towards the conditional law,

    E |<L^N_t, phi> - <mu_t, phi>| <= C(t) / sqrt(N),

measured over several W paths and fitted on a log-log scale.
"""
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.stats import linregress, norm

from coeffs.coefficient_set import CoefficientSet
from measures.empirical_measure import EmpiricalMeasure, integrate
from measures.test_functions import TestFunction
from mckv.law_trajectory import rho
from mckv.oracles import GaussianConditionalLaw, reference_pairing
from simulate.initial_law import InitialLaw
from simulate.noise import NoiseBundle, TimeGrid
from simulate.particle_system import run_particle_system
from utils.errors import ReferenceQualityError
from utils.logger.session_logger import SessionLogger

REFERENCE_FACTOR = 8
# seed offset of the independent reference cloud on the same W path
REFERENCE_SEED_OFFSET = 7919
ORACLE_QUANTILES = 4096

Mapper = Callable[..., Iterable]


class RateFit(BaseModel):
    """Least-squares fit of log e(N) = intercept + slope log N."""
    n_values: List[int]
    errors: List[float]
    slope: float
    intercept: float
    slope_stderr: float
    r_squared: float

    def to_dict(self) -> dict:
        return self.model_dump()


def fit_rate(n_values: Sequence[int], errors: Sequence[float]) -> RateFit:
    """Raises ValueError for fewer than 3 distinct N or non-positive errors."""
    n = np.asarray(n_values, dtype=float)
    e = np.asarray(errors, dtype=float)
    if n.shape != e.shape:
        raise ValueError(f"{len(n)} sample sizes but {len(e)} errors")
    if len(np.unique(n)) < 3:
        raise ValueError("a rate fit needs at least 3 distinct sample sizes")
    if np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise ValueError("all errors must be positive and finite")
    fit = linregress(np.log(n), np.log(e))
    return RateFit(n_values=[int(v) for v in n_values], errors=[float(v) for v in e],
                   slope=float(fit.slope), intercept=float(fit.intercept),
                   slope_stderr=float(fit.stderr), r_squared=float(fit.rvalue ** 2))


@dataclass(frozen=True)
class RateProblem:
    """Model, discretisation and optional closed-form conditional law."""
    coeffs: CoefficientSet
    initial: InitialLaw
    grid: TimeGrid
    mass: float = 1.0
    oracle: Optional[Callable[[NoiseBundle], GaussianConditionalLaw]] = None


class RateResult(BaseModel):
    fit: RateFit
    rho_fit: Optional[RateFit] = None
    per_path_errors: List[List[float]]


def _oracle_cloud(law: GaussianConditionalLaw, k: int, mass: float) -> EmpiricalMeasure:
    """Quantile discretisation of the 1-D Gaussian conditional law."""
    mean, var = law.at_index(k)
    levels = (np.arange(ORACLE_QUANTILES) + 0.5) / ORACLE_QUANTILES
    points = mean[0] + np.sqrt(var) * norm.ppf(levels)
    return EmpiricalMeasure.uniform(points[:, None], mass)


def rate_errors_on_path(problem: RateProblem, phi: TestFunction, t: float,
                        n_values: Sequence[int], path: int, seed: int,
                        n_reference: Optional[int] = None) -> Tuple[List[float], List[float]]:
    """|<L^N_t - mu_t, phi>| and rho(L^N_t, mu_t) for every N on one W path.

    The N-particle runs are nested (first N particles of one bundle); the
    reference cloud, when no oracle exists, uses independent particles.
    """
    coeffs, d = problem.coeffs, problem.coeffs.dim_x
    k = problem.grid.index_of(t)
    noise = NoiseBundle.generate(problem.grid, max(n_values), d, coeffs.dim_w,
                                 seed=seed, path=path)
    if problem.oracle is not None:
        law = problem.oracle(noise)
        target = reference_pairing(law, phi, k, problem.mass)
        cloud = _oracle_cloud(law, k, problem.mass) if d == 1 else None
    else:
        reference_noise = noise.resampled(particle_seed=seed + REFERENCE_SEED_OFFSET,
                                          init_seed=seed + REFERENCE_SEED_OFFSET,
                                          n_particles=n_reference)
        reference = run_particle_system(coeffs, n_reference, reference_noise,
                                        problem.initial, problem.mass)
        cloud = reference.empirical_law(k)
        target = integrate(cloud, phi)

    errors, rho_errors = [], []
    for n in n_values:
        ensemble = run_particle_system(coeffs, n, noise.subset(n), problem.initial,
                                       problem.mass)
        law_n = ensemble.empirical_law(k)
        errors.append(abs(integrate(law_n, phi) - target))
        rho_errors.append(rho(law_n, cloud) if cloud is not None else float("nan"))
    return errors, rho_errors


def convergence_rate(problem: RateProblem, n_values: Sequence[int], n_paths: int,
                     phi: TestFunction, t: float, seed: int = 0,
                     n_reference: Optional[int] = None, mapper: Mapper = map) -> RateResult:
    """Fit the rate of e(N) = mean over W paths of |<L^N_t - mu_t, phi>|.

    Args:
        problem: Model and discretisation
        n_values: Particle numbers, at least 3 distinct
        n_paths: Number of W paths
        phi: Test function
        t: Evaluation time, a grid point
        seed: Experiment seed
        n_reference: Size of the reference run when ``problem.oracle`` is None;
            defaults to 8 * max(N)
        mapper: ``map``-like callable used to evaluate the W paths

    Returns:
        RateResult with the test-function fit and, where available, the
        secondary rho-based fit.

    Raises:
        ReferenceQualityError: no oracle and n_reference < 8 * max(N).
    """
    if n_paths < 1:
        raise ValueError(f"need at least one W path, got {n_paths}")
    if problem.oracle is None:
        needed = REFERENCE_FACTOR * max(n_values)
        n_reference = needed if n_reference is None else n_reference
        if n_reference < needed:
            raise ReferenceQualityError(
                f"reference run of {n_reference} particles is below "
                f"{REFERENCE_FACTOR} x max N = {needed}")

    cells = list(mapper(
        lambda path: rate_errors_on_path(problem, phi, t, n_values, path, seed, n_reference),
        range(n_paths)))
    errors = np.array([cell[0] for cell in cells])
    rho_errors = np.array([cell[1] for cell in cells])

    fit = fit_rate(n_values, errors.mean(axis=0))
    rho_fit = None
    mean_rho = rho_errors.mean(axis=0)
    if np.all(np.isfinite(mean_rho)) and np.all(mean_rho > 0):
        rho_fit = fit_rate(n_values, mean_rho)

    SessionLogger.log_to_file(
        "execution_log",
        f"[RATE] {problem.coeffs.name} {phi.name}: slope {fit.slope:.4f} "
        f"+/- {fit.slope_stderr:.4f} over {n_paths} paths")
    return RateResult(fit=fit, rho_fit=rho_fit, per_path_errors=errors.tolist())
