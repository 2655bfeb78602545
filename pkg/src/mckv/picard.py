"""Picard iteration of the conditional-law map

    Phi(mu) = r L(X^mu | W),  dX^mu = b(t, X^mu, mu_t) dt + sigma(...) dW + alpha(...) dB

on a single W path, with common random numbers across iterations.
"""
import os
from typing import List, Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from coeffs.coefficient_set import CoefficientSet
from measures.empirical_measure import EmpiricalMeasure
from mckv.law_trajectory import LawTrajectory, path_metric
from simulate.noise import NoiseBundle
from simulate.particle_system import (
    Initial, ParticleEnsemble, initial_positions, integrate_paths)
from utils.logger.session_logger import SessionLogger

load_dotenv(override=True)


class PicardDiagnostics(BaseModel):
    """Metric d(mu^(j+1), mu^(j)) after every application of Phi."""
    tol: float
    max_iter: int
    metrics: List[float] = Field(default_factory=list)
    converged: bool = False
    best_iteration: int = 0

    @property
    def iterations(self) -> int:
        return len(self.metrics)

    @property
    def ratios(self) -> List[float]:
        """metrics[j + 1] / metrics[j]; inf where the previous metric is 0."""
        return [b / a if a > 0 else float("inf")
                for a, b in zip(self.metrics, self.metrics[1:])]

    def to_dict(self) -> dict:
        data = self.model_dump()
        data["iterations"] = self.iterations
        data["ratios"] = self.ratios
        return data


def frozen_ensemble(coeffs: CoefficientSet, law: LawTrajectory, noise: NoiseBundle,
                    n_particles: int, initial: Initial) -> ParticleEnsemble:
    """Particles of the frozen SDE whose measure argument is read from ``law``.

    Raises:
        IncompatibleTrajectoryError: ``law`` is not on the grid and W path of ``noise``.
    """
    law.check_noise(noise)
    noise = noise.subset(n_particles)
    x0 = initial_positions(initial, noise, n_particles, coeffs.dim_x)
    states = integrate_paths(coeffs, x0, noise, lambda k, x: law.laws[k])
    return ParticleEnsemble(states=states, noise=noise, mass=law.mass)


def phi_map(coeffs: CoefficientSet, law: LawTrajectory, noise: NoiseBundle,
            n_particles: int, initial: Initial) -> LawTrajectory:
    """Empirical conditional law of the frozen SDE driven by ``law``."""
    return LawTrajectory.from_ensemble(
        frozen_ensemble(coeffs, law, noise, n_particles, initial))


def initial_guess(noise: NoiseBundle, n_particles: int, initial: Initial,
                  dim: int, mass: float) -> LawTrajectory:
    """mu^(0): the initial cloud held constant in time."""
    noise = noise.subset(n_particles)
    x0 = initial_positions(initial, noise, n_particles, dim)
    return LawTrajectory.constant(EmpiricalMeasure.uniform(x0, mass), noise)


def picard_solve(coeffs: CoefficientSet, noise: NoiseBundle, n_particles: int,
                 initial: Initial, tol: float = 1e-3, max_iter: Optional[int] = None,
                 mass: float = 1.0,
                 grid_resolution: Optional[int] = None) -> Tuple[LawTrajectory, PicardDiagnostics]:
    """Iterate mu^(j+1) = Phi(mu^(j)) until the per-path metric drops below ``tol``.

    Args:
        coeffs: Coefficient set
        noise: Noise bundle of the W path; its B increments are reused every iteration
        n_particles: Particles per application of Phi
        initial: Initial law or positions
        tol: Stopping threshold on dt * sum_k rho(mu^(j+1)_k, mu^(j)_k)
        max_iter: Maximum number of applications of Phi (default MFSIM_PICARD_MAX_ITER)
        mass: Total mass r
        grid_resolution: Grid of the rho evaluations

    Returns:
        (law, diagnostics). Without convergence the law is the iterate with
        the smallest metric and ``diagnostics.converged`` is False.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter is None:
        max_iter = int(os.getenv("MFSIM_PICARD_MAX_ITER", "20"))
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")

    diagnostics = PicardDiagnostics(tol=tol, max_iter=max_iter)
    current = initial_guess(noise, n_particles, initial, coeffs.dim_x, mass)
    best, best_metric = current, float("inf")

    for iteration in range(max_iter):
        updated = phi_map(coeffs, current, noise, n_particles, initial)
        metric = path_metric(updated, current, grid_resolution)
        diagnostics.metrics.append(metric)
        SessionLogger.log_to_file(
            "picard_log",
            f"[PICARD] path {noise.path} iteration {iteration + 1}: metric {metric:.6e}",
            log_level="debug")
        if metric < best_metric:
            best, best_metric = updated, metric
            diagnostics.best_iteration = iteration + 1
        current = updated
        if metric < tol:
            diagnostics.converged = True
            break

    if not diagnostics.converged:
        SessionLogger.log_to_file(
            "picard_log",
            f"[PICARD] path {noise.path} did not reach tol {tol:g} in {max_iter} "
            f"iterations; best metric {best_metric:.6e}",
            log_level="warning")
    return (current if diagnostics.converged else best), diagnostics
