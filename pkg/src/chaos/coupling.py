"""Strong coupling between interacting particles and their McKean-Vlasov
counterparts driven by the same (X_0^i, W, B^i):

    E sup_t |X^{i,N}_t - X^i_t|^2 = O(1 / N).
"""
from typing import Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from chaos.rate import (
    REFERENCE_FACTOR, REFERENCE_SEED_OFFSET, Mapper, RateFit, RateProblem, fit_rate)
from mckv.law_trajectory import LawTrajectory
from mckv.picard import frozen_ensemble
from simulate.noise import NoiseBundle
from simulate.particle_system import run_particle_system
from utils.errors import ReferenceQualityError


class CouplingResult(BaseModel):
    fit: RateFit
    per_path_errors: List[List[float]]


def coupling_errors_on_path(problem: RateProblem, n_values: Sequence[int], path: int,
                            seed: int, n_reference: int) -> List[float]:
    """mean_i sup_k |X^{i,N}_k - X^i_k|^2 for every N on one W path.

    X^i solves the frozen SDE along a reference conditional law built from
    ``n_reference`` independent particles on the same W path.
    """
    coeffs = problem.coeffs
    noise = NoiseBundle.generate(problem.grid, max(n_values), coeffs.dim_x, coeffs.dim_w,
                                 seed=seed, path=path)
    reference_noise = noise.resampled(particle_seed=seed + REFERENCE_SEED_OFFSET,
                                      init_seed=seed + REFERENCE_SEED_OFFSET,
                                      n_particles=n_reference)
    reference = LawTrajectory.from_ensemble(run_particle_system(
        coeffs, n_reference, reference_noise, problem.initial, problem.mass))

    errors = []
    for n in n_values:
        interacting = run_particle_system(coeffs, n, noise.subset(n), problem.initial,
                                          problem.mass)
        limit = frozen_ensemble(coeffs, reference, noise.subset(n), n, problem.initial)
        gap = np.sum((interacting.states - limit.states) ** 2, axis=2)
        errors.append(float(np.mean(np.max(gap, axis=1))))
    return errors


def particle_coupling_error(problem: RateProblem, n_values: Sequence[int], n_paths: int,
                            seed: int = 0, n_reference: Optional[int] = None,
                            mapper: Mapper = map) -> CouplingResult:
    """Fit E sup_t |X^{i,N} - X^i|^2 against N; the expected slope is -1.

    Raises:
        ReferenceQualityError: n_reference < 8 * max(N).
    """
    needed = REFERENCE_FACTOR * max(n_values)
    n_reference = needed if n_reference is None else n_reference
    if n_reference < needed:
        raise ReferenceQualityError(
            f"reference run of {n_reference} particles is below "
            f"{REFERENCE_FACTOR} x max N = {needed}")
    cells: Iterable = mapper(
        lambda path: coupling_errors_on_path(problem, n_values, path, seed, n_reference),
        range(n_paths))
    errors = np.array(list(cells))
    return CouplingResult(fit=fit_rate(n_values, errors.mean(axis=0)),
                          per_path_errors=errors.tolist())
