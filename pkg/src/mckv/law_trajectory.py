from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from measures.empirical_measure import EmpiricalMeasure, MASS_RTOL
from measures.metrics import bl_distance
from simulate.noise import NoiseBundle, TimeGrid
from simulate.particle_system import ParticleEnsemble
from utils.errors import IncompatibleTrajectoryError


@dataclass(frozen=True, eq=False)
class LawTrajectory:
    """Conditional law r L(X_t | W) on every grid point of one W path.

    ``seed`` and ``path`` identify the common-noise path the laws are
    conditioned on.
    """
    grid: TimeGrid
    laws: Tuple[EmpiricalMeasure, ...]
    seed: int
    path: int
    mass: float

    def __post_init__(self):
        object.__setattr__(self, "laws", tuple(self.laws))
        if len(self.laws) != self.grid.n_steps + 1:
            raise IncompatibleTrajectoryError(
                f"{len(self.laws)} laws for a grid of {self.grid.n_steps + 1} points")
        for k, law in enumerate(self.laws):
            if abs(law.mass - self.mass) > MASS_RTOL * self.mass:
                raise ValueError(f"law at index {k} has mass {law.mass!r}, expected {self.mass!r}")

    @classmethod
    def from_ensemble(cls, ensemble: ParticleEnsemble) -> "LawTrajectory":
        laws = [ensemble.empirical_law(k) for k in range(ensemble.n_steps + 1)]
        noise = ensemble.noise
        return cls(grid=noise.grid, laws=tuple(laws), seed=noise.seed,
                   path=noise.path, mass=ensemble.mass)

    @classmethod
    def constant(cls, law: EmpiricalMeasure, noise: NoiseBundle) -> "LawTrajectory":
        """The law ``law`` at every grid point of ``noise``."""
        return cls(grid=noise.grid, laws=(law,) * (noise.grid.n_steps + 1),
                   seed=noise.seed, path=noise.path, mass=law.mass)

    @property
    def conditioning(self) -> Tuple[int, int]:
        return self.seed, self.path

    @property
    def dim(self) -> int:
        return self.laws[0].dim

    def check_noise(self, noise: NoiseBundle) -> None:
        """Raises IncompatibleTrajectoryError unless ``noise`` carries the same grid and W path."""
        if noise.grid != self.grid:
            raise IncompatibleTrajectoryError(
                f"law grid {self.grid} differs from noise grid {noise.grid}")
        if (noise.seed, noise.path) != self.conditioning:
            raise IncompatibleTrajectoryError(
                f"law is conditioned on W path {self.conditioning}, "
                f"noise carries {(noise.seed, noise.path)}")

    def check_compatible(self, other: "LawTrajectory") -> None:
        if other.grid != self.grid:
            raise IncompatibleTrajectoryError(
                f"grids differ: {self.grid} vs {other.grid}")
        if other.conditioning != self.conditioning:
            raise IncompatibleTrajectoryError(
                f"W paths differ: {self.conditioning} vs {other.conditioning}")

    def at_time(self, t: float) -> EmpiricalMeasure:
        return self.laws[self.grid.index_of(t)]


def rho(mu: EmpiricalMeasure, nu: EmpiricalMeasure, grid_resolution=None) -> float:
    """bl_distance, sliced in dimension > 1."""
    mode = "exact" if mu.dim == 1 else "sliced"
    return bl_distance(mu, nu, grid_resolution=grid_resolution, mode=mode)


def path_metric(first: LawTrajectory, second: LawTrajectory, grid_resolution=None) -> float:
    """dt * sum_{k < M} rho(first_k, second_k), the per-path contraction metric."""
    first.check_compatible(second)
    dt = first.grid.dt
    return dt * float(sum(rho(first.laws[k], second.laws[k], grid_resolution)
                          for k in range(first.grid.n_steps)))


def expected_metric(pairs: Sequence[Tuple[LawTrajectory, LawTrajectory]],
                    grid_resolution=None) -> Tuple[float, float]:
    """Outer average over W paths of ``path_metric``.

    Returns:
        (mean, standard error); the error is 0 for a single path.
    """
    if not pairs:
        raise ValueError("expected_metric needs at least one pair")
    values = np.array([path_metric(a, b, grid_resolution) for a, b in pairs])
    se = float(np.std(values, ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
    return float(np.mean(values)), se
