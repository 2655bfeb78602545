"""Time grids and reproducible Brownian increments.

Every random stream is a Philox generator keyed by (seed, role, path, index),
so a particle's increments never depend on how many other particles are
drawn, in which order, or on how many worker threads draw them.
"""
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from utils.errors import InvalidGridError

ROLE_W = 0
ROLE_B = 1
ROLE_INIT = 2
ROLE_INNER = 3

GRID_TOL = 1e-9


def stream(seed: int, role: int, path: int = 0, index: int = 0) -> np.random.Generator:
    """Counter-based generator for one (seed, role, path, index) stream."""
    key = np.random.SeedSequence(entropy=int(seed), spawn_key=(role, int(path), int(index)))
    return np.random.Generator(np.random.Philox(key))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 = t_0 < ... < t_M = horizon."""
    horizon: float
    n_steps: int

    def __post_init__(self):
        if not self.horizon > 0:
            raise InvalidGridError(f"horizon must be positive, got {self.horizon}")
        if self.n_steps < 1:
            raise InvalidGridError(f"need at least one step, got {self.n_steps}")

    @classmethod
    def from_step(cls, horizon: float, dt: float) -> "TimeGrid":
        """Grid with step ``dt``; horizon / dt must be an integer within 1e-9."""
        if not dt > 0:
            raise InvalidGridError(f"dt must be positive, got {dt}")
        if not horizon > 0:
            raise InvalidGridError(f"horizon must be positive, got {horizon}")
        ratio = horizon / dt
        steps = round(ratio)
        if steps < 1 or abs(ratio - steps) > GRID_TOL * max(1.0, ratio):
            raise InvalidGridError(
                f"horizon {horizon} is not an integer multiple of dt {dt}")
        return cls(horizon=float(horizon), n_steps=int(steps))

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    def index_of(self, t: float) -> int:
        """Grid index of time ``t``; ``t`` must be a grid point."""
        k = t / self.dt
        index = round(k)
        if index < 0 or index > self.n_steps or abs(k - index) > 1e-6:
            raise InvalidGridError(f"t={t} is not a point of {self}")
        return int(index)

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.horizon, self.n_steps * factor)


@dataclass(frozen=True, eq=False)
class NoiseBundle:
    """One common-noise path W and N idiosyncratic paths B^i on a grid.

    ``dW`` has shape (M, d1) and ``dB`` shape (N, M, d). ``seed`` keys the
    common path, ``particle_seed`` keys the idiosyncratic increments and the
    inner Monte-Carlo samples, ``init_seed`` keys the initial draws. ``path``
    numbers the W path inside an experiment.
    """
    grid: TimeGrid
    dW: np.ndarray
    dB: np.ndarray
    seed: int
    particle_seed: int
    init_seed: int
    path: int = 0

    @classmethod
    def generate(cls, grid: TimeGrid, n_particles: int, dim_x: int, dim_w: int,
                 seed: int, path: int = 0,
                 particle_seed: Optional[int] = None,
                 init_seed: Optional[int] = None) -> "NoiseBundle":
        """Draw the increments of path ``path``.

        Args:
            grid: Time grid
            n_particles: Number of idiosyncratic paths
            dim_x: Dimension d of each B^i
            dim_w: Dimension d1 of W
            seed: Seed of the common noise
            path: Index of the W path
            particle_seed: Seed of B and of inner samples; defaults to ``seed``
            init_seed: Seed of the initial draws; defaults to ``seed``

        Returns:
            NoiseBundle with read-only increment arrays.
        """
        if n_particles < 0:
            raise ValueError(f"n_particles must be non-negative, got {n_particles}")
        particle_seed = seed if particle_seed is None else particle_seed
        init_seed = seed if init_seed is None else init_seed
        scale = math.sqrt(grid.dt)
        dW = scale * stream(seed, ROLE_W, path).standard_normal((grid.n_steps, dim_w))
        dB = np.empty((n_particles, grid.n_steps, dim_x))
        for i in range(n_particles):
            dB[i] = scale * stream(particle_seed, ROLE_B, path, i).standard_normal(
                (grid.n_steps, dim_x))
        dW.setflags(write=False)
        dB.setflags(write=False)
        return cls(grid=grid, dW=dW, dB=dB, seed=int(seed),
                   particle_seed=int(particle_seed), init_seed=int(init_seed),
                   path=int(path))

    @property
    def n_particles(self) -> int:
        return self.dB.shape[0]

    @property
    def dim_x(self) -> int:
        return self.dB.shape[2]

    @property
    def dim_w(self) -> int:
        return self.dW.shape[1]

    @property
    def W(self) -> np.ndarray:
        """Common path at the grid points, shape (M + 1, d1), W_0 = 0."""
        return np.vstack((np.zeros((1, self.dim_w)), np.cumsum(self.dW, axis=0)))

    def subset(self, n: int) -> "NoiseBundle":
        """The first ``n`` particles; equal to generating with ``n`` directly."""
        if n > self.n_particles:
            raise ValueError(f"bundle holds {self.n_particles} particles, asked for {n}")
        return replace(self, dB=self.dB[:n])

    def resampled(self, particle_seed: Optional[int] = None, init_seed: Optional[int] = None,
                  n_particles: Optional[int] = None) -> "NoiseBundle":
        """Same W path with fresh idiosyncratic increments and/or initial draws."""
        n = self.n_particles if n_particles is None else n_particles
        particle_seed = self.particle_seed if particle_seed is None else particle_seed
        init_seed = self.init_seed if init_seed is None else init_seed
        if particle_seed == self.particle_seed and n <= self.n_particles:
            dB = self.dB[:n]
        else:
            dB = NoiseBundle.generate(self.grid, n, self.dim_x, self.dim_w, seed=self.seed,
                                      path=self.path, particle_seed=particle_seed).dB
        return replace(self, dB=dB, particle_seed=int(particle_seed), init_seed=int(init_seed))

    def coarsened(self, factor: int) -> "NoiseBundle":
        """Same Brownian paths on the grid with ``factor`` times fewer steps.

        Coarse increments are sums of consecutive fine ones, so refinement
        studies compare schemes on one and the same path.
        """
        if factor < 1 or self.grid.n_steps % factor:
            raise InvalidGridError(
                f"cannot coarsen {self.grid.n_steps} steps by a factor {factor}")
        m = self.grid.n_steps // factor
        dW = self.dW.reshape(m, factor, self.dim_w).sum(axis=1)
        dB = self.dB.reshape(self.n_particles, m, factor, self.dim_x).sum(axis=2)
        dW.setflags(write=False)
        dB.setflags(write=False)
        return replace(self, grid=TimeGrid(self.grid.horizon, m), dW=dW, dB=dB)

    def initial_normals(self, n: int, d: int) -> np.ndarray:
        """Row i is drawn from particle i's initial-condition stream."""
        out = np.empty((n, d))
        for i in range(n):
            out[i] = stream(self.init_seed, ROLE_INIT, self.path, i).standard_normal(d)
        return out

    def initial_uniforms(self, n: int, d: int) -> np.ndarray:
        out = np.empty((n, d))
        for i in range(n):
            out[i] = stream(self.init_seed, ROLE_INIT, self.path, i).random(d)
        return out

    def inner_stream(self, index: int) -> np.random.Generator:
        """Stream of the ``index``-th inner (nested Monte-Carlo) sample on this path."""
        return stream(self.particle_seed, ROLE_INNER, self.path, index)
