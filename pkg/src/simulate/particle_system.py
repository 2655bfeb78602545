"""Euler-Maruyama simulation of the interacting particle system

    dX^i = b(t, X^i, L^N) dt + sigma(t, X^i, L^N) dW + alpha(t, X^i, L^N) dB^i

with one common W and independent B^i, plus a Heun mode for the
Stratonovich conservation-law form dX^i = sigma(X^i, L^N) o dW.
"""
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from coeffs.coefficient_set import CoefficientSet
from coeffs.stratonovich import StratonovichSigma
from measures.empirical_measure import EmpiricalMeasure
from simulate.initial_law import InitialLaw
from simulate.noise import NoiseBundle

# (step index k, positions at t_k) -> measure argument used on [t_k, t_{k+1})
MeasureAt = Callable[[int, np.ndarray], EmpiricalMeasure]
Initial = Union[InitialLaw, np.ndarray]

SCHEMES = ("euler", "heun")


@dataclass(frozen=True, eq=False)
class ParticleEnsemble:
    """Trajectories of N particles conditioned on one W path.

    ``states`` has shape (N, M + 1, d).
    """
    states: np.ndarray
    noise: NoiseBundle
    mass: float = 1.0
    scheme: str = "euler"

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        self.states.setflags(write=False)

    @property
    def n_particles(self) -> int:
        return self.states.shape[0]

    @property
    def n_steps(self) -> int:
        return self.states.shape[1] - 1

    @property
    def dim(self) -> int:
        return self.states.shape[2]

    @property
    def particle_steps(self) -> int:
        return self.n_particles * self.n_steps

    def empirical_law(self, t_index: int) -> EmpiricalMeasure:
        return empirical_law(self, t_index)


def empirical_law(ensemble: ParticleEnsemble, t_index: int) -> EmpiricalMeasure:
    """r L^N at grid index ``t_index``: N atoms of weight r / N.

    Raises:
        IndexError: ``t_index`` outside 0..M.
    """
    if not 0 <= t_index <= ensemble.n_steps:
        raise IndexError(f"time index {t_index} outside 0..{ensemble.n_steps}")
    return EmpiricalMeasure.uniform(ensemble.states[:, t_index, :], ensemble.mass)


def euler_step(coeffs: CoefficientSet, state: np.ndarray, mu: EmpiricalMeasure,
               dW: np.ndarray, dB: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One Euler-Maruyama step X + b dt + sigma dW + alpha dB^i.

    Args:
        coeffs: Coefficient set
        state: Positions at t, shape (N, d)
        mu: Measure argument, read for every particle
        dW: Common increment (d1,), shared by all particles
        dB: Idiosyncratic increments (N, d)
        t: Current time
        dt: Step size

    Returns:
        Positions at t + dt.

    Raises:
        ParabolicityViolationError: alpha is not computable.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    drift = coeffs.b(t, state, mu)
    sigma = coeffs.sigma(t, state, mu)
    alpha = coeffs.idiosyncratic(t, state, mu)
    return (state + drift * dt
            + np.einsum("nik,k->ni", sigma, dW)
            + np.einsum("nij,nj->ni", alpha, dB))


def heun_step(sigma: StratonovichSigma, state: np.ndarray, mu: EmpiricalMeasure,
              dW: np.ndarray, mass: float) -> np.ndarray:
    """Stratonovich-Heun step for dX = sigma(X, mu) o dW.

    The predictor moves the whole cloud, so the measure argument of the
    corrector is the predicted empirical measure.
    """
    slope = np.einsum("nik,k->ni", sigma(state, mu), dW)
    predicted = state + slope
    mu_predicted = EmpiricalMeasure.uniform(predicted, mass)
    slope_predicted = np.einsum("nik,k->ni", sigma(predicted, mu_predicted), dW)
    return state + 0.5 * (slope + slope_predicted)


def initial_positions(initial: Initial, noise: NoiseBundle, n: int, d: int) -> np.ndarray:
    """X_0 for the first ``n`` particles of ``noise``."""
    if isinstance(initial, InitialLaw):
        return initial.sample(noise, n)
    x0 = np.asarray(initial, dtype=float)
    if x0.ndim == 1:
        x0 = x0[:, None]
    if x0.shape != (n, d):
        raise ValueError(f"initial positions have shape {x0.shape}, expected {(n, d)}")
    return x0.copy()


def integrate_paths(coeffs: CoefficientSet, x0: np.ndarray, noise: NoiseBundle,
                    measure_at: MeasureAt) -> np.ndarray:
    """Euler trajectories from ``x0`` with the measure argument of step k
    supplied by ``measure_at(k, X_k)``.

    Returns:
        States of shape (N, M + 1, d).
    """
    n, d = x0.shape
    grid = noise.grid
    dt = grid.dt
    states = np.empty((n, grid.n_steps + 1, d))
    states[:, 0] = x0
    x = x0
    for k in range(grid.n_steps):
        x = euler_step(coeffs, x, measure_at(k, x), noise.dW[k], noise.dB[:n, k], k * dt, dt)
        states[:, k + 1] = x
    return states


def run_particle_system(coeffs: Union[CoefficientSet, StratonovichSigma], n_particles: int,
                        noise: NoiseBundle, initial: Initial, mass: float = 1.0,
                        scheme: str = "euler") -> ParticleEnsemble:
    """Simulate the N-particle system on the W path of ``noise``.

    Args:
        coeffs: CoefficientSet for "euler", StratonovichSigma for "heun"
        n_particles: N; ``noise`` must hold at least N idiosyncratic paths
        noise: Noise bundle; its first N particles are used
        initial: Initial law, or explicit positions of shape (N, d)
        mass: Total mass r of every empirical law
        scheme: "euler" (Ito) or "heun" (Stratonovich, alpha = 0)

    Returns:
        ParticleEnsemble whose step-k measure argument was r L^N_{t_k}.
    """
    if n_particles < 1:
        raise ValueError(f"need at least one particle, got {n_particles}")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme '{scheme}'; known: {', '.join(SCHEMES)}")
    noise = noise.subset(n_particles)
    d = coeffs.dim_x
    if noise.dim_x != d or noise.dim_w != coeffs.dim_w:
        raise ValueError(
            f"noise dimensions (d={noise.dim_x}, d1={noise.dim_w}) do not match "
            f"coefficients (d={d}, d1={coeffs.dim_w})")
    x0 = initial_positions(initial, noise, n_particles, d)

    if scheme == "euler":
        if not isinstance(coeffs, CoefficientSet):
            raise ValueError("the euler scheme needs a CoefficientSet")
        states = integrate_paths(
            coeffs, x0, noise, lambda k, x: EmpiricalMeasure.uniform(x, mass))
        return ParticleEnsemble(states=states, noise=noise, mass=mass, scheme=scheme)

    if not isinstance(coeffs, StratonovichSigma):
        raise ValueError("the heun scheme needs a StratonovichSigma")
    states = np.empty((n_particles, noise.grid.n_steps + 1, d))
    states[:, 0] = x0
    x = x0
    for k in range(noise.grid.n_steps):
        x = heun_step(coeffs, x, EmpiricalMeasure.uniform(x, mass), noise.dW[k], mass)
        states[:, k + 1] = x
    return ParticleEnsemble(states=states, noise=noise, mass=mass, scheme=scheme)

