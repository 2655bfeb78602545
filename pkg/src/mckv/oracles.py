"""Closed-form conditional laws for the shift and mean-field Ornstein-Uhlenbeck models.

With b = beta (<mu, id> / r - x), sigma = sigma0 I, alpha = alpha0 I and a
Gaussian initial law N(m0, v0 I), the conditional law given W is Gaussian:

    dm = sigma0 dW,    dv = (-2 beta v + alpha0^2) dt.

The shift model is the case beta = alpha0 = 0.
"""
import math
import re
from dataclasses import dataclass

import numpy as np

from measures.test_functions import TestFunction
from simulate.noise import NoiseBundle
from utils.errors import ReferenceQualityError

_COORDINATE = re.compile(r"^x(\d+)$")
_PRODUCT = re.compile(r"^x(\d+)x(\d+)$")
_SINE = re.compile(r"^sin_x(\d+)$")


@dataclass(frozen=True)
class GaussianConditionalLaw:
    """Means (M + 1, d) and isotropic variances (M + 1,) on the grid of one W path."""
    means: np.ndarray
    variances: np.ndarray

    def at_index(self, k: int):
        return self.means[k], float(self.variances[k])


def gaussian_conditional_law(noise: NoiseBundle, m0: float, v0: float,
                             beta: float = 0.0, sigma0: float = 1.0,
                             alpha0: float = 0.0, discrete: bool = True) -> GaussianConditionalLaw:
    """Conditional mean and variance of the mean-field OU model on the W path of ``noise``.

    Args:
        noise: Carries the W path and grid
        m0: Initial mean (every coordinate)
        v0: Initial variance (every coordinate)
        beta: Mean-reversion speed
        sigma0: Common-noise amplitude
        alpha0: Idiosyncratic-noise amplitude
        discrete: Use the variance recursion of the Euler scheme,
            v_{k+1} = (1 - beta dt)^2 v_k + alpha0^2 dt, instead of the ODE solution.

    Returns:
        GaussianConditionalLaw on the noise grid.
    """
    if v0 < 0:
        raise ValueError(f"v0 must be non-negative, got {v0}")
    grid = noise.grid
    W = noise.W
    if W.shape[1] != noise.dim_x:
        raise ReferenceQualityError("the Gaussian oracle needs d1 = d")
    means = m0 + sigma0 * W
    dt = grid.dt
    if discrete:
        variances = np.empty(grid.n_steps + 1)
        variances[0] = v0
        contraction = (1.0 - beta * dt) ** 2
        for k in range(grid.n_steps):
            variances[k + 1] = contraction * variances[k] + alpha0 ** 2 * dt
    else:
        t = grid.times
        if beta == 0.0:
            variances = v0 + alpha0 ** 2 * t
        else:
            decay = np.exp(-2.0 * beta * t)
            variances = v0 * decay + alpha0 ** 2 / (2.0 * beta) * (1.0 - decay)
    return GaussianConditionalLaw(means=means, variances=variances)


def gaussian_expectation(phi: TestFunction, mean: np.ndarray, var: float) -> float:
    """E phi(X) for X ~ N(mean, var I) and phi from the test bank.

    Raises:
        ReferenceQualityError: ``phi`` has no closed form here.
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    name = phi.name
    if name == "one":
        return 1.0
    match = _COORDINATE.match(name)
    if match:
        return float(mean[int(match.group(1)) - 1])
    match = _PRODUCT.match(name)
    if match:
        i, j = int(match.group(1)) - 1, int(match.group(2)) - 1
        return float(mean[i] * mean[j] + (var if i == j else 0.0))
    match = _SINE.match(name)
    if match:
        return float(math.sin(mean[int(match.group(1)) - 1]) * math.exp(-0.5 * var))
    if name == "gauss":
        scale = 1.0 + 2.0 * var
        return float(np.prod(np.exp(-mean ** 2 / scale) / math.sqrt(scale)))
    raise ReferenceQualityError(f"no Gaussian closed form for test function '{name}'")


def reference_pairing(law: GaussianConditionalLaw, phi: TestFunction, k: int,
                      mass: float = 1.0) -> float:
    """<mu_{t_k}, phi> = r E[phi(X_{t_k}) | W] from the closed form."""
    mean, var = law.at_index(k)
    return mass * gaussian_expectation(phi, mean, var)
