"""Pathwise residual of the weak (integral) form of the Fokker-Planck equation

    <mu_t, phi> = <mu_0, phi> + int_0^t <mu_s, a:D^2 phi + b.D phi> ds
                               + int_0^t <mu_s, sigma^T D phi> dW_s

with left-point quadrature for both integrals.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, Optional

import numpy as np

from coeffs.coefficient_set import CoefficientSet
from measures.empirical_measure import EmpiricalMeasure, integrate
from measures.test_functions import TestFunction
from mckv.law_trajectory import LawTrajectory
from simulate.noise import NoiseBundle


@dataclass(frozen=True, eq=False)
class WeakResidual:
    """R(t_k) for one test function; R(t_0) = 0."""
    phi_name: str
    times: np.ndarray
    values: np.ndarray

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def to_dict(self) -> dict:
        return {"phi": self.phi_name, "sup": self.sup,
                "times": self.times.tolist(), "values": self.values.tolist()}


def _brackets(coeffs: CoefficientSet, phi: TestFunction, t: float,
              mu: EmpiricalMeasure, argument: EmpiricalMeasure):
    """(<mu, a:D^2 phi + b.D phi>, <mu, sigma^T D phi>) with coefficients at ``argument``."""
    x = mu.points
    grad = phi.gradient(x)
    hess = phi.hessian(x)
    generator = (np.einsum("nij,nij->n", coeffs.a(t, x, argument), hess)
                 + np.einsum("ni,ni->n", coeffs.b(t, x, argument), grad))
    transport = np.einsum("nik,ni->nk", coeffs.sigma(t, x, argument), grad)
    return float(mu.weights @ generator), mu.weights @ transport


def weak_residual(law: LawTrajectory, coeffs: CoefficientSet, phi: TestFunction,
                  noise: NoiseBundle, frozen_law: Optional[LawTrajectory] = None) -> WeakResidual:
    """Residual of the weak form along ``law`` on the W path of ``noise``.

    Args:
        law: Estimated law trajectory
        coeffs: Coefficient set
        phi: Test function with gradient and hessian
        noise: Carries the dW increments of the path ``law`` is conditioned on
        frozen_law: Measure argument of the coefficients for the linear
            equation; defaults to ``law`` itself (nonlinear equation)

    Returns:
        WeakResidual with R(t_k), k = 0..M.

    Raises:
        IncompatibleTrajectoryError: grids or W paths differ.
    """
    law.check_noise(noise)
    argument = law if frozen_law is None else frozen_law
    if frozen_law is not None:
        law.check_compatible(frozen_law)

    grid = noise.grid
    dt = grid.dt
    pairings = np.array([integrate(mu, phi) for mu in law.laws])
    increments = np.empty(grid.n_steps)
    for k in range(grid.n_steps):
        drift, transport = _brackets(coeffs, phi, k * dt, law.laws[k], argument.laws[k])
        increments[k] = drift * dt + float(transport @ noise.dW[k])

    values = np.empty(grid.n_steps + 1)
    values[0] = 0.0
    values[1:] = (pairings[1:] - pairings[0]) - np.cumsum(increments)
    return WeakResidual(phi_name=phi.name, times=grid.times, values=values)


def residual_bank(law: LawTrajectory, coeffs: CoefficientSet, bank: Iterable[TestFunction],
                  noise: NoiseBundle,
                  frozen_law: Optional[LawTrajectory] = None) -> Dict[str, WeakResidual]:
    return {phi.name: weak_residual(law, coeffs, phi, noise, frozen_law) for phi in bank}
