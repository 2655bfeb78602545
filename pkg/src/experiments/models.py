"""Model construction from an ExperimentConfig, with the closed forms each
built-in family admits."""
from functools import partial
from typing import Callable, Optional

import numpy as np

from chaos.rate import RateProblem
from coeffs.coefficient_set import CoefficientSet
from coeffs.families import coefficient_family
from experiments.config import ExperimentConfig
from mckv.oracles import GaussianConditionalLaw, gaussian_conditional_law
from simulate.noise import NoiseBundle

Oracle = Callable[[NoiseBundle], GaussianConditionalLaw]


def build_coefficients(config: ExperimentConfig) -> CoefficientSet:
    return coefficient_family(config.model, config.params, d=config.d, d1=config.dim_w)


def _scalar(value) -> Optional[float]:
    """Scalar parameters only; matrices have no isotropic closed form here."""
    array = np.asarray(value, dtype=float)
    return float(array) if array.ndim == 0 else None


def gaussian_model(config: ExperimentConfig) -> Optional[dict]:
    """(beta, sigma0, alpha0) when the conditional law is Gaussian in closed form.

    Covers the mean-field OU family and constant families with zero drift,
    isotropic sigma and alpha, started from a Gaussian law.
    """
    if config.initial.kind != "gaussian" or config.dim_w != config.d:
        return None
    params = config.params
    if config.model == "mean_reversion_to_conditional_mean":
        return {"beta": float(params.get("beta", 1.0)),
                "sigma0": float(params.get("sigma0", 1.0)),
                "alpha0": float(params.get("alpha0", 0.5))}
    if config.model == "constant" and params.get("a") is None:
        sigma0, alpha0 = _scalar(params.get("sigma", 0.0)), _scalar(params.get("alpha", 0.0))
        b = np.asarray(params.get("b", 0.0), dtype=float)
        if sigma0 is None or alpha0 is None or np.any(b != 0.0):
            return None
        return {"beta": 0.0, "sigma0": sigma0, "alpha0": alpha0}
    return None


def gaussian_oracle(config: ExperimentConfig) -> Optional[Oracle]:
    model = gaussian_model(config)
    if model is None:
        return None
    initial = config.initial
    return partial(gaussian_conditional_law, m0=initial.mean, v0=initial.std ** 2, **model)


def shift_sigma(config: ExperimentConfig) -> Optional[float]:
    """sigma0 of the shift model X_t = X_0 + sigma0 W_t, if the config is one."""
    params = config.params
    if config.dim_w != config.d:
        return None
    if config.model == "mean_reversion_to_conditional_mean":
        if float(params.get("alpha0", 0.5)) == 0.0 and float(params.get("beta", 1.0)) == 0.0:
            return float(params.get("sigma0", 1.0))
        return None
    if config.model == "constant" and params.get("a") is None:
        sigma0, alpha0 = _scalar(params.get("sigma", 0.0)), _scalar(params.get("alpha", 0.0))
        b = np.asarray(params.get("b", 0.0), dtype=float)
        if sigma0 is not None and alpha0 == 0.0 and not np.any(b != 0.0):
            return sigma0
    return None


def rate_problem(config: ExperimentConfig) -> RateProblem:
    return RateProblem(coeffs=build_coefficients(config), initial=config.initial,
                       grid=config.grid(), mass=config.mass,
                       oracle=gaussian_oracle(config))
