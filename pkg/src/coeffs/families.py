"""Built-in coefficient families, selectable by name from experiment configs.

    constant                            a, b, sigma constant
    linear_local                        b = b0 + b1 x, sigma = s0 + s1 x (no measure dependence)
    mean_reversion_to_conditional_mean  b = beta (<mu, id>/r - x), sigma = sigma0 I, alpha = alpha0 I
    convolution_kernel_gaussian         Ito form of sigma(x, mu) o dW with
                                        sigma = s0 + s1 sin(x) + int kappa exp(-|x-y|^2 / 2l^2) mu(dy)
"""
import math
from dataclasses import replace
from typing import Any, Callable, Dict, Optional

import numpy as np

from coeffs.coefficient_set import CoefficientSet
from coeffs.stratonovich import KernelSigma, StratonovichSigma, ito_coefficients
from utils.errors import UnknownModelError, UnsupportedFamilyError


def _matrix(value: Any, rows: int, cols: int) -> np.ndarray:
    """Scalar -> value * eye(rows, cols); anything else reshaped to (rows, cols)."""
    array = np.asarray(value, dtype=float)
    if array.ndim == 0:
        return float(array) * np.eye(rows, cols)
    return array.reshape(rows, cols)


def _vector(value: Any, size: int) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if array.ndim == 0:
        return np.full(size, float(array))
    return array.reshape(size)


def _batched(matrix: np.ndarray) -> Callable:
    def evaluate(t, x, mu):
        return np.broadcast_to(matrix, (x.shape[0],) + matrix.shape).copy()
    return evaluate


def constant_family(params: Dict[str, Any], d: int, d1: int) -> CoefficientSet:
    sigma = _matrix(params.get("sigma", 0.0), d, d1)
    b = _vector(params.get("b", 0.0), d)
    alpha0 = float(params.get("alpha", 0.0))
    if params.get("a") is not None:
        a = _matrix(params["a"], d, d)
        alpha_fn = None
    else:
        a = 0.5 * (sigma @ sigma.T + alpha0 ** 2 * np.eye(d))
        alpha_fn = _batched(alpha0 * np.eye(d))
    bound = max(np.linalg.norm(a, 2), np.linalg.norm(sigma, 2), np.linalg.norm(b))
    return CoefficientSet(
        dim_x=d, dim_w=d1, a=_batched(a), b=_batched(b), sigma=_batched(sigma),
        lipschitz=0.0, bound=float(bound), alpha_fn=alpha_fn,
        name="constant", measure_free=True,
        metadata={"family": "constant", "b": b.tolist(), "sigma": sigma.tolist(),
                  "alpha": alpha0},
    )


def linear_local_family(params: Dict[str, Any], d: int, d1: int) -> CoefficientSet:
    """Componentwise linear coefficients; sigma needs d1 = d."""
    if d1 != d:
        raise UnsupportedFamilyError("linear_local needs d1 = d")
    b0, b1 = float(params.get("b0", 0.0)), float(params.get("b1", 0.0))
    s0, s1 = float(params.get("s0", 0.0)), float(params.get("s1", 1.0))
    alpha0 = float(params.get("alpha", 0.0))
    fixed_a = params.get("a")

    def sigma(t, x, mu):
        return (s0 + s1 * x)[:, :, None] * np.eye(d)[None]

    def b(t, x, mu):
        return b0 + b1 * x

    if fixed_a is not None:
        a = _batched(_matrix(fixed_a, d, d))
        alpha_fn = None
    else:
        def a(t, x, mu):
            s = sigma(t, x, mu)
            return 0.5 * (s @ np.swapaxes(s, -1, -2) + alpha0 ** 2 * np.eye(d))
        alpha_fn = _batched(alpha0 * np.eye(d))

    return CoefficientSet(
        dim_x=d, dim_w=d1, a=a, b=b, sigma=sigma,
        lipschitz=max(abs(b1), abs(s1), s1 * s1), alpha_fn=alpha_fn,
        name="linear_local", measure_free=True,
        metadata={"family": "linear_local", "b0": b0, "b1": b1, "s0": s0, "s1": s1,
                  "alpha": alpha0},
    )


def mean_reversion_family(params: Dict[str, Any], d: int, d1: int) -> CoefficientSet:
    """Mean-field Ornstein-Uhlenbeck model driven by the conditional mean."""
    if d1 != d:
        raise UnsupportedFamilyError(
            "mean_reversion_to_conditional_mean needs d1 = d")
    beta = float(params.get("beta", 1.0))
    sigma0 = float(params.get("sigma0", 1.0))
    alpha0 = float(params.get("alpha0", 0.5))
    eye = np.eye(d)

    def b(t, x, mu):
        return beta * (mu.mean()[None, :] - x)

    return CoefficientSet(
        dim_x=d, dim_w=d1,
        a=_batched(0.5 * (sigma0 ** 2 + alpha0 ** 2) * eye),
        b=b,
        sigma=_batched(sigma0 * eye),
        lipschitz=abs(beta),
        alpha_fn=_batched(alpha0 * eye),
        name="mean_reversion_to_conditional_mean",
        metadata={"family": "mean_reversion_to_conditional_mean", "beta": beta,
                  "sigma0": sigma0, "alpha0": alpha0},
    )


def gaussian_kernel_sigma(params: Dict[str, Any], d: int) -> StratonovichSigma:
    """sigma(x, mu) = diag(s0 + s1 sin x_i) + int kappa exp(-|x - y|^2 / 2 l^2) I mu(dy)."""
    s0 = float(params.get("local_constant", 0.0))
    s1 = float(params.get("local_sine", 0.0))
    kappa = float(params.get("kernel_amplitude", 0.0))
    width = float(params.get("kernel_width", 1.0))
    eye = np.eye(d)

    def local(x):
        return (s0 + s1 * np.sin(x))[:, :, None] * eye[None]

    def local_gradient(x):
        # d_j sigma^{ik} = delta_ik delta_ij s1 cos(x_i)
        out = np.zeros((x.shape[0], d, d, d))
        idx = np.arange(d)
        out[:, idx, idx, idx] = s1 * np.cos(x)
        return out

    kernel = None
    if kappa != 0.0:
        def scalar_kernel(x, y):
            diff = x[:, None, :] - y[None, :, :]
            return diff, kappa * np.exp(-np.sum(diff * diff, axis=-1) / (2 * width ** 2))

        def k(x, y):
            _, value = scalar_kernel(x, y)
            return value[:, :, None, None] * eye[None, None]

        def grad_y(x, y):
            diff, value = scalar_kernel(x, y)
            factor = value[:, :, None] * diff / width ** 2
            return factor[:, :, None, :, None] * eye[None, None, :, None, :]

        kernel = KernelSigma(kernel=k, grad_y=grad_y, translation_invariant=True)

    return StratonovichSigma(dim_x=d, dim_w=d, local=local,
                             local_gradient=local_gradient, kernel=kernel)


def convolution_kernel_family(params: Dict[str, Any], d: int, d1: int) -> CoefficientSet:
    if d1 != d:
        raise UnsupportedFamilyError("convolution_kernel_gaussian needs d1 = d")
    sigma = gaussian_kernel_sigma(params, d)
    coeffs = ito_coefficients(
        sigma,
        alpha0=float(params.get("alpha0", 0.0)),
        include_lions_term=not params.get("drop_lions_term", False),
        name="convolution_kernel_gaussian",
    )
    kappa = abs(float(params.get("kernel_amplitude", 0.0)))
    s = abs(float(params.get("local_constant", 0.0))) + abs(float(params.get("local_sine", 0.0)))
    return replace(
        coeffs,
        bound=s + kappa,
        lipschitz=abs(float(params.get("local_sine", 0.0))) + kernel_lipschitz(params),
        metadata={**coeffs.metadata, "family": "convolution_kernel_gaussian", **params},
    )


FAMILIES: Dict[str, Callable[[Dict[str, Any], int, int], CoefficientSet]] = {
    "constant": constant_family,
    "linear_local": linear_local_family,
    "mean_reversion_to_conditional_mean": mean_reversion_family,
    "convolution_kernel_gaussian": convolution_kernel_family,
}


def coefficient_family(name: str, params: Optional[Dict[str, Any]] = None,
                       d: int = 1, d1: Optional[int] = None) -> CoefficientSet:
    """Build a named coefficient family.

    Raises:
        UnknownModelError: ``name`` is not a registered family.
    """
    if name not in FAMILIES:
        raise UnknownModelError(
            f"unknown model '{name}'; known: {', '.join(sorted(FAMILIES))}")
    return FAMILIES[name](dict(params or {}), d, d if d1 is None else d1)


def stratonovich_sigma(name: str, params: Optional[Dict[str, Any]] = None,
                       d: int = 1) -> StratonovichSigma:
    """The sigma of a family as a Stratonovich kernel-plus-local diffusion.

    Only families without drift whose sigma is local or convolutional qualify.

    Raises:
        UnsupportedFamilyError: sigma lies outside the kernel-plus-local family.
    """
    params = dict(params or {})
    eye = np.eye(d)
    if name == "convolution_kernel_gaussian":
        return gaussian_kernel_sigma(params, d)
    if name == "constant":
        if np.any(_vector(params.get("b", 0.0), d) != 0.0):
            raise UnsupportedFamilyError("Stratonovich mode needs zero drift")
        sigma = _matrix(params.get("sigma", 0.0), d, d)
        return StratonovichSigma(
            dim_x=d, dim_w=d,
            local=lambda x: np.broadcast_to(sigma, (x.shape[0], d, d)).copy(),
            local_gradient=lambda x: np.zeros((x.shape[0], d, d, d)))
    if name == "linear_local":
        if float(params.get("b0", 0.0)) != 0.0 or float(params.get("b1", 0.0)) != 0.0:
            raise UnsupportedFamilyError("Stratonovich mode needs zero drift")
        s0, s1 = float(params.get("s0", 0.0)), float(params.get("s1", 1.0))

        def local_gradient(x):
            out = np.zeros((x.shape[0], d, d, d))
            idx = np.arange(d)
            out[:, idx, idx, idx] = s1
            return out

        return StratonovichSigma(
            dim_x=d, dim_w=d,
            local=lambda x: (s0 + s1 * x)[:, :, None] * eye[None],
            local_gradient=local_gradient)
    raise UnsupportedFamilyError(
        f"model '{name}' has no kernel-plus-local Stratonovich form")


def kernel_lipschitz(params: Dict[str, Any]) -> float:
    """Lipschitz constant of the Gaussian kernel profile kappa exp(-r^2 / 2 l^2)."""
    kappa = abs(float(params.get("kernel_amplitude", 0.0)))
    width = float(params.get("kernel_width", 1.0))
    return kappa / (width * math.sqrt(math.e))
