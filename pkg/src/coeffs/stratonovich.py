"""Conversion of a Stratonovich conservation-law diffusion into Ito form.

For dX = sigma(X, mu) o dW with sigma(x, mu) = sigma_loc(x) + int K(x, y) mu(dy)
the equivalent Ito coefficients are

    b^i  = 1/2 sigma^{jk} d_j sigma^{ik} + 1/2 G^i,
    G^i  = < mu, sigma^{jk}(., mu) (d_mu sigma(x, mu)(.))^{ijk} >,
    a^ij = 1/2 sigma^{ik} sigma^{jk},

where the Lions derivative of the convolution part is d_mu sigma(x, mu)(y) =
d_y K(x, y). Derivative arrays are indexed [i, j, k] = d_j of entry (i, k).
"""
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from coeffs.coefficient_set import CoefficientSet
from measures.empirical_measure import EmpiricalMeasure
from utils.errors import IncompleteDerivativeError

PointFn = Callable[[np.ndarray], np.ndarray]
PairFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class KernelSigma:
    """Interaction kernel K(x, y) with values in R^{d x d1}.

    ``kernel(x, y)`` maps (n, d), (m, d) to (n, m, d, d1); ``grad_y`` and
    ``grad_x`` map to (n, m, d, d, d1). A translation-invariant kernel
    K(x - y) may omit ``grad_x``, which is then -grad_y.
    """
    kernel: PairFn
    grad_y: Optional[PairFn] = None
    grad_x: Optional[PairFn] = None
    translation_invariant: bool = False

    def x_derivative(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.grad_x is not None:
            return self.grad_x(x, y)
        if self.translation_invariant and self.grad_y is not None:
            return -self.grad_y(x, y)
        raise IncompleteDerivativeError(
            "kernel has no x-derivative and is not translation invariant")

    def y_derivative(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.grad_y is None:
            raise IncompleteDerivativeError(
                "kernel part present but its y-derivative (Lions derivative) is missing")
        return self.grad_y(x, y)


@dataclass(frozen=True)
class StratonovichSigma:
    """Local part plus optional convolution-kernel part of sigma."""
    dim_x: int
    dim_w: int
    local: PointFn
    local_gradient: PointFn
    kernel: Optional[KernelSigma] = None

    def __call__(self, x: np.ndarray, mu: EmpiricalMeasure) -> np.ndarray:
        """sigma(x, mu), shape (n, d, d1)."""
        value = self.local(x)
        if self.kernel is not None:
            value = value + np.einsum("m,nmik->nik", mu.weights,
                                      self.kernel.kernel(x, mu.points))
        return value

    def spatial_gradient(self, x: np.ndarray, mu: EmpiricalMeasure) -> np.ndarray:
        """d_j sigma^{ik}(x, mu), shape (n, d, d, d1)."""
        value = self.local_gradient(x)
        if self.kernel is not None:
            value = value + np.einsum("m,nmijk->nijk", mu.weights,
                                      self.kernel.x_derivative(x, mu.points))
        return value

    def lions_term(self, x: np.ndarray, mu: EmpiricalMeasure) -> np.ndarray:
        """G(x, mu), shape (n, d); zero without kernel part."""
        if self.kernel is None:
            return np.zeros((x.shape[0], self.dim_x))
        sigma_at_atoms = self(mu.points, mu)
        return np.einsum("m,mjk,nmijk->ni", mu.weights, sigma_at_atoms,
                         self.kernel.y_derivative(x, mu.points))


def ito_from_stratonovich(sigma: StratonovichSigma, t: float, x: np.ndarray,
                          mu: EmpiricalMeasure,
                          include_lions_term: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Ito drift and diffusion of the Stratonovich equation dX = sigma(X, mu) o dW.

    Args:
        sigma: Stratonovich diffusion (local part and optional kernel part)
        t: Time; the conversion is time-homogeneous and ignores it
        x: Points, (d,) or (n, d)
        mu: Measure argument
        include_lions_term: False drops G (negative-control ablation)

    Returns:
        (b, a) with shapes (n, d) and (n, d, d), or (d,) and (d, d) for a
        single point.
    """
    single = np.ndim(x) == 1
    points = np.atleast_2d(np.asarray(x, dtype=float))

    s = sigma(points, mu)
    ds = sigma.spatial_gradient(points, mu)
    drift = 0.5 * np.einsum("njk,nijk->ni", s, ds)
    if include_lions_term:
        drift = drift + 0.5 * sigma.lions_term(points, mu)
    diffusion = 0.5 * s @ np.swapaxes(s, -1, -2)

    if single:
        return drift[0], diffusion[0]
    return drift, diffusion


def ito_coefficients(sigma: StratonovichSigma, alpha0: float = 0.0,
                     include_lions_term: bool = True,
                     name: str = "stratonovich") -> CoefficientSet:
    """CoefficientSet of the Ito form, with optional extra isotropic noise alpha0."""
    d = sigma.dim_x
    extra = 0.5 * alpha0 ** 2 * np.eye(d)

    def b(t, x, mu):
        return ito_from_stratonovich(sigma, t, x, mu, include_lions_term)[0]

    def a(t, x, mu):
        s = sigma(x, mu)
        return 0.5 * s @ np.swapaxes(s, -1, -2) + extra

    def alpha_fn(t, x, mu):
        return np.broadcast_to(alpha0 * np.eye(d), (x.shape[0], d, d)).copy()

    return CoefficientSet(
        dim_x=d, dim_w=sigma.dim_w, a=a, b=b,
        sigma=lambda t, x, mu: sigma(x, mu),
        alpha_fn=alpha_fn, name=name,
        measure_free=sigma.kernel is None,
        metadata={"include_lions_term": include_lions_term, "alpha0": alpha0},
    )
