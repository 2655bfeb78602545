import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from dotenv import load_dotenv

from measures.empirical_measure import EmpiricalMeasure
from utils.errors import ParabolicityViolationError

load_dotenv(override=True)

# (t, x of shape (n, d), mu) -> batched coefficient values
CoefficientFn = Callable[[float, np.ndarray, EmpiricalMeasure], np.ndarray]


@dataclass(frozen=True)
class CoefficientSet:
    """The coefficient triple (a, b, sigma) of the Fokker-Planck equation.

    Evaluators are batched over points: ``a`` returns (n, d, d), ``b`` returns
    (n, d) and ``sigma`` returns (n, d, d1). ``alpha_fn`` optionally gives the
    idiosyncratic diffusion in closed form; when absent it is derived from
    2a - sigma sigma^T by ``alpha``.
    """
    dim_x: int
    dim_w: int
    a: CoefficientFn
    b: CoefficientFn
    sigma: CoefficientFn
    lipschitz: float = math.inf
    bound: float = math.inf
    alpha_fn: Optional[CoefficientFn] = None
    name: str = "custom"
    measure_free: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim_x < 1 or self.dim_w < 1:
            raise ValueError(
                f"dimensions must be positive, got d={self.dim_x}, d1={self.dim_w}")

    def idiosyncratic(self, t: float, x: np.ndarray, mu: EmpiricalMeasure) -> np.ndarray:
        """alpha(t, x, mu) for a batch of points."""
        if self.alpha_fn is not None:
            return self.alpha_fn(t, x, mu)
        return alpha(self, t, x, mu)


def _psd_scale() -> float:
    return float(os.getenv("MFSIM_PSD_TOLERANCE", "1e-10"))


def parabolicity_matrix(coeffs: CoefficientSet, t: float, x: np.ndarray,
                        mu: EmpiricalMeasure) -> np.ndarray:
    """Symmetrised 2a - sigma sigma^T, shape (n, d, d)."""
    a = coeffs.a(t, x, mu)
    s = coeffs.sigma(t, x, mu)
    m = 2.0 * a - s @ np.swapaxes(s, -1, -2)
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def alpha(coeffs: CoefficientSet, t: float, x: np.ndarray, mu: EmpiricalMeasure,
          psd_tolerance: Optional[float] = None) -> np.ndarray:
    """Symmetric PSD square root of 2a - sigma sigma^T.

    Args:
        coeffs: Coefficient set
        t: Time
        x: A single point (d,) or a batch (n, d)
        mu: Measure argument
        psd_tolerance: Eigenvalues in [-psd_tolerance, 0) are clipped to 0.
            Defaults to MFSIM_PSD_TOLERANCE * (1 + |2a - sigma sigma^T|),
            applied per point.

    Returns:
        (d, d) for a single point, (n, d, d) for a batch.

    Raises:
        ParabolicityViolationError: an eigenvalue lies below -psd_tolerance.
    """
    single = np.ndim(x) == 1
    points = np.atleast_2d(np.asarray(x, dtype=float))
    m = parabolicity_matrix(coeffs, t, points, mu)
    eigenvalues, eigenvectors = np.linalg.eigh(m)

    if psd_tolerance is None:
        scale = np.max(np.abs(eigenvalues), axis=-1)
        tolerance = _psd_scale() * (1.0 + scale)
    else:
        tolerance = np.full(points.shape[0], float(psd_tolerance))

    floor = eigenvalues[:, 0]
    violated = floor < -tolerance
    if np.any(violated):
        idx = int(np.argmax(violated))
        raise ParabolicityViolationError(t, points[idx].tolist(), float(floor[idx]))

    roots = np.sqrt(np.clip(eigenvalues, 0.0, None))
    result = (eigenvectors * roots[:, None, :]) @ np.swapaxes(eigenvectors, -1, -2)
    result = 0.5 * (result + np.swapaxes(result, -1, -2))
    return result[0] if single else result
