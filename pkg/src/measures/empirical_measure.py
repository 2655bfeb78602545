from dataclasses import dataclass
from typing import Optional

import numpy as np

from utils.errors import EvaluationError
from measures.test_functions import TestFunction

MASS_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Finite positive measure on R^d stored as a weighted point cloud.

    ``points`` has shape (n, d), ``weights`` shape (n,). ``mass`` defaults to
    the sum of the weights. Arrays are copied and made read-only.
    """
    points: np.ndarray
    weights: np.ndarray
    mass: Optional[float] = None

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        weights = np.array(self.weights, dtype=float).reshape(-1)

        if points.ndim != 2 or points.shape[0] < 1:
            raise ValueError("points must be a non-empty (n, d) array")
        if weights.shape[0] != points.shape[0]:
            raise ValueError(
                f"points and weights differ in length: "
                f"{points.shape[0]} != {weights.shape[0]}")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and non-negative")
        if not np.all(np.isfinite(points)):
            raise ValueError("points must be finite")

        total = float(np.sum(weights))
        mass = total if self.mass is None else float(self.mass)
        if not mass > 0:
            raise ValueError(f"mass must be positive, got {mass}")
        if abs(total - mass) > MASS_RTOL * mass:
            raise ValueError(
                f"weights sum to {total!r} but mass is {mass!r}")

        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "mass", mass)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @classmethod
    def uniform(cls, points: np.ndarray, mass: float = 1.0) -> "EmpiricalMeasure":
        """Equal-weight measure of total mass ``mass`` on the given points."""
        points = np.asarray(points, dtype=float)
        n = points.shape[0]
        return cls(points=points, weights=np.full(n, mass / n), mass=mass)

    @classmethod
    def dirac(cls, point, mass: float = 1.0) -> "EmpiricalMeasure":
        point = np.atleast_1d(np.asarray(point, dtype=float))
        return cls(points=point[None, :], weights=np.array([mass]), mass=mass)

    def scaled_to(self, mass: float) -> "EmpiricalMeasure":
        """Same support, weights rescaled to total mass ``mass``."""
        factor = mass / self.mass
        return EmpiricalMeasure(self.points, self.weights * factor, mass=mass)

    def mean(self) -> np.ndarray:
        """Barycentre <mu, id> / mass."""
        return self.weights @ self.points / self.mass

    def to_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
            "mass": self.mass,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EmpiricalMeasure":
        return cls(points=np.asarray(data["points"]),
                   weights=np.asarray(data["weights"]),
                   mass=data.get("mass"))


def merge_atoms(mu: EmpiricalMeasure) -> EmpiricalMeasure:
    """Canonical form of ``mu``: coincident atoms merged, sorted lexicographically."""
    unique_points, inverse = np.unique(mu.points, axis=0, return_inverse=True)
    merged = np.bincount(inverse.reshape(-1), weights=mu.weights,
                         minlength=unique_points.shape[0])
    return EmpiricalMeasure(unique_points, merged, mass=mu.mass)


def integrate(mu: EmpiricalMeasure, phi: TestFunction) -> float:
    """Pairing <mu, phi> = sum_i w_i phi(x_i)."""
    values = np.asarray(phi.value(mu.points), dtype=float)
    bad = ~np.isfinite(values)
    if np.any(bad):
        point = mu.points[np.argmax(bad)]
        raise EvaluationError(
            f"test function '{phi.name}' is not finite at {point.tolist()}",
            point=point.tolist())
    return float(mu.weights @ values)
