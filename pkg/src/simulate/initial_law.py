"""Initial laws mu_0 / r selectable by name from experiment configs."""
from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from measures.empirical_measure import EmpiricalMeasure
from simulate.noise import NoiseBundle

KINDS = ("gaussian", "uniform", "atoms")


class InitialLaw(BaseModel):
    """Probability law of X_0.

    gaussian: independent coordinates N(mean, std^2)
    uniform:  independent coordinates U[low, high)
    atoms:    sum_j weights_j delta_{points_j} (weights normalised)
    """
    kind: str = "gaussian"
    dim: int = 1
    mean: float = 0.0
    std: float = 1.0
    low: float = -1.0
    high: float = 1.0
    points: list = Field(default_factory=list)
    weights: list = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self) -> "InitialLaw":
        if self.kind not in KINDS:
            raise ValueError(f"unknown initial law '{self.kind}'; known: {', '.join(KINDS)}")
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.kind == "gaussian" and self.std < 0:
            raise ValueError(f"std must be non-negative, got {self.std}")
        if self.kind == "uniform" and not self.high > self.low:
            raise ValueError(f"need low < high, got [{self.low}, {self.high})")
        if self.kind == "atoms":
            if not self.points:
                raise ValueError("atoms law needs at least one point")
            if self.weights and len(self.weights) != len(self.points):
                raise ValueError("atoms law: points and weights differ in length")
        return self

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]], dim: int) -> "InitialLaw":
        return cls(**{"dim": dim, **(data or {})})

    def _atoms(self) -> Tuple[np.ndarray, np.ndarray]:
        points = np.asarray(self.points, dtype=float).reshape(len(self.points), -1)
        if points.shape[1] != self.dim:
            points = np.broadcast_to(points[:, :1], (points.shape[0], self.dim))
        weights = np.asarray(self.weights or [1.0] * len(self.points), dtype=float)
        return points, weights / weights.sum()

    def sample(self, noise: NoiseBundle, n: int) -> np.ndarray:
        """n draws, row i from particle i's initial stream of ``noise``."""
        if self.kind == "gaussian":
            return self._transform(noise.initial_normals(n, self.dim))
        return self._transform(noise.initial_uniforms(n, self.dim))

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n draws from a plain generator."""
        if self.kind == "gaussian":
            return self._transform(rng.standard_normal((n, self.dim)))
        return self._transform(rng.random((n, self.dim)))

    def _transform(self, u: np.ndarray) -> np.ndarray:
        """Standard normals (gaussian) or uniforms (other kinds) to draws."""
        if self.kind == "gaussian":
            return self.mean + self.std * u
        if self.kind == "uniform":
            return self.low + (self.high - self.low) * u
        points, weights = self._atoms()
        index = np.searchsorted(np.cumsum(weights), u[:, 0], side="right")
        return points[np.minimum(index, len(weights) - 1)].copy()

    def moments(self) -> Tuple[np.ndarray, np.ndarray]:
        """Mean vector (d,) and covariance matrix (d, d)."""
        d = self.dim
        if self.kind == "gaussian":
            return np.full(d, self.mean), self.std ** 2 * np.eye(d)
        if self.kind == "uniform":
            return (np.full(d, 0.5 * (self.low + self.high)),
                    (self.high - self.low) ** 2 / 12.0 * np.eye(d))
        points, weights = self._atoms()
        mean = weights @ points
        centred = points - mean
        return mean, (weights[:, None] * centred).T @ centred

    def as_measure(self, mass: float = 1.0) -> Optional[EmpiricalMeasure]:
        """Exact r * mu_0 for atomic laws, None otherwise."""
        if self.kind != "atoms":
            return None
        points, weights = self._atoms()
        return EmpiricalMeasure(points, weights * mass, mass=mass)
