"""Conditional Feynman-Kac representation of the dual backward equation

    f_s(x) = E[ phi(X_t^{s,x}) | W ],

where X^{s,x} solves the frozen SDE from x at time s on the fixed W path.
The second unknown of the backward equation is not computed.
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from coeffs.coefficient_set import CoefficientSet
from measures.empirical_measure import EmpiricalMeasure, integrate
from measures.test_functions import TestFunction
from mckv.law_trajectory import LawTrajectory
from simulate.noise import NoiseBundle
from simulate.particle_system import euler_step
from utils.errors import ConditioningMismatchError, InsufficientSamplesError


@dataclass(frozen=True, eq=False)
class DualEvaluation:
    """Estimates of f_s at query points on one W path.

    ``samples`` holds phi(X_t^{s,x}) per inner sample, shape (n_inner, q).
    """
    phi_name: str
    s: float
    t: float
    points: np.ndarray
    samples: np.ndarray
    seed: int
    path: int

    @property
    def values(self) -> np.ndarray:
        return self.samples.mean(axis=0)

    @property
    def standard_errors(self) -> np.ndarray:
        """Zero where every inner sample agrees (no idiosyncratic randomness)."""
        return self.samples.std(axis=0, ddof=1) / np.sqrt(self.samples.shape[0])

    @property
    def conditioning(self) -> Tuple[int, int]:
        return self.seed, self.path

    def pair(self, mu: EmpiricalMeasure) -> Tuple[float, float]:
        """<mu, f_s> and its standard error; ``mu`` must sit on the query points."""
        if mu.size != self.points.shape[0] or not np.array_equal(mu.points, self.points):
            raise ConditioningMismatchError(
                "pairing measure is not supported on the dual query points")
        per_sample = self.samples @ mu.weights
        if np.all(per_sample == per_sample[0]):
            return float(per_sample[0]), 0.0
        se = float(np.std(per_sample, ddof=1) / np.sqrt(len(per_sample)))
        return float(per_sample.mean()), se


def feynman_kac_f(coeffs: CoefficientSet, law: LawTrajectory, x: np.ndarray, s: float,
                  t: float, phi: TestFunction, noise: NoiseBundle,
                  n_inner: int) -> DualEvaluation:
    """Nested Monte-Carlo estimate of f_s(x) for every row of ``x``.

    Args:
        coeffs: Coefficients, frozen along ``law``
        law: Measure argument of the coefficients on the W path of ``noise``
        x: Query points (d,) or (q, d)
        s: Start time, a grid point
        t: Terminal time, a grid point with s <= t
        phi: Terminal function
        noise: Carries the W path; inner B samples come from its inner streams
        n_inner: Number of inner B samples

    Returns:
        DualEvaluation on the query points.

    Raises:
        InsufficientSamplesError: n_inner < 2.
        IncompatibleTrajectoryError: ``law`` is not conditioned on the W path of ``noise``.
    """
    return feynman_kac_bank(coeffs, law, x, s, t, [phi], noise, n_inner)[0]


def feynman_kac_bank(coeffs: CoefficientSet, law: LawTrajectory, x: np.ndarray, s: float,
                     t: float, bank: Sequence[TestFunction], noise: NoiseBundle,
                     n_inner: int) -> List[DualEvaluation]:
    """``feynman_kac_f`` for several terminal functions sharing one set of inner paths."""
    if n_inner < 2:
        raise InsufficientSamplesError(f"need at least 2 inner samples, got {n_inner}")
    law.check_noise(noise)
    grid = noise.grid
    start, end = grid.index_of(s), grid.index_of(t)
    if start > end:
        raise ValueError(f"start time {s} lies after terminal time {t}")

    points = np.atleast_2d(np.asarray(x, dtype=float))
    q, d = points.shape
    dt = grid.dt
    scale = np.sqrt(dt)
    generators = [noise.inner_stream(j) for j in range(n_inner)]
    state = np.tile(points, (n_inner, 1))
    for k in range(grid.n_steps):
        # every inner stream advances on every step, so the draws at step k
        # do not depend on s
        dB = scale * np.concatenate([g.standard_normal((q, d)) for g in generators])
        if start <= k < end:
            state = euler_step(coeffs, state, law.laws[k], noise.dW[k], dB, k * dt, dt)

    return [DualEvaluation(phi_name=phi.name, s=float(s), t=float(t), points=points,
                           samples=np.asarray(phi.value(state), dtype=float).reshape(n_inner, q),
                           seed=noise.seed, path=noise.path)
            for phi in bank]


@dataclass(frozen=True, eq=False)
class DualityGap:
    """Outer average over W paths of <mu_t, phi> - <mu_0, f_0>."""
    per_path: np.ndarray
    inner_variances: np.ndarray

    @property
    def gap(self) -> float:
        return float(self.per_path.mean())

    @property
    def outer_variance(self) -> float:
        if len(self.per_path) < 2:
            return 0.0
        return float(np.var(self.per_path, ddof=1))

    @property
    def standard_error(self) -> float:
        """Outer sample variance covers both levels once there are two paths;
        a single path falls back to the inner variance."""
        m = len(self.per_path)
        if m >= 2:
            return float(np.sqrt(self.outer_variance / m))
        return float(np.sqrt(self.inner_variances[0]))

    def to_dict(self) -> dict:
        return {"gap": self.gap, "standard_error": self.standard_error,
                "paths": int(len(self.per_path)),
                "mean_inner_variance": float(self.inner_variances.mean())}


def duality_gap(forward: Sequence[LawTrajectory], duals: Sequence[DualEvaluation],
                phi: TestFunction, t: float) -> Tuple[float, float]:
    """E <mu_t, phi> - E <mu_0, f_0> with its combined standard error."""
    result = duality_gap_details(forward, duals, phi, t)
    return result.gap, result.standard_error


def duality_gap_details(forward: Sequence[LawTrajectory], duals: Sequence[DualEvaluation],
                        phi: TestFunction, t: float) -> DualityGap:
    """Raises ConditioningMismatchError unless forward laws and duals share W paths."""
    if len(forward) != len(duals) or not forward:
        raise ConditioningMismatchError(
            f"{len(forward)} forward laws but {len(duals)} dual evaluations")
    per_path: List[float] = []
    inner: List[float] = []
    for law, dual in zip(forward, duals):
        if law.conditioning != dual.conditioning:
            raise ConditioningMismatchError(
                f"forward law on W path {law.conditioning}, dual on {dual.conditioning}")
        if dual.phi_name != phi.name or abs(dual.t - t) > 1e-12 or dual.s != 0.0:
            raise ConditioningMismatchError(
                f"dual evaluation is f_{dual.s} for {dual.phi_name} at t={dual.t}, "
                f"expected f_0 for {phi.name} at t={t}")
        paired, se = dual.pair(law.laws[0])
        per_path.append(integrate(law.at_time(t), phi) - paired)
        inner.append(se ** 2)
    return DualityGap(np.asarray(per_path), np.asarray(inner))
