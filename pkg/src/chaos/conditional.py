"""Statistical tests of conditional chaos and of conditional stochastic integrals."""
import math
from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from measures.test_functions import TestFunction
from simulate.noise import NoiseBundle
from simulate.particle_system import ParticleEnsemble
from utils.errors import AssumptionViolationError, InsufficientSamplesError

# (t, W_t of shape (d1,), B_t of shape (n, d)) -> Y_t of shape (n,)
IntegrandFn = Callable[[float, np.ndarray, np.ndarray], np.ndarray]

WHICH = ("B", "W")


def pair_average(values1: np.ndarray, values2: np.ndarray) -> float:
    """Mean of phi1(X^i) phi2(X^j) over ordered pairs i != j."""
    n = values1.shape[0]
    if n < 2:
        raise InsufficientSamplesError(f"pair averages need N >= 2, got {n}")
    total = values1.sum() * values2.sum() - values1 @ values2
    return float(total / (n * (n - 1)))


def chaos_gap_on_path(positions: np.ndarray, phi1: TestFunction, phi2: TestFunction,
                      ref1: float, ref2: float) -> float:
    """|pair average of phi1 x phi2 - ref1 ref2| for one cloud of positions (N, d)."""
    joint = pair_average(np.asarray(phi1.value(positions), dtype=float),
                         np.asarray(phi2.value(positions), dtype=float))
    return abs(joint - ref1 * ref2)


def conditional_chaos_gap(ensembles: Sequence[ParticleEnsemble], phi1: TestFunction,
                          phi2: TestFunction, t_index: int,
                          references: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """E_W | E[phi1(X^1) phi2(X^2) | W] - E[phi1 | W] E[phi2 | W] |.

    Args:
        ensembles: One particle ensemble per W path
        phi1, phi2: Test functions
        t_index: Grid index
        references: Per path, the conditional expectations of phi1 and phi2
            under the normalised law mu_t / r

    Returns:
        (gap, standard error over W paths; 0 for a single path)
    """
    if len(ensembles) != len(references) or not ensembles:
        raise ValueError(
            f"{len(ensembles)} ensembles but {len(references)} reference pairs")
    gaps = np.array([
        chaos_gap_on_path(ensemble.states[:, t_index, :], phi1, phi2, ref1, ref2)
        for ensemble, (ref1, ref2) in zip(ensembles, references)])
    se = float(np.std(gaps, ddof=1) / math.sqrt(len(gaps))) if len(gaps) > 1 else 0.0
    return float(gaps.mean()), se


@dataclass(frozen=True)
class Integrand:
    """Bounded adapted integrand Y with a declared bound."""
    name: str
    fn: IntegrandFn
    bound: float


def constant_integrand(c: float) -> Integrand:
    return Integrand(name=f"const_{c:g}", bound=abs(c),
                     fn=lambda t, w, b: np.full(b.shape[0], float(c)))


INTEGRANDS: Dict[str, Integrand] = {
    "zero": constant_integrand(0.0),
    "one": constant_integrand(1.0),
    # W-measurable
    "sin_w": Integrand(name="sin_w", bound=1.0,
                       fn=lambda t, w, b: np.full(b.shape[0], math.sin(w[0]))),
    # depends on the particle's own B
    "cos_b": Integrand(name="cos_b", bound=1.0, fn=lambda t, w, b: np.cos(b[:, 0])),
    "tanh_wb": Integrand(name="tanh_wb", bound=1.0,
                         fn=lambda t, w, b: np.tanh(w[0] + b[:, 0])),
}


class MartingaleTest(BaseModel):
    which: str
    integrand: str
    estimate: float
    reference: float
    standard_error: float
    statistic: float


def _paths(noise: NoiseBundle) -> Tuple[np.ndarray, np.ndarray]:
    """W and B at the left end of every step: (M, d1) and (N, M, d)."""
    W = noise.W[:-1]
    B = np.concatenate((np.zeros((noise.n_particles, 1, noise.dim_x)),
                        np.cumsum(noise.dB, axis=1)[:, :-1]), axis=1)
    return W, B


def conditional_martingale_test(integrand: Integrand, noise: NoiseBundle,
                                which: str = "B") -> MartingaleTest:
    """Discrete check of the conditional stochastic-integral identities

        E[ int Y dB | W ] = 0,    E[ int Y dW | W ] = int E[Y | W] dW,

    with the N idiosyncratic paths of ``noise`` as B-resamples at fixed W.

    For ``which="B"`` the statistic is the z-score estimate / standard error
    (0 when both vanish). For ``which="W"`` it is the discrepancy
    |LHS - RHS| / (1 + |RHS|).

    Raises:
        AssumptionViolationError: |Y| exceeds its declared bound.
        InsufficientSamplesError: fewer than 2 B-resamples.
    """
    if which not in WHICH:
        raise ValueError(f"which must be one of {WHICH}, got {which}")
    if noise.n_particles < 2:
        raise InsufficientSamplesError(
            f"need at least 2 B-resamples, got {noise.n_particles}")
    grid = noise.grid
    W, B = _paths(noise)
    Y = np.empty((noise.n_particles, grid.n_steps))
    for k in range(grid.n_steps):
        Y[:, k] = integrand.fn(k * grid.dt, W[k], B[:, k])
    peak = float(np.max(np.abs(Y)))
    if peak > integrand.bound:
        raise AssumptionViolationError(
            f"integrand '{integrand.name}' reaches {peak:.6g} above its bound {integrand.bound:g}")

    if which == "B":
        sums = np.einsum("nk,nk->n", Y, noise.dB[:, :, 0])
        estimate = float(sums.mean())
        se = float(np.std(sums, ddof=1) / math.sqrt(len(sums)))
        if se == 0.0:
            statistic = 0.0 if estimate == 0.0 else math.copysign(math.inf, estimate)
        else:
            statistic = estimate / se
        return MartingaleTest(which=which, integrand=integrand.name, estimate=estimate,
                              reference=0.0, standard_error=se, statistic=statistic)

    dW = noise.dW[:, 0]
    lhs = float((Y @ dW).mean())
    rhs = float(Y.mean(axis=0) @ dW)
    return MartingaleTest(which=which, integrand=integrand.name, estimate=lhs,
                          reference=rhs, standard_error=0.0,
                          statistic=abs(lhs - rhs) / (1.0 + abs(rhs)))
