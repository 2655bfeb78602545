"""Uniqueness witness for the linear equation.

Two forward estimators of the same solution, sharing W paths, coefficients
and mu_0, must agree: E |<mu^1_t - mu^2_t, phi>| = E sign(Z) Z is the quantity
the sign-flipped test function controls, and it may only be as large as the
particle-level Monte-Carlo error.
"""
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel, Field

from measures.empirical_measure import EmpiricalMeasure, integrate
from measures.test_functions import TestFunction
from mckv.law_trajectory import LawTrajectory
from utils.errors import ConditioningMismatchError
from utils.logger.session_logger import SessionLogger

Z_THRESHOLD = 3.0
# round-off floor for exactly equal pairings summed in different orders
ABS_TOL = 1e-12


class WitnessEntry(BaseModel):
    phi: str
    t: float
    mean_abs_gap: float
    signed_gap: float
    signed_standard_error: float
    combined_standard_error: float
    passed: bool


class WitnessReport(BaseModel):
    threshold: float = Z_THRESHOLD
    paths: int
    entries: List[WitnessEntry] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    def to_dict(self) -> dict:
        data = self.model_dump()
        data["passed"] = self.passed
        return data


def pairing_variance(mu: EmpiricalMeasure, phi: TestFunction) -> float:
    """Variance of <mu, phi> as an estimate from iid atoms: r^2 Var_p(phi) sum p_i^2."""
    p = mu.weights / mu.mass
    values = np.asarray(phi.value(mu.points), dtype=float)
    centred = values - p @ values
    return float(mu.mass ** 2 * (p @ centred ** 2) * np.sum(p * p))


def uniqueness_witness(first: Sequence[LawTrajectory], second: Sequence[LawTrajectory],
                       bank: Sequence[TestFunction], times: Sequence[float],
                       threshold: float = Z_THRESHOLD) -> WitnessReport:
    """Report E |<mu^1_t - mu^2_t, phi>| per test function and time.

    Args:
        first: Laws of the first estimator, one per W path
        second: Laws of the second estimator on the same W paths
        bank: Test functions
        times: Grid times to compare at
        threshold: A cell passes when the mean absolute gap is at most
            ``threshold`` combined standard errors

    Returns:
        WitnessReport with one entry per (phi, t).

    Raises:
        ConditioningMismatchError: the estimators do not share W paths.
    """
    if len(first) != len(second) or not first:
        raise ConditioningMismatchError(
            f"estimators cover {len(first)} and {len(second)} W paths")
    for one, two in zip(first, second):
        if one.conditioning != two.conditioning or one.grid != two.grid:
            raise ConditioningMismatchError(
                f"W paths differ: {one.conditioning} vs {two.conditioning}")

    report = WitnessReport(threshold=threshold, paths=len(first))
    m = len(first)
    for phi in bank:
        for t in times:
            gaps = np.empty(m)
            variances = np.empty(m)
            for p, (one, two) in enumerate(zip(first, second)):
                mu, nu = one.at_time(t), two.at_time(t)
                gaps[p] = integrate(mu, phi) - integrate(nu, phi)
                variances[p] = pairing_variance(mu, phi) + pairing_variance(nu, phi)
            combined = float(np.sqrt(variances.mean()))
            signed_se = float(np.std(gaps, ddof=1) / np.sqrt(m)) if m > 1 else combined
            mean_abs = float(np.mean(np.abs(gaps)))
            report.entries.append(WitnessEntry(
                phi=phi.name, t=float(t), mean_abs_gap=mean_abs,
                signed_gap=float(gaps.mean()), signed_standard_error=signed_se,
                combined_standard_error=combined,
                passed=mean_abs <= threshold * combined + ABS_TOL))

    failed = [f"{e.phi}@{e.t:g}" for e in report.entries if not e.passed]
    SessionLogger.log_to_file(
        "execution_log",
        f"[WITNESS] {len(report.entries)} cells over {m} paths, failed: {failed or 'none'}")
    return report
