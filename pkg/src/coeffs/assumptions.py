"""Randomised audits of the structural assumptions on (a, b, sigma).

The audits never raise; they report measured constants and the worst
violations found.
"""
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from coeffs.coefficient_set import CoefficientSet, _psd_scale, parabolicity_matrix
from measures.empirical_measure import EmpiricalMeasure
from measures.metrics import bl_distance
from utils.logger.session_logger import SessionLogger

# (rng, n) -> (n, d) samples
Sampler = Callable[[np.random.Generator, int], np.ndarray]

LIPSCHITZ_SLACK = 1.1
SYMMETRY_TOL = 1e-12


class AssumptionReport(BaseModel):
    """Outcome of ``check_assumptions``."""
    probes: int
    bound: float
    lipschitz: float
    max_a_norm: float = 0.0
    max_b_norm: float = 0.0
    max_sigma_norm: float = 0.0
    max_asymmetry: float = 0.0
    min_parabolicity_eigenvalue: float = float("inf")
    worst_parabolicity_point: List[float] = []
    lipschitz_x: float = 0.0
    lipschitz_mu: float = 0.0
    violations: List[str] = Field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        data = self.model_dump()
        data["clean"] = self.clean
        return data


def _probe_measure(rng: np.random.Generator, d: int, mass: float) -> EmpiricalMeasure:
    """Eight atoms in [-1/2, 1/2]^d with random weights."""
    points = rng.uniform(-0.5, 0.5, size=(8, d))
    weights = rng.dirichlet(np.ones(8)) * mass
    return EmpiricalMeasure(points, weights, mass=mass)


def _translation_distance(mu: EmpiricalMeasure, nu: EmpiricalMeasure, shift: float) -> float:
    """rho between mu and its translate by a vector of length ``shift``.

    Both supports lie in a ball of diameter < 2, so the linear test function
    along the shift is admissible and rho equals |shift| * mass.
    """
    if mu.dim == 1:
        return bl_distance(mu, nu)
    return abs(shift) * mu.mass


def _norm(values: np.ndarray) -> float:
    return float(np.linalg.norm(values))


def check_assumptions(coeffs: CoefficientSet, probes: int = 64, seed: int = 0,
                      horizon: float = 1.0, mass: float = 1.0,
                      psd_tolerance: Optional[float] = None) -> AssumptionReport:
    """Audit boundedness, symmetry of a, parabolicity and Lipschitz continuity.

    Args:
        coeffs: Coefficient set to audit
        probes: Number of random (t, x, mu) probes
        seed: Seed of the probe generator
        horizon: Probe times are drawn from [0, horizon]
        mass: Total mass of the probe measures
        psd_tolerance: Absolute tolerance on negative eigenvalues

    Returns:
        AssumptionReport listing measured constants and violations.
    """
    if probes < 1:
        raise ValueError(f"probes must be at least 1, got {probes}")
    rng = np.random.default_rng(seed)
    d = coeffs.dim_x
    report = AssumptionReport(probes=probes, bound=coeffs.bound, lipschitz=coeffs.lipschitz)
    fields = ("a", "b", "sigma")

    for _ in range(probes):
        t = float(rng.uniform(0.0, horizon))
        x = rng.normal(0.0, 1.5, size=(1, d))
        mu = _probe_measure(rng, d, mass)
        values = {name: getattr(coeffs, name)(t, x, mu)[0] for name in fields}

        report.max_a_norm = max(report.max_a_norm, float(np.linalg.norm(values["a"], 2)))
        report.max_b_norm = max(report.max_b_norm, _norm(values["b"]))
        report.max_sigma_norm = max(report.max_sigma_norm,
                                    float(np.linalg.norm(values["sigma"], 2)))
        report.max_asymmetry = max(report.max_asymmetry,
                                   float(np.max(np.abs(values["a"] - values["a"].T))))

        m = parabolicity_matrix(coeffs, t, x, mu)[0]
        floor = float(np.linalg.eigvalsh(m)[0])
        if floor < report.min_parabolicity_eigenvalue:
            report.min_parabolicity_eigenvalue = floor
            report.worst_parabolicity_point = [t] + x[0].tolist()

        direction = rng.standard_normal(d)
        direction /= np.linalg.norm(direction)
        shift = float(10.0 ** rng.uniform(-3.0, -1.0))

        x_moved = x + shift * direction
        for name in fields:
            delta = _norm(getattr(coeffs, name)(t, x_moved, mu)[0] - values[name])
            report.lipschitz_x = max(report.lipschitz_x, delta / shift)

        nu = EmpiricalMeasure(mu.points + shift * direction, mu.weights, mass=mu.mass)
        distance = _translation_distance(mu, nu, shift)
        if distance > 0:
            for name in fields:
                delta = _norm(getattr(coeffs, name)(t, x, nu)[0] - values[name])
                report.lipschitz_mu = max(report.lipschitz_mu, delta / distance)

    tolerance = psd_tolerance
    if tolerance is None:
        tolerance = _psd_scale() * (1.0 + max(report.max_a_norm, report.max_sigma_norm ** 2))

    largest = max(report.max_a_norm, report.max_b_norm, report.max_sigma_norm)
    if largest > report.bound * (1.0 + 1e-12):
        report.violations.append(
            f"boundedness: measured {largest:.6g} exceeds K_m = {report.bound:.6g}")
    if report.max_asymmetry > SYMMETRY_TOL:
        report.violations.append(
            f"symmetry: |a - a^T| reaches {report.max_asymmetry:.3g}")
    if report.min_parabolicity_eigenvalue < -tolerance:
        report.violations.append(
            f"parabolicity: eigenvalue {report.min_parabolicity_eigenvalue:.6g} of "
            f"2a - sigma sigma^T at (t, x) = {report.worst_parabolicity_point}")
    for label, measured in (("x", report.lipschitz_x), ("mu", report.lipschitz_mu)):
        if measured > LIPSCHITZ_SLACK * report.lipschitz:
            report.violations.append(
                f"lipschitz in {label}: measured quotient {measured:.6g} exceeds "
                f"{LIPSCHITZ_SLACK} * K = {LIPSCHITZ_SLACK * report.lipschitz:.6g}")

    SessionLogger.log_to_file(
        "execution_log",
        f"[ASSUMPTIONS] {coeffs.name}: {len(report.violations)} violation(s), "
        f"min eigenvalue {report.min_parabolicity_eigenvalue:.6g}, "
        f"Lipschitz x {report.lipschitz_x:.6g}, mu {report.lipschitz_mu:.6g}")
    return report


class EmpiricalCoefficientProbe(BaseModel):
    """N * E|c(x, L^N) - c(x, mu)|^2 summed over c in (b, sigma, alpha)."""
    n_values: List[int]
    mean_square_errors: List[float]
    scaled_errors: List[float]

    @property
    def k_squared_estimate(self) -> float:
        return max(self.scaled_errors)


def probe_empirical_coefficients(coeffs: CoefficientSet, sampler: Sampler,
                                 n_values: List[int], probes: int = 16,
                                 repetitions: int = 32, seed: int = 0,
                                 mass: float = 1.0,
                                 n_reference: int = 20000) -> EmpiricalCoefficientProbe:
    """Measure how fast coefficients evaluated at an empirical measure approach
    their value at the sampled law; a bounded N * error supports a K^2 / N bound.
    """
    rng = np.random.default_rng(seed)
    reference = EmpiricalMeasure.uniform(sampler(rng, n_reference), mass)
    x = sampler(rng, probes)
    exact: Dict[str, np.ndarray] = {
        "b": coeffs.b(0.0, x, reference),
        "sigma": coeffs.sigma(0.0, x, reference),
        "alpha": coeffs.idiosyncratic(0.0, x, reference),
    }

    errors = []
    for n in n_values:
        total = 0.0
        for _ in range(repetitions):
            empirical = EmpiricalMeasure.uniform(sampler(rng, n), mass)
            total += float(np.mean(
                np.sum((coeffs.b(0.0, x, empirical) - exact["b"]) ** 2, axis=1)
                + np.sum((coeffs.sigma(0.0, x, empirical) - exact["sigma"]) ** 2, axis=(1, 2))
                + np.sum((coeffs.idiosyncratic(0.0, x, empirical) - exact["alpha"]) ** 2,
                         axis=(1, 2))))
        errors.append(total / repetitions)

    return EmpiricalCoefficientProbe(
        n_values=list(n_values),
        mean_square_errors=errors,
        scaled_errors=[n * e for n, e in zip(n_values, errors)],
    )
