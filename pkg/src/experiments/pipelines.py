"""Experiment pipelines, one coroutine per kind.

A pipeline splits its work into independent W-path cells, runs them on the
PathPool and reduces the ordered results into statistics, acceptance checks
and raw tables. Nothing a pipeline computes depends on the number of workers.
"""
import math
from functools import partial
from typing import Awaitable, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from chaos.conditional import INTEGRANDS, chaos_gap_on_path, conditional_martingale_test
from chaos.coupling import particle_coupling_error
from chaos.rate import (REFERENCE_FACTOR, REFERENCE_SEED_OFFSET, RateFit,
                        convergence_rate, fit_rate)
from coeffs.assumptions import check_assumptions, probe_empirical_coefficients
from coeffs.families import stratonovich_sigma
from coeffs.stratonovich import ito_coefficients
from duality.feynman_kac import DualityGap, feynman_kac_bank
from duality.uniqueness import uniqueness_witness
from experiments.config import ExperimentConfig
from experiments.models import (build_coefficients, gaussian_model, gaussian_oracle,
                                rate_problem, shift_sigma)
from experiments.pool import PathPool
from experiments.report import PipelineResult
from fpe.weak_residual import residual_bank
from measures.empirical_measure import EmpiricalMeasure, integrate
from measures.metrics import w1_1d
from measures.test_functions import constant
from mckv.law_trajectory import LawTrajectory, path_metric
from mckv.oracles import gaussian_expectation, reference_pairing
from mckv.picard import frozen_ensemble, phi_map, picard_solve
from simulate.noise import NoiseBundle, TimeGrid
from simulate.particle_system import run_particle_system
from utils.errors import ConfigError
from utils.logger.session_logger import SessionLogger

Pipeline = Callable[[ExperimentConfig, TimeGrid, PathPool], Awaitable[PipelineResult]]


def _log(message: str, log_level: str = "info") -> None:
    SessionLogger.log_to_file("execution_log", message, log_level=log_level)


def _path_se(values: Sequence[float]) -> float:
    """Standard error over W paths; nan for a single path."""
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return float("nan")
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def _in_band(value: float, band) -> bool:
    return band[0] <= value <= band[1]


def halving_ratios(residuals: Sequence[float]) -> List[float]:
    """R(dt) / R(dt/2) for consecutive refinement levels; inf when R(dt/2) = 0."""
    return [coarse / fine if fine > 0 else math.inf
            for coarse, fine in zip(residuals[:-1], residuals[1:])]


def strong_order_verdict(steps: Sequence[int], gaps: Sequence[float], minimum: float,
                         exact_tol: float) -> Tuple[bool, str, Optional[RateFit]]:
    """Pass when the gap vanishes on every level or decays at order >= minimum in dt."""
    gaps = np.asarray(gaps, dtype=float)
    if np.all(gaps <= exact_tol):
        return True, f"schemes coincide to {exact_tol:g} on every level", None
    if np.any(gaps <= 0.0):
        return False, "gap vanishes on some levels but not on others", None
    fit = fit_rate(steps, gaps)
    order = -fit.slope
    return order >= minimum, f"gap order {order:.3f} >= {minimum}", fit


def _fine_grid(config: ExperimentConfig, grid: TimeGrid) -> TimeGrid:
    """Finest grid of a refinement study; level 0 is the configured dt."""
    return grid.refined(2 ** (config.refinements - 1))


async def simulate_pipeline(config: ExperimentConfig, grid: TimeGrid,
                            pool: PathPool) -> PipelineResult:
    """Plain particle runs with mass, translation and closed-form checks."""
    coeffs = build_coefficients(config)
    n, d, mass = config.n_particles, config.d, config.mass
    sigma0 = shift_sigma(config)
    oracle = gaussian_oracle(config) if sigma0 is not None else None
    atoms = config.initial.as_measure(mass)
    phi = config.primary_phi()
    indices = [grid.index_of(t) for t in config.report_times()]

    def cell(path: int) -> dict:
        noise = NoiseBundle.generate(grid, n, d, config.dim_w, seed=config.seed, path=path)
        ensemble = run_particle_system(coeffs, n, noise, config.initial, mass)
        mass_error = max(abs(ensemble.empirical_law(k).mass - mass)
                         for k in range(grid.n_steps + 1))
        translation = oracle_gap = oracle_se = float("nan")
        if sigma0 is not None:
            shifted = ensemble.states[:, :1, :] + sigma0 * noise.W[None, :, :]
            translation = float(np.max(np.abs(ensemble.states - shifted)))
            gaps = []
            for k in indices:
                law = ensemble.empirical_law(k)
                if oracle is not None:
                    target = reference_pairing(oracle(noise), phi, k, mass)
                elif atoms is not None:
                    target = integrate(EmpiricalMeasure(atoms.points + sigma0 * noise.W[k],
                                                        atoms.weights, mass=mass), phi)
                else:
                    continue
                gaps.append(abs(integrate(law, phi) - target))
            if gaps:
                oracle_gap = max(gaps)
                values = np.asarray(phi.value(ensemble.states[:, indices[-1], :]))
                oracle_se = float(mass * np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        rows = []
        for t, k in zip(config.report_times(), indices):
            law = ensemble.empirical_law(k)
            rows.append([path, t, float(noise.W[k, 0]), float(law.mean()[0]),
                         float(np.var(ensemble.states[:, k, 0])), law.mass,
                         integrate(law, phi)])
        return {"mass_error": mass_error, "translation": translation,
                "oracle_gap": oracle_gap, "oracle_se": oracle_se, "rows": rows,
                "steps": ensemble.particle_steps}

    cells = await pool.gather(cell, range(config.n_paths), desc="simulate")
    result = PipelineResult(particle_steps=sum(c["steps"] for c in cells))
    mass_error = max(c["mass_error"] for c in cells)
    result.stat("mass_error", mass_error, exact=True)
    result.check("mass_conserved", mass_error == 0.0, f"max |<L_t, 1> - r| = {mass_error:g}")
    if sigma0 is not None:
        translation = max(c["translation"] for c in cells)
        result.stat("translation_residual", translation, exact=True)
        result.check("translation_identity", translation < config.tolerances.exact_tol,
                     f"max |X_t - X_0 - sigma0 W_t| = {translation:.3e}")
        if not math.isnan(cells[0]["oracle_gap"]):
            gap = max(c["oracle_gap"] for c in cells)
            result.stat(f"shift_oracle_gap_{phi.name}", gap,
                        error=max(c["oracle_se"] for c in cells))
            # small clouds are judged by their sampling error
            bound = max(config.tolerances.shift_oracle_tol,
                        config.tolerances.z_threshold * max(c["oracle_se"] for c in cells))
            result.check("shift_oracle", gap <= bound, f"{gap:.4f} <= {bound:.4f}")
    result.table("simulate", ["path", "t", "w1", "mean_x1", "var_x1", "mass", phi.name],
                 [row for c in cells for row in c["rows"]])
    _log(f"[SIMULATE] {config.n_paths} paths x {n} particles, mass error {mass_error:g}")
    return result


def _moment_z(diffs: np.ndarray, single_se: float) -> float:
    """z-score of the mean of per-path differences."""
    se = _path_se(diffs)
    if math.isnan(se):
        se = single_se
    if se == 0.0:
        return 0.0 if float(np.mean(diffs)) == 0.0 else math.inf
    return float(np.mean(diffs) / se)


async def picard_pipeline(config: ExperimentConfig, grid: TimeGrid,
                          pool: PathPool) -> PipelineResult:
    """Picard iteration on every W path, checked against the Gaussian closed form
    where one exists, and against a second run from the same initial cloud with independent
    idiosyncratic noise."""
    coeffs = build_coefficients(config)
    n, d, mass = config.n_particles, config.d, config.mass
    tol = config.tolerances
    oracle = gaussian_oracle(config)
    model = gaussian_model(config)
    times = config.report_times()
    other_seed = config.seed + REFERENCE_SEED_OFFSET

    def cell(path: int) -> dict:
        noise = NoiseBundle.generate(grid, n, d, config.dim_w, seed=config.seed, path=path)
        law, diagnostics = picard_solve(coeffs, noise, n, config.initial, tol=tol.picard_tol,
                                        max_iter=tol.picard_max_iter, mass=mass)
        consistency = path_metric(phi_map(coeffs, law, noise, n, config.initial), law)
        other_noise = noise.resampled(particle_seed=other_seed)
        other, _ = picard_solve(coeffs, other_noise, n, config.initial, tol=tol.picard_tol,
                                max_iter=tol.picard_max_iter, mass=mass)
        moments = []
        reference = oracle(noise) if oracle is not None else None
        for t in times:
            k = grid.index_of(t)
            points = law.laws[k].points
            row = [path, t, float(points[:, 0].mean()), float(np.var(points[:, 0]))]
            if reference is not None:
                mean, var = reference.at_index(k)
                row += [float(mean[0]), var]
            moments.append(row)
        steps = n * grid.n_steps * (diagnostics.iterations + 1)
        return {"law": law, "other": other, "diagnostics": diagnostics,
                "consistency": consistency, "moments": moments, "steps": steps}

    cells = await pool.gather(cell, range(config.n_paths), desc="picard")
    result = PipelineResult(particle_steps=sum(c["steps"] for c in cells))

    converged = all(c["diagnostics"].converged for c in cells)
    iterations = [c["diagnostics"].iterations for c in cells]
    result.stat("iterations_max", max(iterations), exact=True)
    result.check("converged", converged,
                 f"tol {tol.picard_tol:g} within {tol.picard_max_iter} iterations")

    # the first application of Phi moves away from the constant guess
    late_ratios = [r for c in cells for r in c["diagnostics"].ratios[1:]]
    worst_ratio = max(late_ratios) if late_ratios else 0.0
    result.stat("contraction_ratio_max", worst_ratio, exact=True)
    result.check("contraction", worst_ratio <= tol.contraction_ratio,
                 f"successive metric ratios after iteration 2 <= {tol.contraction_ratio}")

    consistency = max(c["consistency"] for c in cells)
    result.stat("fixed_point_residual", consistency, exact=True)
    result.check("fixed_point", consistency < 2 * tol.picard_tol,
                 f"d(Phi(mu), mu) = {consistency:.3e} < {2 * tol.picard_tol:g}")

    if model is not None:
        alpha2, v0 = model["alpha0"] ** 2, config.initial.std ** 2
        for i, t in enumerate(times):
            rows = np.array([c["moments"][i] for c in cells])
            mean_diffs, var_diffs = rows[:, 2] - rows[:, 4], rows[:, 3] - rows[:, 5]
            mean_se = math.sqrt((v0 + alpha2 * t) / n)
            var_se = float(np.mean(rows[:, 5])) * math.sqrt(2.0 / max(n - 1, 1))
            z_mean = _moment_z(mean_diffs, mean_se)
            z_var = _moment_z(var_diffs, var_se)
            result.stat(f"oracle_mean_gap_t{t:g}", float(np.mean(mean_diffs)),
                        error=_path_se(mean_diffs) if len(cells) > 1 else mean_se)
            result.stat(f"oracle_var_gap_t{t:g}", float(np.mean(var_diffs)),
                        error=_path_se(var_diffs) if len(cells) > 1 else var_se)
            result.check(f"oracle_moments_t{t:g}",
                         abs(z_mean) <= tol.z_threshold and abs(z_var) <= tol.z_threshold,
                         f"z(mean) = {z_mean:.2f}, z(var) = {z_var:.2f}")

    witness = uniqueness_witness([c["law"] for c in cells], [c["other"] for c in cells],
                                 config.bank(), times, threshold=tol.z_threshold)
    for entry in witness.entries:
        result.stat(f"conditioning_gap_{entry.phi}_t{entry.t:g}", entry.mean_abs_gap,
                    error=entry.combined_standard_error)
    result.check("conditioning", witness.passed,
                 "laws from independent idiosyncratic noise agree on every W path")

    result.table("picard_iterations", ["path", "iteration", "metric"],
                 [[p, j + 1, m] for p, c in enumerate(cells)
                  for j, m in enumerate(c["diagnostics"].metrics)])
    columns = ["path", "t", "mean_x1", "var_x1"]
    if oracle is not None:
        columns += ["oracle_mean_x1", "oracle_var"]
    result.table("picard_moments", columns, [row for c in cells for row in c["moments"]])
    return result


async def weakcheck_pipeline(config: ExperimentConfig, grid: TimeGrid,
                             pool: PathPool) -> PipelineResult:
    """Weak residuals over dt, dt/2, ... on one Brownian path per W path."""
    coeffs = build_coefficients(config)
    n, d, mass = config.n_particles, config.d, config.mass
    fine = _fine_grid(config, grid)
    levels = config.refinements
    phi = config.primary_phi()
    bank = list(config.bank())
    if phi.name not in {f.name for f in bank}:
        bank.append(phi)
    one = constant(1.0, d)
    if one.name not in {f.name for f in bank}:
        bank.append(one)

    def cell(path: int) -> dict:
        fine_noise = NoiseBundle.generate(fine, n, d, config.dim_w, seed=config.seed,
                                          path=path)
        sups, steps = [], 0
        for level in range(levels):
            noise = fine_noise.coarsened(2 ** (levels - 1 - level))
            ensemble = run_particle_system(coeffs, n, noise, config.initial, mass)
            law = LawTrajectory.from_ensemble(ensemble)
            residuals = residual_bank(law, coeffs, bank, noise)
            sups.append({name: r.sup for name, r in residuals.items()})
            steps += ensemble.particle_steps
        return {"sups": sups, "steps": steps}

    cells = await pool.gather(cell, range(config.n_paths), desc="weakcheck")
    result = PipelineResult(particle_steps=sum(c["steps"] for c in cells))
    dts = [grid.dt / 2 ** level for level in range(levels)]

    rows = []
    means: Dict[str, List[float]] = {f.name: [] for f in bank}
    for level, dt in enumerate(dts):
        for f in bank:
            values = [c["sups"][level][f.name] for c in cells]
            means[f.name].append(float(np.mean(values)))
            rows.append([level, dt, f.name, means[f.name][-1], _path_se(values)])
            result.stat(f"residual_{f.name}_dt{dt:g}", means[f.name][-1],
                        error=_path_se(values))

    constant_residual = max(means[one.name])
    result.check("constant_residual_zero", constant_residual == 0.0,
                 f"sup |R[1]| = {constant_residual:g}")

    band = config.tolerances.weak_ratio_band
    primary = means[phi.name]
    for level, ratio in enumerate(halving_ratios(primary)):
        result.stat(f"ratio_{phi.name}_{level}", ratio, exact=True)
        result.check(f"halving_ratio_{level}", _in_band(ratio, band),
                     f"R(dt) / R(dt/2) = {ratio:.3f} in [{band[0]}, {band[1]}]")
    result.table("weak_residual", ["level", "dt", "phi", "sup_residual", "standard_error"],
                 rows)
    _log(f"[WEAKCHECK] {phi.name} residuals {['%.3e' % v for v in primary]}")
    return result


async def duality_pipeline(config: ExperimentConfig, grid: TimeGrid,
                           pool: PathPool) -> PipelineResult:
    """Forward pairing along a frozen law against the Feynman-Kac dual."""
    coeffs = build_coefficients(config)
    n, d, mass = config.n_particles, config.d, config.mass
    t = config.report_times()[-1]
    k = grid.index_of(t)
    bank = list(config.test_functions and config.bank() or [config.primary_phi()])
    one = constant(1.0, d)
    if one.name not in {f.name for f in bank}:
        bank.append(one)
    frozen_seed = config.seed + REFERENCE_SEED_OFFSET

    def cell(path: int) -> dict:
        noise = NoiseBundle.generate(grid, n, d, config.dim_w, seed=config.seed, path=path)
        frozen_noise = noise.resampled(particle_seed=frozen_seed, init_seed=frozen_seed)
        frozen = LawTrajectory.from_ensemble(
            run_particle_system(coeffs, n, frozen_noise, config.initial, mass))
        forward = LawTrajectory.from_ensemble(
            frozen_ensemble(coeffs, frozen, noise, n, config.initial))
        duals = feynman_kac_bank(coeffs, frozen, forward.laws[0].points, 0.0, t, bank,
                                 noise, config.n_inner)
        # only the two pairings per function are kept, not the trajectories
        pairings = []
        for f, dual in zip(bank, duals):
            paired, se = dual.pair(forward.laws[0])
            pairings.append((integrate(forward.laws[k], f), paired, se))
        steps = 2 * n * grid.n_steps + config.n_inner * n * k
        return {"pairings": pairings, "steps": steps}

    cells = await pool.gather(cell, range(config.n_paths), desc="duality")
    result = PipelineResult(particle_steps=sum(c["steps"] for c in cells))
    tol = config.tolerances
    rows = []
    for j, f in enumerate(bank):
        pairings = [c["pairings"][j] for c in cells]
        gap = DualityGap(per_path=np.array([fwd - dual for fwd, dual, _ in pairings]),
                         inner_variances=np.array([se ** 2 for _, _, se in pairings]))
        rows += [[p, f.name, fwd, dual, se] for p, (fwd, dual, se) in enumerate(pairings)]
        value, se = gap.gap, gap.standard_error
        if f.name == one.name:
            result.stat(f"duality_gap_{f.name}", value, exact=True)
            result.check(f"duality_{f.name}", abs(value) <= tol.exact_tol, f"gap {value:g}")
            continue
        result.stat(f"duality_gap_{f.name}", value, error=se)
        if se > 0.0:
            passed, detail = (abs(value) <= tol.z_threshold * se,
                              f"|{value:.3e}| <= {tol.z_threshold} x {se:.3e}")
        else:
            bound = tol.deterministic_gap_factor * grid.dt
            passed, detail = abs(value) <= bound, f"|{value:.3e}| <= {bound:g} (no sampling error)"
        result.check(f"duality_{f.name}", passed, detail)
    result.table("duality", ["path", "phi", "forward_pairing", "dual_pairing",
                             "inner_standard_error"], rows)
    return result


async def rate_pipeline(config: ExperimentConfig, grid: TimeGrid,
                        pool: PathPool) -> PipelineResult:
    """Conditional propagation-of-chaos rate in N."""
    problem = rate_problem(config)
    phi = config.primary_phi()
    t = config.report_times()[-1]
    rate = await pool.call(partial(
        convergence_rate, problem, config.n_values, config.n_paths, phi, t,
        seed=config.seed, n_reference=config.n_reference, mapper=pool.map))

    steps = config.n_paths * sum(config.n_values) * grid.n_steps
    if problem.oracle is None:
        n_reference = config.n_reference or REFERENCE_FACTOR * max(config.n_values)
        steps += config.n_paths * n_reference * grid.n_steps
    result = PipelineResult(particle_steps=steps)
    fit = rate.fit
    result.stat("slope", fit.slope, error=fit.slope_stderr)
    if rate.rho_fit is not None:
        result.stat("rho_slope", rate.rho_fit.slope, error=rate.rho_fit.slope_stderr)
    band = config.tolerances.rate_slope_band
    result.check("rate_slope", _in_band(fit.slope, band),
                 f"slope {fit.slope:.3f} in [{band[0]}, {band[1]}]")
    errors = np.array(rate.per_path_errors)
    result.table("rate", ["n", "mean_error", "standard_error"],
                 [[n, float(errors[:, i].mean()), _path_se(errors[:, i])]
                  for i, n in enumerate(config.n_values)])
    return result


async def chaos_pipeline(config: ExperimentConfig, grid: TimeGrid,
                         pool: PathPool) -> PipelineResult:
    """Conditional chaos gap in N, then the conditional martingale identity."""
    coeffs = build_coefficients(config)
    d, mass = config.d, config.mass
    tol = config.tolerances
    names = (config.test_functions + ["sin_x1", "gauss"])[:2]
    phi1, phi2 = config.bank_lookup(names[0]), config.bank_lookup(names[1])
    n_values = config.n_values
    t = config.report_times()[-1]
    k = grid.index_of(t)
    oracle = gaussian_oracle(config)
    n_reference = config.n_reference or REFERENCE_FACTOR * max(n_values)
    reference_seed = config.seed + REFERENCE_SEED_OFFSET

    def cell(path: int) -> dict:
        noise = NoiseBundle.generate(grid, max(n_values), d, config.dim_w,
                                     seed=config.seed, path=path)
        steps = sum(n_values) * grid.n_steps
        if oracle is not None:
            mean, var = oracle(noise).at_index(k)
            ref1 = gaussian_expectation(phi1, mean, var)
            ref2 = gaussian_expectation(phi2, mean, var)
        else:
            reference_noise = noise.resampled(particle_seed=reference_seed,
                                              init_seed=reference_seed,
                                              n_particles=n_reference)
            reference = run_particle_system(coeffs, n_reference, reference_noise,
                                            config.initial, mass).empirical_law(k)
            ref1, ref2 = integrate(reference, phi1) / mass, integrate(reference, phi2) / mass
            steps += n_reference * grid.n_steps
        gaps = [chaos_gap_on_path(
            run_particle_system(coeffs, n, noise, config.initial, mass).states[:, k, :],
            phi1, phi2, ref1, ref2) for n in n_values]
        return {"gaps": gaps, "steps": steps}

    if config.integrand not in INTEGRANDS:
        raise ConfigError(f"unknown integrand '{config.integrand}'; "
                          f"known: {', '.join(INTEGRANDS)}")
    integrand = INTEGRANDS[config.integrand]

    def repetition(r: int):
        noise = NoiseBundle.generate(grid, config.n_particles, d, config.dim_w,
                                     seed=config.seed + r)
        return conditional_martingale_test(integrand, noise, which=config.which)

    cells = await pool.gather(cell, range(config.n_paths), desc="chaos")
    tests = await pool.gather(repetition, range(config.repetitions), desc="martingale")
    result = PipelineResult(particle_steps=sum(c["steps"] for c in cells))

    gaps = np.array([c["gaps"] for c in cells])
    means = gaps.mean(axis=0)
    ses = [_path_se(gaps[:, i]) for i in range(len(n_values))]
    for n, value, se in zip(n_values, means, ses):
        result.stat(f"chaos_gap_n{n}", value, error=se)
    slack = [0.0 if math.isnan(a) or math.isnan(b) else math.hypot(a, b)
             for a, b in zip(ses, ses[1:])]
    monotone = all(later <= earlier + tol.z_threshold * s
                   for earlier, later, s in zip(means, means[1:], slack))
    result.check("chaos_gap_decreasing", monotone,
                 f"gaps {['%.3e' % v for v in means]} non-increasing within error bars")
    result.table("chaos_gap", ["n", "mean_gap", "standard_error"],
                 [[n, float(v), s] for n, v, s in zip(n_values, means, ses)])

    statistics = np.array([test.statistic for test in tests])
    if config.which == "B":
        fraction = float(np.mean(np.abs(statistics) <= tol.z_threshold))
        result.stat("martingale_pass_fraction", fraction, exact=True)
        result.check("martingale_B", fraction >= tol.martingale_pass_fraction,
                     f"{fraction:.3f} of {len(tests)} repetitions with |z| <= {tol.z_threshold}")
    else:
        worst = float(np.max(statistics))
        result.stat("martingale_discrepancy", worst, exact=True)
        result.check("martingale_W", worst <= tol.exact_tol,
                     f"max |LHS - RHS| / (1 + |RHS|) = {worst:.3e}")
    result.table("martingale", ["repetition", "which", "integrand", "estimate", "reference",
                                "standard_error", "statistic"],
                 [[r, test.which, test.integrand, test.estimate, test.reference,
                   test.standard_error, test.statistic] for r, test in enumerate(tests)])
    return result


async def stratcheck_pipeline(config: ExperimentConfig, grid: TimeGrid,
                              pool: PathPool) -> PipelineResult:
    """Heun on the Stratonovich form against Euler on the Ito form, over dt."""
    sigma = stratonovich_sigma(config.model, config.params, config.d)
    drop = bool(config.params.get("drop_lions_term", False))
    ito = ito_coefficients(sigma, include_lions_term=not drop, name=f"{config.model}_ito")
    n, d, mass = config.n_particles, config.d, config.mass
    fine = _fine_grid(config, grid)
    levels = config.refinements

    def cell(path: int) -> dict:
        fine_noise = NoiseBundle.generate(fine, n, d, sigma.dim_w, seed=config.seed,
                                          path=path)
        gaps = []
        for level in range(levels):
            noise = fine_noise.coarsened(2 ** (levels - 1 - level))
            heun = run_particle_system(sigma, n, noise, config.initial, mass, scheme="heun")
            euler = run_particle_system(ito, n, noise, config.initial, mass)
            last = noise.grid.n_steps
            gaps.append(w1_1d(heun.empirical_law(last), euler.empirical_law(last)))
        x0 = config.initial.sample(fine_noise, n)
        lions = float(np.mean(np.linalg.norm(
            sigma.lions_term(x0, EmpiricalMeasure.uniform(x0, mass)), axis=1)))
        return {"gaps": gaps, "lions": lions,
                "steps": 2 * n * grid.n_steps * (2 ** levels - 1)}

    cells = await pool.gather(cell, range(config.n_paths), desc="stratcheck")
    result = PipelineResult(particle_steps=sum(c["steps"] for c in cells))
    gaps = np.array([c["gaps"] for c in cells])
    means = gaps.mean(axis=0)
    steps = [grid.n_steps * 2 ** level for level in range(levels)]
    for m, value, j in zip(steps, means, range(levels)):
        result.stat(f"w1_gap_steps{m}", value, error=_path_se(gaps[:, j]))
    result.stat("lions_term_mean_norm", float(np.mean([c["lions"] for c in cells])), exact=True)
    result.table("stratcheck", ["level", "dt", "mean_w1_gap", "standard_error"],
                 [[j, grid.horizon / m, float(v), _path_se(gaps[:, j])]
                  for j, (m, v) in enumerate(zip(steps, means))])

    passed, detail, fit = strong_order_verdict(steps, means, config.tolerances.strat_min_order,
                                               config.tolerances.exact_tol)
    if fit is not None:
        result.stat("strong_order", -fit.slope, error=fit.slope_stderr)
    result.check("stratonovich_matches_ito", passed,
                 detail + (" (Lions correction dropped)" if drop else ""))
    return result


async def assumptions_pipeline(config: ExperimentConfig, grid: TimeGrid,
                               pool: PathPool) -> PipelineResult:
    """Audit the coefficient set and probe the empirical-measure error."""
    coeffs = build_coefficients(config)
    report = await pool.call(partial(check_assumptions, coeffs, probes=config.probes,
                                     seed=config.seed, horizon=grid.horizon,
                                     mass=config.mass))
    probe = await pool.call(partial(probe_empirical_coefficients, coeffs, config.initial.draw,
                                    config.n_values, seed=config.seed, mass=config.mass))
    result = PipelineResult()
    for name in ("lipschitz_x", "lipschitz_mu", "max_a_norm", "max_b_norm",
                 "max_sigma_norm", "max_asymmetry", "min_parabolicity_eigenvalue"):
        result.stat(name, getattr(report, name), exact=True)
    result.stat("k_squared_estimate", probe.k_squared_estimate, exact=True)
    result.check("assumptions", report.clean, "; ".join(report.violations) or "clean")
    result.table("assumption_violations", ["violation"], [[v] for v in report.violations])
    result.table("empirical_probe", ["n", "mean_square_error", "scaled_error"],
                 list(zip(probe.n_values, probe.mean_square_errors, probe.scaled_errors)))
    return result


async def coupling_pipeline(config: ExperimentConfig, grid: TimeGrid,
                            pool: PathPool) -> PipelineResult:
    """Synchronous coupling of interacting and limit particles."""
    problem = rate_problem(config)
    coupling = await pool.call(partial(
        particle_coupling_error, problem, config.n_values, config.n_paths,
        seed=config.seed, n_reference=config.n_reference, mapper=pool.map))
    n_reference = config.n_reference or REFERENCE_FACTOR * max(config.n_values)
    result = PipelineResult(particle_steps=config.n_paths * grid.n_steps
                            * (2 * sum(config.n_values) + n_reference))
    fit = coupling.fit
    result.stat("slope", fit.slope, error=fit.slope_stderr)
    band = config.tolerances.coupling_slope_band
    result.check("coupling_slope", _in_band(fit.slope, band),
                 f"slope {fit.slope:.3f} in [{band[0]}, {band[1]}]")
    errors = np.array(coupling.per_path_errors)
    result.table("coupling", ["n", "mean_sup_square_gap", "standard_error"],
                 [[n, float(errors[:, i].mean()), _path_se(errors[:, i])]
                  for i, n in enumerate(config.n_values)])
    return result


PIPELINES: Dict[str, Pipeline] = {
    "simulate": simulate_pipeline,
    "picard": picard_pipeline,
    "weakcheck": weakcheck_pipeline,
    "duality": duality_pipeline,
    "rate": rate_pipeline,
    "chaos": chaos_pipeline,
    "stratcheck": stratcheck_pipeline,
    "assumptions": assumptions_pipeline,
    "coupling": coupling_pipeline,
}


def get_pipeline(kind: str) -> Pipeline:
    pipeline: Optional[Pipeline] = PIPELINES.get(kind)
    if pipeline is None:
        raise ConfigError(f"unknown experiment kind '{kind}'; known: {', '.join(PIPELINES)}")
    return pipeline
