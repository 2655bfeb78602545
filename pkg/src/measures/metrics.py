"""Distances between empirical measures.

``bl_distance`` is the Kantorovich-Rubinstein (bounded-Lipschitz) distance
rho(mu, nu) = sup { <mu - nu, phi> : |phi| <= 1, Lip(phi) <= 1 }, maximised over
piecewise-linear phi on a uniform grid. ``w1_1d`` is the exact 1-D
Wasserstein-1 distance and serves as an upper bound for equal masses.
"""
import os
from typing import Optional

import numpy as np
from dotenv import load_dotenv
from scipy.stats import wasserstein_distance

from measures.empirical_measure import EmpiricalMeasure, merge_atoms
from utils.errors import MassMismatchError, UnsupportedDimensionError

load_dotenv(override=True)

W1_MASS_ATOL = 1e-9


def _default_grid_resolution() -> int:
    return int(os.getenv("MFSIM_BL_GRID", "256"))


def _bl_1d(points: np.ndarray, signed_weights: np.ndarray, grid_resolution: int) -> float:
    """sup of sum_i c_i phi(x_i) over grid-piecewise-linear phi in Lip_1.

    Node values are constrained by |phi_n| <= 1 and |phi_{n+1} - phi_n| <= h.
    Optimal vertices only take values in {+-1 + k h}, so a max-plus dynamic
    program over those levels along the chain is exact on the grid class.
    """
    lo = float(points.min()) - 1.0
    hi = float(points.max()) + 1.0
    h = (hi - lo) / grid_resolution
    n_nodes = grid_resolution + 1

    # atoms spread onto their two neighbouring nodes (phi is linear in between)
    cell = np.clip(np.floor((points - lo) / h).astype(int), 0, grid_resolution - 1)
    lam = np.clip((points - (lo + cell * h)) / h, 0.0, 1.0)
    node_mass = (np.bincount(cell, weights=signed_weights * (1.0 - lam), minlength=n_nodes)
                 + np.bincount(cell + 1, weights=signed_weights * lam, minlength=n_nodes))

    steps = np.arange(int(np.floor(2.0 / h + 1e-9)) + 1)
    levels = np.concatenate((-1.0 + steps * h, 1.0 - steps * h, [0.0]))
    levels = np.unique(np.round(np.clip(levels, -1.0, 1.0), 13))

    reach = h * (1.0 + 1e-9)
    window_lo = np.searchsorted(levels, levels - reach, side="left")
    window_hi = np.searchsorted(levels, levels + reach, side="right") - 1
    width = int(np.max(window_hi - window_lo)) + 1

    value = node_mass[0] * levels
    for n in range(1, n_nodes):
        best = value[window_lo]
        for k in range(1, width):
            best = np.maximum(best, value[np.minimum(window_lo + k, window_hi)])
        value = best + node_mass[n] * levels
    return max(float(np.max(value)), 0.0)


def bl_distance(mu: EmpiricalMeasure, nu: EmpiricalMeasure,
                grid_resolution: Optional[int] = None, mode: str = "exact",
                n_projections: int = 64, seed: int = 0) -> float:
    """Bounded-Lipschitz distance rho(mu, nu) from below.

    Args:
        mu, nu: Measures of the same dimension; masses may differ.
        grid_resolution: Number of grid cells spanning the joint support
            padded by 1 on each side (default from MFSIM_BL_GRID).
        mode: "exact" (d = 1 only) or "sliced" (max over random projections,
            any d).
        n_projections: Directions used by the sliced estimator.
        seed: Seed of the projection directions.

    Returns:
        A lower bound of rho(mu, nu) in [0, mass(mu) + mass(nu)].
    """
    if mu.dim != nu.dim:
        raise UnsupportedDimensionError(
            f"measures live in different dimensions: {mu.dim} != {nu.dim}")
    if grid_resolution is None:
        grid_resolution = _default_grid_resolution()
    if grid_resolution < 1:
        raise ValueError(f"grid_resolution must be positive, got {grid_resolution}")
    if mode not in ("exact", "sliced"):
        raise ValueError(f"unknown mode: {mode}")

    mu, nu = merge_atoms(mu), merge_atoms(nu)
    if (mu.size == nu.size and np.array_equal(mu.points, nu.points)
            and np.array_equal(mu.weights, nu.weights)):
        return 0.0
    signed = np.concatenate((mu.weights, -nu.weights))

    if mu.dim == 1:
        points = np.concatenate((mu.points[:, 0], nu.points[:, 0]))
        return _bl_1d(points, signed, grid_resolution)

    if mode == "exact":
        raise UnsupportedDimensionError(
            f"exact bounded-Lipschitz distance needs d = 1, got d = {mu.dim}; "
            f"use mode='sliced'")
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((n_projections, mu.dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    stacked = np.vstack((mu.points, nu.points))
    # phi(theta . x) stays in Lip_1 for unit theta, hence each slice is a lower bound
    return max(_bl_1d(stacked @ theta, signed, grid_resolution) for theta in directions)


def w1_1d(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    """Wasserstein-1 distance of two 1-D measures with equal mass, scaled by the mass."""
    if mu.dim != 1 or nu.dim != 1:
        raise UnsupportedDimensionError(
            f"w1_1d needs d = 1, got {mu.dim} and {nu.dim}")
    if abs(mu.mass - nu.mass) > W1_MASS_ATOL:
        raise MassMismatchError(
            f"masses differ: {mu.mass!r} vs {nu.mass!r}")
    return mu.mass * float(wasserstein_distance(
        mu.points[:, 0], nu.points[:, 0], mu.weights, nu.weights))
