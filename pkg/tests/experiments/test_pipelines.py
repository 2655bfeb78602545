import math
from pathlib import Path

import numpy as np
import pytest

from experiments.config import ExperimentConfig, Tolerances
from experiments.pipelines import halving_ratios, strong_order_verdict
from experiments.report import EXIT_STATISTICAL_FAIL
from experiments.runner import run

CONFIGS = Path(__file__).resolve().parents[2] / "configs"
STEPS = [64, 128, 256, 512]


def _gaps(order, scale=0.3):
    return [scale * m ** -order for m in STEPS]


def test_default_thresholds():
    tolerances = Tolerances()
    assert tolerances.weak_ratio_band == (1.4, 3.0)
    assert tolerances.strat_min_order == 0.5


def test_halving_ratios():
    assert halving_ratios([0.4, 0.2, 0.1]) == [2.0, 2.0]
    assert halving_ratios([0.3, 0.0]) == [math.inf]


@pytest.mark.parametrize("residuals, passed", [
    ([0.26, 0.2], False),
    ([0.3, 0.2], True),
    ([0.58, 0.2], True),
    ([0.62, 0.2], False),
])
def test_halving_ratio_band(residuals, passed):
    band = Tolerances().weak_ratio_band
    (ratio,) = halving_ratios(residuals)
    assert (band[0] <= ratio <= band[1]) is passed


def test_order_below_one_half_fails():
    tolerances = Tolerances()
    passed, detail, fit = strong_order_verdict(STEPS, _gaps(0.45), tolerances.strat_min_order,
                                               tolerances.exact_tol)
    assert not passed
    assert fit.slope == pytest.approx(-0.45)
    assert "0.450" in detail


@pytest.mark.parametrize("order", [0.5001, 1.0])
def test_order_at_least_one_half_passes(order):
    tolerances = Tolerances()
    passed, _, fit = strong_order_verdict(STEPS, _gaps(order), tolerances.strat_min_order,
                                          tolerances.exact_tol)
    assert passed
    assert -fit.slope == pytest.approx(order)


def test_coinciding_schemes_pass_without_a_fit():
    passed, _, fit = strong_order_verdict(STEPS, np.zeros(4), 0.5, 1e-12)
    assert passed and fit is None


def test_gap_vanishing_on_some_levels_only_fails():
    passed, detail, fit = strong_order_verdict(STEPS, [0.1, 0.05, 0.0, 0.02], 0.5, 1e-12)
    assert not passed and fit is None
    assert "some levels" in detail


def test_kernel_model_without_the_lions_term_fails(tmp_path):
    config = ExperimentConfig.from_file(str(CONFIGS / "stratcheck_kernel_ablation.json"))
    report = run(config, out=str(tmp_path))
    assert report.error_code is None
    checks = {check.name: check for check in report.checks}
    assert not checks["stratonovich_matches_ito"].passed
    assert "Lions correction dropped" in checks["stratonovich_matches_ito"].detail
    assert report.exit_status == EXIT_STATISTICAL_FAIL
