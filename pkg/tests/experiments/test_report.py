import pytest
from pydantic import ValidationError

from experiments.report import (EXIT_ERROR, EXIT_PASS, EXIT_STATISTICAL_FAIL, PipelineResult,
                                RunReport, Statistic)


def test_statistic_needs_an_error_bar_or_the_exact_tag():
    with pytest.raises(ValidationError):
        Statistic(name="gap", value=0.1)
    assert Statistic(name="gap", value=0.1, exact=True).error is None


def _report(result: PipelineResult, **kwargs) -> RunReport:
    return RunReport.from_result("simulate", "simulate_abc", {"kind": "simulate"}, result,
                                 kwargs.get("elapsed", 2.0), ["simulate.csv"])


def test_exit_status_follows_the_checks():
    result = PipelineResult(particle_steps=100)
    result.check("a", True)
    assert _report(result).exit_status == EXIT_PASS
    result.check("b", False, "too large")
    report = _report(result)
    assert not report.passed
    assert report.exit_status == EXIT_STATISTICAL_FAIL


def test_errors_exit_with_two():
    report = RunReport(kind="simulate", run_id="x", config={}, error_code="config.invalid_grid",
                       error_message="dt must be positive")
    assert report.exit_status == EXIT_ERROR
    assert not report.passed


def test_throughput_and_timing():
    result = PipelineResult(particle_steps=100)
    report = _report(result)
    assert report.throughput == pytest.approx(50.0)
    assert _report(result, elapsed=0.0).throughput == 0.0
    data = report.to_dict(include_timing=False)
    assert "wall_clock_seconds" not in data and "throughput" not in data
    assert data["exit_status"] == EXIT_PASS
    assert report.to_dict()["wall_clock_seconds"] == 2.0


def test_nan_error_bar_survives_the_dump():
    result = PipelineResult()
    result.stat("gap", 0.1, error=float("nan"))
    data = _report(result).to_dict()
    assert data["statistics"][0]["error"] != data["statistics"][0]["error"]


def test_tables_copy_their_rows():
    result = PipelineResult()
    result.table("rate", ("n", "error"), [(8, 0.1), (16, 0.05)])
    assert result.tables[0].columns == ["n", "error"]
    assert result.tables[0].rows == [[8, 0.1], [16, 0.05]]
