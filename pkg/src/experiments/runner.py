"""Run one experiment: validate, dispatch to its pipeline, write tables and report."""
import asyncio
import hashlib
import json
import logging
import os
import time
from typing import Optional

from dotenv import load_dotenv

from experiments.config import ExperimentConfig
from experiments.pipelines import get_pipeline
from experiments.pool import PathPool
from experiments.report import RunReport
from utils.errors import MfsimError
from utils.logger.evaluation_logger import EvaluationLogger
from utils.logger.session_logger import SessionLogger, setup_logger

load_dotenv(override=True)

RUNTIME_ERROR_CODE = "runtime.failure"


def resolve_threads(threads: Optional[int], config: Optional[ExperimentConfig] = None) -> int:
    """--threads, then the config, then MFSIM_THREADS, then 1."""
    if threads is None and config is not None:
        threads = config.threads
    if threads is None:
        threads = int(os.getenv("MFSIM_THREADS", "1"))
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    return threads


def run_id_for(config: ExperimentConfig) -> str:
    """Stable identifier: kind plus a digest of everything that affects results."""
    echo = config.echo()
    echo.pop("threads", None)
    echo.pop("output", None)
    digest = hashlib.sha256(json.dumps(echo, sort_keys=True).encode("utf-8")).hexdigest()
    return f"{config.kind}_{digest[:12]}"


async def run_async(config: ExperimentConfig, threads: Optional[int] = None,
                    out: Optional[str] = None, progress: bool = False) -> RunReport:
    """Run ``config`` and write its report and raw tables.

    Args:
        config: Validated experiment configuration
        threads: Worker count; falls back to the config, then MFSIM_THREADS
        out: Output root; falls back to the config, then DATA_DIR
        progress: Show a progress bar over W paths

    Returns:
        RunReport. Toolkit errors are caught and reported with their code
        and exit status 2.
    """
    run_id = run_id_for(config)
    setup_logger(run_id, config.kind, log_level=logging.INFO,
                 console_output_files=["execution_log"])
    start = time.perf_counter()
    try:
        grid = config.check()
        pipeline = get_pipeline(config.kind)
        SessionLogger.log_to_file(
            "execution_log", f"[RUN] {run_id}: {config.kind} with model {config.model}")
        with PathPool(resolve_threads(threads, config), progress=progress) as pool:
            result = await pipeline(config, grid, pool)

        evaluation = EvaluationLogger.setup_logger(run_id, out or config.output)
        for table in result.tables:
            evaluation.log_table(table.name, table.columns, table.rows)
        report = RunReport.from_result(config.kind, run_id, config.echo(), result,
                                       time.perf_counter() - start,
                                       [f"{table.name}.csv" for table in result.tables])
        # timing lives in its own file so report.json is reproducible
        evaluation.log_report(report.to_dict(include_timing=False))
        evaluation.log_report({"wall_clock_seconds": report.wall_clock_seconds,
                               "throughput": report.throughput,
                               "particle_steps": report.particle_steps}, name="timing")
        for check in report.checks:
            SessionLogger.log_to_file(
                "execution_log",
                f"[CHECK] {check.name}: {'pass' if check.passed else 'FAIL'} {check.detail}",
                log_level="info" if check.passed else "warning")
        return report
    except MfsimError as e:
        SessionLogger.log_to_file("execution_log", f"[RUN] {run_id} failed: {e}",
                                  log_level="error")
        return RunReport(kind=config.kind, run_id=run_id, config=config.echo(),
                         wall_clock_seconds=time.perf_counter() - start,
                         error_code=e.code, error_message=e.message)
    except (ValueError, OSError) as e:
        SessionLogger.log_to_file("execution_log", f"[RUN] {run_id} failed: {e}",
                                  log_level="error")
        return RunReport(kind=config.kind, run_id=run_id, config=config.echo(),
                         wall_clock_seconds=time.perf_counter() - start,
                         error_code=RUNTIME_ERROR_CODE, error_message=str(e))
    finally:
        SessionLogger.close()


def run(config: ExperimentConfig, threads: Optional[int] = None,
        out: Optional[str] = None, progress: bool = False) -> RunReport:
    """Blocking wrapper of ``run_async``."""
    return asyncio.run(run_async(config, threads=threads, out=out, progress=progress))
