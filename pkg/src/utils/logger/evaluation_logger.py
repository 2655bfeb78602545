from pathlib import Path
import csv
import json
import math
import os
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv
import numpy as np

from utils.errors import OutputError

load_dotenv(override=True)


def _cell(value: Any) -> str:
    """CSV cell text; floats keep every digit so identical runs give identical files."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if value is None:
        return ""
    return str(value)


class EvaluationLogger:
    """Writer of the raw result tables and the report of one run.

    Tables are CSV files under the output directory, one header row and one
    row per experiment cell. No timestamps are written.
    """

    _current_logger = None

    def __init__(self, run_id: str, out_dir: Optional[str] = None):
        """Initialize evaluation logger.

        Args:
            run_id: Identifier of the run, used as the sub-directory name
            out_dir: Root directory; defaults to DATA_DIR
        """
        self.run_id = run_id
        self.base_dir = Path(out_dir or os.getenv("DATA_DIR", "data"))
        self.eval_dir = self.base_dir / run_id
        try:
            self.eval_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputError(f"cannot create output directory {self.eval_dir}: {e}") from e
        self.tables: List[str] = []

    @classmethod
    def get_current_logger(cls) -> Optional["EvaluationLogger"]:
        """Get the current logger instance."""
        return cls._current_logger

    @classmethod
    def setup_logger(cls, run_id: str, out_dir: Optional[str] = None) -> "EvaluationLogger":
        logger = cls(run_id=run_id, out_dir=out_dir)
        cls._current_logger = logger
        return logger

    def log_table(self, table: str, columns: Sequence[str],
                  rows: Sequence[Sequence[Any]]) -> Path:
        """Write ``rows`` to ``<table>.csv``, replacing an existing file.

        Args:
            table: File name without extension
            columns: Header row
            rows: One sequence of cells per experiment cell
        """
        filename = self.eval_dir / f"{table}.csv"
        try:
            with open(filename, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(columns)
                for row in rows:
                    if len(row) != len(columns):
                        raise ValueError(
                            f"table {table}: row has {len(row)} cells, "
                            f"header has {len(columns)}")
                    writer.writerow([_cell(value) for value in row])
        except OSError as e:
            raise OutputError(f"cannot write {filename}: {e}") from e
        self.tables.append(filename.name)
        return filename

    def log_report(self, report: Dict[str, Any], name: str = "report") -> Path:
        """Write the run report as strict JSON; NaN and infinities become null."""
        filename = self.eval_dir / f"{name}.json"
        try:
            with open(filename, "w", encoding="utf-8") as f:
                json.dump(_json_safe(report), f, indent=2, sort_keys=True, allow_nan=False)
                f.write("\n")
        except OSError as e:
            raise OutputError(f"cannot write {filename}: {e}") from e
        return filename


def _json_safe(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value
