import json
import math

import numpy as np

from utils.logger.evaluation_logger import EvaluationLogger


def test_report_with_non_finite_values_is_strict_json(tmp_path):
    logger = EvaluationLogger("run", out_dir=str(tmp_path))
    path = logger.log_report({
        "statistics": [{"name": "gap", "value": np.float64(0.1), "error": float("nan")}],
        "ratio": math.inf,
        "steps": np.int64(40),
        "band": (1.4, 3.0),
    })
    text = path.read_text()
    assert "NaN" not in text and "Infinity" not in text

    def reject(constant):
        raise ValueError(constant)

    data = json.loads(text, parse_constant=reject)
    assert data["statistics"][0]["error"] is None
    assert data["statistics"][0]["value"] == 0.1
    assert data["ratio"] is None
    assert data["steps"] == 40
    assert data["band"] == [1.4, 3.0]


def test_tables_keep_nan_cells(tmp_path):
    logger = EvaluationLogger("run", out_dir=str(tmp_path))
    path = logger.log_table("rate", ["n", "error", "ok"], [[8, float("nan"), True]])
    assert path.read_text() == "n,error,ok\n8,nan,true\n"
