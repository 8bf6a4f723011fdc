"""
CSV schemas and writers.

Every CSV has a header row and comma-separated values; floats are written in shortest round-trip
form. Column orders below are part of the output contract.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Sequence, Union

import pandas as pd

_logger = logging.getLogger("treeld.reporting")

THEORY_COLUMNS = ["n", "prediction", "log_prediction", "bk_bound", "nks_bound", "exponent"]
SIMULATION_COLUMNS = [
    "tree",
    "theta",
    "q",
    "n",
    "weight",
    "policy",
    "seed",
    "trials",
    "errors",
    "error_rate",
    "wilson_low",
    "wilson_high",
    "ties",
    "warning",
]
NOISELESS_EXPONENT_COLUMNS = ["theta", "k_p", "k_bk"]
NOISY_EXPONENT_COLUMNS = ["theta", "q", "k_q", "k_nks"]
EXACT_P3_COLUMNS = ["n", "theta", "q", "policy", "error"]


def rows_to_frame(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> pd.DataFrame:
    """Frame with exactly ``columns``, in order; missing keys are an error."""
    records: List[Mapping[str, Any]] = list(rows)
    for record in records:
        missing = [c for c in columns if c not in record]
        if missing:
            raise ValueError(f"Row is missing columns: {', '.join(missing)}")
    return pd.DataFrame([[record[c] for c in columns] for record in records], columns=list(columns))


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, na_rep="nan", lineterminator="\n")


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(frame_to_csv(frame), encoding="utf-8")
    _logger.info("CSV written | path=%s rows=%d columns=%d", target, len(frame), frame.shape[1])
    return target


def reports_to_frame(reports: Iterable[Any]) -> pd.DataFrame:
    """Simulation CSV frame from objects exposing ``to_row()``."""
    return rows_to_frame((report.to_row() for report in reports), SIMULATION_COLUMNS)


def theory_frame(rows: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    return rows_to_frame(rows, THEORY_COLUMNS)
