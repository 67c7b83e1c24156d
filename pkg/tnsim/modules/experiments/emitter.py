"""
Result emitter.

Writes result records as CSV (fixed, versioned header; floats with 17
significant digits) or JSON lines, and reads both formats back.
Identical records always produce byte-identical files.
"""

import csv
import json
from pathlib import Path
from typing import Iterable, List, Optional, Union

from exceptions import ConfigError, ResultsWriteError
from schemas import CSV_COLUMNS, ResultFormat, ResultRecord
from utils.logging import get_logger

logger = get_logger("tnsim.experiments.emitter")

_FLOAT_COLUMNS = ("time", "value", "epsilon", "delta_k", "discarded_weight", "wall_time")


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    return str(value)


def _csv_row(record: ResultRecord) -> List[str]:
    data = record.model_dump(mode="python")
    data["error_source"] = record.error_source.value
    return [_format_cell(data[column]) for column in CSV_COLUMNS]


def format_for(path: Union[str, Path], fmt: Optional[ResultFormat] = None) -> ResultFormat:
    """Explicit format, or the one implied by the file suffix (csv by default)."""
    if fmt is not None:
        return ResultFormat(fmt)
    return ResultFormat.JSON_LINES if Path(path).suffix in (".jsonl", ".json") else ResultFormat.CSV


def emit_results(records: Iterable[ResultRecord], fmt: ResultFormat, path: Union[str, Path]) -> Path:
    """
    Write records to path, replacing any previous content.

    Args:
        records: Result records (an empty list gives a header-only CSV)
        fmt: csv or jsonl
        path: Output file; parent directories are created

    Returns:
        The written path

    Raises:
        ResultsWriteError: On any IO failure, with the path
    """
    path = Path(path)
    fmt = ResultFormat(fmt)
    records = list(records)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            if fmt == ResultFormat.CSV:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(CSV_COLUMNS)
                writer.writerows(_csv_row(r) for r in records)
            else:
                for r in records:
                    f.write(json.dumps(r.model_dump(mode="json"), sort_keys=True) + "\n")
    except OSError as e:
        raise ResultsWriteError(str(path), str(e)) from e
    logger.info("Results written", path=str(path), records=len(records), format=fmt.value)
    return path


def _parse_cell(column: str, text: str):
    if text == "":
        return None
    if column in _FLOAT_COLUMNS:
        return float(text)
    if column == "schema_version":
        return int(text)
    if column == "converged":
        return text == "true"
    if column == "params":
        return json.loads(text)
    return text


def read_results(path: Union[str, Path], fmt: Optional[ResultFormat] = None) -> List[ResultRecord]:
    """
    Read records written by emit_results.

    Raises:
        ConfigError: If the CSV header does not match this schema version
    """
    path = Path(path)
    fmt = format_for(path, fmt)
    with open(path, encoding="utf-8", newline="") as f:
        if fmt == ResultFormat.JSON_LINES:
            return [ResultRecord.model_validate_json(line) for line in f if line.strip()]
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise ConfigError(f"unexpected result header {header}", context=str(path))
        records = []
        for row in reader:
            data = {column: _parse_cell(column, text) for column, text in zip(CSV_COLUMNS, row)}
            records.append(ResultRecord.model_validate({k: v for k, v in data.items() if v is not None}))
        return records
