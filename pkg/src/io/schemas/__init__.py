"""
Output Schemas
==============
YAML descriptions of every run output file and the checks that validate a
run directory against them.
"""

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd
import yaml

from ...utils.logger import get_logger

logger = get_logger(__name__)

SCHEMA_DIR = Path(__file__).parent
SCHEMA_NAMES = ("trajectories", "transform_report", "zones", "run_summary", "density")

# Errors reported per file before the rest is skipped
MAX_ERRORS = 20


@lru_cache(maxsize=None)
def load_schema(name: str) -> Dict[str, Any]:
    """Parsed schema document by name."""
    path = SCHEMA_DIR / f"{name}.yaml"
    if not path.exists():
        raise KeyError(f"No schema named '{name}'")
    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f)


def _type_ok(value: Any, expected: str) -> bool:
    if expected == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if expected == "float":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if expected == "str":
        return isinstance(value, str)
    if expected == "bool":
        return isinstance(value, bool)
    if expected == "list":
        return isinstance(value, list)
    if expected == "dict":
        return isinstance(value, dict)
    raise ValueError(f"Unknown schema type '{expected}'")


def check_record(record: Dict, fields: Dict[str, Dict]) -> List[str]:
    """Errors of one JSON record against a field specification."""
    errors = []
    for name, spec in fields.items():
        if name not in record:
            errors.append(f"missing field '{name}'")
            continue
        value = record[name]
        if value is None:
            if not spec.get("nullable", False):
                errors.append(f"'{name}' is null")
            continue
        if not _type_ok(value, spec["type"]):
            errors.append(f"'{name}' has type {type(value).__name__}, expected {spec['type']}")
            continue
        if "enum" in spec and value not in spec["enum"]:
            errors.append(f"'{name}' = {value!r} not in {spec['enum']}")
        if "min" in spec and value < spec["min"]:
            errors.append(f"'{name}' = {value} below {spec['min']}")
    return errors


def validate_csv(path: Path, schema: Dict) -> List[str]:
    """Column names, types and ranges of a CSV file."""
    expected = [c["name"] for c in schema["columns"]]
    df = pd.read_csv(path)
    if list(df.columns) != expected:
        return [f"columns {list(df.columns)} != {expected}"]
    errors = []
    for column in schema["columns"]:
        values = df[column["name"]]
        if values.isna().any():
            errors.append(f"column '{column['name']}' has empty values")
            continue
        if column["type"] == "int" and len(values) and not pd.api.types.is_integer_dtype(values):
            errors.append(f"column '{column['name']}' is not integer")
        if column["type"] == "float" and len(values) and not pd.api.types.is_numeric_dtype(values):
            errors.append(f"column '{column['name']}' is not numeric")
        if "enum" in column:
            bad = sorted(set(values.astype(str)) - set(column["enum"]))
            if bad:
                errors.append(f"column '{column['name']}' has values {bad} outside {column['enum']}")
        if "min" in column and len(values) and pd.api.types.is_numeric_dtype(values) and values.min() < column["min"]:
            errors.append(f"column '{column['name']}' below {column['min']}")
    return errors


def validate_jsonl(path: Path, schema: Dict) -> List[str]:
    errors = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                errors.append(f"line {line_no}: {e}")
                continue
            errors.extend(f"line {line_no}: {err}" for err in check_record(record, schema["fields"]))
            if len(errors) >= MAX_ERRORS:
                break
    return errors


def validate_json(path: Path, schema: Dict) -> List[str]:
    with open(path, "r", encoding="utf-8") as f:
        try:
            record = json.load(f)
        except json.JSONDecodeError as e:
            return [str(e)]
    return check_record(record, schema["fields"])


def validate_density(directory: Path, schema: Dict) -> List[str]:
    """Every density frame is a rectangular, non-negative numeric grid of one shape."""
    errors = []
    shape = None
    for path in sorted(directory.glob("frame_*.txt")):
        grid = np.atleast_2d(np.loadtxt(path, ndmin=2))
        if shape is None:
            shape = grid.shape
        elif grid.shape != shape:
            errors.append(f"{path.name}: shape {grid.shape} != {shape}")
        if (grid < schema.get("min", 0)).any():
            errors.append(f"{path.name}: negative density")
        if len(errors) >= MAX_ERRORS:
            break
    return errors


def validate_run_dir(path: Union[str, Path]) -> Dict[str, Dict[str, Any]]:
    """
    Validate all output files of a run directory.

    Args:
        path: Run directory written by RunWriter

    Returns:
        {file name: {"passed": bool, "errors": [...]}}; a missing file fails
    """
    root = Path(path)
    logger.info(f"Validating run directory {root}")
    results: Dict[str, Dict[str, Any]] = {}
    for name in SCHEMA_NAMES:
        schema = load_schema(name)
        fmt = schema["format"]
        target = root / ("density" if fmt == "grid" else schema["file"])
        if not target.exists():
            # density output is optional (density_stride 0)
            optional = schema.get("optional", False)
            results[schema["file"]] = {"passed": optional, "errors": [] if optional else ["missing"]}
            continue
        if fmt == "csv":
            errors = validate_csv(target, schema)
        elif fmt == "jsonl":
            errors = validate_jsonl(target, schema)
        elif fmt == "json":
            errors = validate_json(target, schema)
        else:
            errors = validate_density(target, schema)
        results[schema["file"]] = {"passed": not errors, "errors": errors[:MAX_ERRORS]}

    failed = [f for f, r in results.items() if not r["passed"]]
    if failed:
        logger.warning(f"Schema validation failed for {failed}")
    else:
        logger.info("All run outputs match their schemas")
    return results
