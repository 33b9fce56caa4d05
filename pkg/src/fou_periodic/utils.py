"""
Formatting helpers shared by the CLI, the harness and the MCP server.
"""

import csv
import json
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from fou_periodic.errors import FouError


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, BaseModel):
        return value.model_dump()
    return str(value)


def format_error(e: Exception) -> str:
    """Format an exception as a JSON error response."""
    if isinstance(e, FouError):
        return json.dumps(
            {
                "error": True,
                "code": e.exit_code,
                "type": type(e).__name__,
                "message": e.message,
                "details": e.details,
            },
            indent=2,
            default=_json_default,
        )
    return json.dumps({"error": True, "message": str(e)}, indent=2)


def format_result(data: Any) -> str:
    """Format a result as JSON."""
    return json.dumps(data, indent=2, default=_json_default)


def format_float(value: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return f"{value:.17g}"


def write_json(path: Path, data: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_result(data) + "\n")
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write rows with floats in 17-significant-digit form."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return path
