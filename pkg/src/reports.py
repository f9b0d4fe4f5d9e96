"""Report types and rendering.

Every CLI report is wrapped in an envelope carrying the schema version, the seed and sample count
of the run, and the tolerances in force. Reports hold no timestamps, so identical runs serialize
to identical bytes.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np
from rich.console import Console
from rich.table import Table

from .config import ToleranceConfig

SCHEMA_VERSION = "1.0"


@dataclass
class ValidationReport:
    """Outcome of checking an input object against its invariants."""

    subject: str
    accepted: bool
    residuals: Dict[str, float] = field(default_factory=dict)
    messages: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subject": self.subject,
            "accepted": self.accepted,
            "residuals": self.residuals,
            "messages": self.messages,
        }


def to_jsonable(value: Any) -> Any:
    """Convert numpy values, fractions, tuples and dataclass-like objects into JSON-ready data."""
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return value


def envelope(
    command: str,
    payload: Any,
    tolerances: ToleranceConfig,
    seed: int,
    samples: int,
    exit_code: int = 0,
    error: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Wrap a payload with the reproducibility header."""
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": seed,
        "samples": samples,
        "tolerances": tolerances.as_dict(),
        "status": "ok" if error is None else "error",
        "exit_code": exit_code,
        "error": error,
        "result": to_jsonable(payload),
    }


def render_json(report: Dict[str, Any]) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


def render_text(report: Dict[str, Any]) -> str:
    """Render a report as a two-column rich table."""
    console = Console(record=True, width=120, force_terminal=False, color_system=None)
    table = Table(title=f"{report.get('command', 'report')} ({report.get('status', '')})")
    table.add_column("field")
    table.add_column("value")
    for key, value in _flatten(to_jsonable(report)):
        table.add_row(key, value)
    console.print(table)
    return console.export_text()


def _flatten(data: Any, prefix: str = "") -> List[Any]:
    rows: List[Any] = []
    if isinstance(data, dict):
        for key in sorted(data):
            rows.extend(_flatten(data[key], f"{prefix}.{key}" if prefix else str(key)))
    elif isinstance(data, list) and data and all(isinstance(item, dict) for item in data):
        for index, item in enumerate(data):
            rows.extend(_flatten(item, f"{prefix}[{index}]"))
    else:
        rows.append((prefix, json.dumps(data, sort_keys=True)))
    return rows
