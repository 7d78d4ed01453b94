"""Delimited and JSON report writers.

CSV floats are written with 17 significant digits so they round-trip exactly;
absent values are empty cells in CSV and ``null`` in JSON.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Mapping, Sequence

SCHEMA_VERSION = 1

VERIFY_COLUMNS = (
    "tail",
    "delta_or_r",
    "closed_form_bound",
    "chernoff_bound",
    "exact_tail",
    "empirical_tail",
    "empirical_se",
    "verdict",
)

BOUND_COLUMNS = (
    "delta",
    "mean",
    "s",
    "h",
    "lower_bound",
    "lower_regime",
    "upper_bound",
    "upper_regime",
    "chernoff_lower",
    "chernoff_upper",
    "lower_time",
    "lower_confidence",
    "upper_time",
    "upper_confidence",
)


def fmt_value(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def render_csv(columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_value(row.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(v: Any) -> Any:
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, Mapping):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render_json(payload: Mapping[str, Any]) -> str:
    body = {"schema": SCHEMA_VERSION, **payload}
    return json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n"


def simulation_rows(summary: Mapping[str, float], counts: Mapping[int, int]) -> list[dict]:
    """Long format: summary statistics first, then one row per observed hitting time."""
    rows = [{"row_type": "summary", "key": k, "value": float(v)} for k, v in summary.items()]
    rows += [{"row_type": "count", "key": int(t), "value": int(c)} for t, c in counts.items()]
    return rows


SIMULATION_COLUMNS = ("row_type", "key", "value")
