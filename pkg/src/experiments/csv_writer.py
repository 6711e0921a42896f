import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd


def format_cell(value: Any) -> str:
    """Shortest round-trip text for floats, plain text for everything else."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def rows_to_frame(rows: List[Dict[str, Any]], columns: Sequence[str]) -> pd.DataFrame:
    formatted = [{column: format_cell(row.get(column)) for column in columns} for row in rows]
    return pd.DataFrame(formatted, columns=list(columns), dtype=object)


def to_csv_text(rows: List[Dict[str, Any]], columns: Sequence[str]) -> str:
    return rows_to_frame(rows, columns).to_csv(index=False, lineterminator="\n")


def write_csv(
    rows: List[Dict[str, Any]],
    columns: Sequence[str],
    out: Optional[Union[str, Path]] = None,
) -> str:
    """Write rows as UTF-8 CSV with a fixed header to ``out``, or stdout when unset or "-".

    Returns the CSV text that was written.
    """
    text = to_csv_text(rows, columns)
    if out is None or str(out) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")
    return text
