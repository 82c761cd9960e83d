"""
cli/csv_writer.py
─────────────────
CSV emission shared by every command.

Floats are written with repr(), the shortest string that parses back to the
same double, so identical runs give byte-identical files. Each file goes to
<name>.tmp first and is moved into place with os.replace.
"""

from __future__ import annotations

import csv
import math
import os
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np


def format_number(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format_number(value)


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
    trailer: Optional[str] = None,
) -> Path:
    """Writes header + rows atomically; `trailer` becomes a final '# ...' line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_name(path.name + ".tmp")
    with open(tmp_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
        if trailer is not None:
            f.write(f"# {trailer}\n")
    os.replace(tmp_path, path)
    return path


def snapshot_name(t: float) -> str:
    """snap_<t>.csv with t in shortest round-trip form."""
    return f"snap_{format_number(float(t))}.csv"
