"""CSV emission and parsing.

Writers are atomic (temp file in the destination directory, then rename).
Experiment payloads use shortest round-trip decimals; path dumps use 17
significant digits.  Both representations parse back to the exact float.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigError


def fmt_shortest(x) -> str:
    """Shortest decimal that round-trips the float exactly."""
    return repr(float(x))


def fmt_17g(x) -> str:
    """17-significant-digit decimal (always round-trips)."""
    return f"{float(x):.17g}"


def atomic_write_text(dest: str | Path, text: str) -> Path:
    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dest.parent, prefix=dest.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, dest)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return dest


def write_csv(dest: str | Path, header: list[str], rows, float_fmt=fmt_shortest) -> Path:
    """Write rows of mixed int/float/str cells under an exact header."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (float, np.floating)):
                cells.append(float_fmt(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    return atomic_write_text(dest, "\n".join(lines) + "\n")


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"input file not readable: {path}")
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"empty CSV: {path}")
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def read_columns(path: str | Path, names: list[str]) -> list[np.ndarray]:
    """Float columns by name; ConfigError names the first missing column."""
    header, rows = read_csv(path)
    idx = []
    for name in names:
        if name not in header:
            raise ConfigError(f"{path}: missing column '{name}'")
        idx.append(header.index(name))
    cols = [np.array([float(r[i]) for r in rows]) for i in idx]
    return cols


def write_path_csv(dest, abscissa_name: str, points, values) -> Path:
    rows = zip(points, values)
    return write_csv(dest, [abscissa_name, "value"], rows, float_fmt=fmt_17g)


def write_zero_energy_csv(dest, zep) -> Path:
    rows = zip(zep.grid.points, zep.A_values, zep.martingale_values, zep.F_of_B)
    return write_csv(dest, ["t", "A", "martingale", "F_of_B"], rows)
