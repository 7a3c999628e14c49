"""CSV reading against the documented schemas, and sidecar emission."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import SchemaError

INCREMENTS_COLUMNS = ["seed", "p", "delta_tau", "mean_abs_incr_pow", "ci_low", "ci_high"]
FITS_COLUMNS = ["p", "slope", "intercept", "ssr", "n_points"]
PVAR_COLUMNS = ["seed", "p", "mesh", "value"]


def read_table(path: str | Path, columns: list[str]) -> dict[str, np.ndarray]:
    """Read named float columns; SchemaError names the first offender."""
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"{path}: file not found")
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise SchemaError(f"{path}: empty CSV")
    header = lines[0].split(",")
    for name in columns:
        if name not in header:
            raise SchemaError(f"{path}: missing column '{name}'")
    if len(lines) == 1:
        raise SchemaError(f"{path}: no data rows")
    idx = [header.index(name) for name in columns]
    rows = [ln.split(",") for ln in lines[1:]]
    out = {}
    for name, i in zip(columns, idx):
        try:
            out[name] = np.array([float(r[i]) for r in rows])
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"{path}: column '{name}' is not numeric") from exc
    return out


def write_sidecar(dest: str | Path, lines: list[str]) -> Path:
    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return dest


def fmt(x: float) -> str:
    return repr(float(x))
