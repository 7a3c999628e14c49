"""Per-panel statistics for the sidecar files."""

from __future__ import annotations

import math

import numpy as np


def median_iqr(values: np.ndarray) -> tuple[float, float]:
    q1, q2, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    return float(q2), float(q3 - q1)


def freedman_diaconis_bins(values: np.ndarray, max_bins: int = 200) -> int:
    """Freedman-Diaconis bin count; square-root rule when the IQR collapses."""
    n = values.size
    if n < 2:
        return 1
    _, iqr = median_iqr(values)
    span = float(values.max() - values.min())
    if span <= 0.0:
        return 1
    if iqr <= 0.0:
        return min(max_bins, max(1, int(math.ceil(math.sqrt(n)))))
    width = 2.0 * iqr * n ** (-1.0 / 3.0)
    return min(max_bins, max(1, int(math.ceil(span / width))))
