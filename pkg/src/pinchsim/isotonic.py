"""Euclidean projection onto ordered-spacing box constraints.

The feasible set per waveguide is {0 <= x_1, x_l - x_{l-1} >= spacing,
x_L <= region_x}.  Subtracting the cumulative spacing turns it into the
monotone cone intersected with a common box, where the projection is
pool-adjacent-violators followed by clipping.
"""

from __future__ import annotations

import numpy as np

from .channel import PinchingLayout
from .config import SystemConfig


def isotonic_l2(z: np.ndarray) -> np.ndarray:
    """Best non-decreasing least-squares fit to z (equal weights)."""
    z = np.asarray(z, dtype=float)
    n = z.size
    vals = np.empty(n)
    counts = np.empty(n, dtype=np.int64)
    m = 0
    for i in range(n):
        vals[m] = z[i]
        counts[m] = 1
        m += 1
        while m > 1 and vals[m - 1] < vals[m - 2]:
            tot = counts[m - 2] + counts[m - 1]
            vals[m - 2] = (counts[m - 2] * vals[m - 2] + counts[m - 1] * vals[m - 1]) / tot
            counts[m - 2] = tot
            m -= 1
    return np.repeat(vals[:m], counts[:m])


def project_row(target: np.ndarray, spacing: float, region_x: float) -> np.ndarray:
    """Project one waveguide's target positions onto the feasible set."""
    target = np.asarray(target, dtype=float)
    l = target.size
    if (l - 1) * spacing > region_x:
        raise ValueError("infeasible: cumulative spacing exceeds region_x")
    if l == 1:
        return np.clip(target, 0.0, region_x)
    offsets = spacing * np.arange(l)
    upper = region_x - offsets[-1]
    y = np.clip(isotonic_l2(target - offsets), 0.0, upper)
    return y + offsets


def project_layout(cfg: SystemConfig, target: np.ndarray) -> PinchingLayout:
    """Row-wise projection of an unconstrained target onto feasibility."""
    target = np.asarray(target, dtype=float)
    rows = [project_row(row, cfg.min_spacing, cfg.region_x) for row in target]
    return PinchingLayout(np.stack(rows, axis=0))
