"""Seeded sample-point generation with nondegeneracy rejection.

Points are drawn uniformly from the cube ``[-box, box]^n``.  When a metric is
supplied, points where any component fails to evaluate to a finite real (a
quotient pole) or where ``|det g|`` falls below the floor are rejected and
redrawn, so downstream residual checks only ever see usable points.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .tensor import MetricField

__all__ = ["sample_points"]


def sample_points(
    n: int,
    count: int,
    seed: int = 42,
    metric: Optional[MetricField] = None,
    *,
    det_floor: float = 1e-6,
    box: float = 1.0,
    max_draws: int = 200,
) -> np.ndarray:
    """Draw ``count`` admissible points in ``[-box, box]^n``, deterministically.

    Raises RuntimeError if the acceptance rate is too low (the metric is
    degenerate on essentially all of the cube).
    """
    rng = np.random.default_rng(seed)
    accepted = []
    have = 0
    for _ in range(max_draws):
        batch = rng.uniform(-box, box, size=(max(count, 64), n))
        if metric is None:
            keep = batch
        else:
            with np.errstate(all="ignore"):
                gv = metric.value(batch)
                det = np.linalg.det(np.nan_to_num(gv, nan=0.0, posinf=0.0, neginf=0.0))
            finite = np.all(np.isfinite(gv), axis=(-1, -2))
            keep = batch[finite & (np.abs(det) >= det_floor)]
        if keep.size:
            accepted.append(keep)
            have += keep.shape[0]
        if have >= count:
            break
    else:
        raise RuntimeError(
            f"could not find {count} nondegenerate sample points "
            f"(|det g| >= {det_floor:g}) in [-{box}, {box}]^{n}"
        )
    return np.concatenate(accepted, axis=0)[:count]
