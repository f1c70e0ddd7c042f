"""Geometric similarity metrics for 2D end-effector trajectories.

All metrics operate in unit space: float arrays of shape ``(n, 2)``
with coordinates in ``[0, 1)``.  ``scale_to_unit`` maps integer
waypoint trajectories onto that space by dividing by the coordinate
limit, so a raw displacement of one pixel-grid unit is 0.001 here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .records import COORD_LIMIT, Trajectory

DEFAULT_RESAMPLE_POINTS = 32


def _as_points(a) -> np.ndarray:
    pts = np.asarray(a, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise ValueError(f"expected an (n, 2) point array with n >= 1, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("trajectory points must be finite")
    return pts


def scale_to_unit(t: Union[Trajectory, np.ndarray]) -> np.ndarray:
    """Map an integer-coordinate trajectory into unit space.

    Parameters
    ----------
    t : Trajectory or (n, 2) array_like of integers in [0, COORD_LIMIT)

    Returns
    -------
    (n, 2) float ndarray with coordinates in [0, 1).
    """
    if isinstance(t, Trajectory):
        raw = np.array([[p.x, p.y] for p in t.points], dtype=float)
    else:
        raw = np.asarray(t, dtype=float)
        raw = _as_points(raw)
        if np.any(raw < 0) or np.any(raw >= COORD_LIMIT):
            raise ValueError(f"raw coordinates must lie in [0, {COORD_LIMIT})")
    return raw / float(COORD_LIMIT)


def pairwise_distances(a, b) -> np.ndarray:
    """Euclidean distance matrix between two point sequences."""
    p, q = _as_points(a), _as_points(b)
    return np.linalg.norm(p[:, None, :] - q[None, :, :], axis=2)


def discrete_frechet(a, b) -> float:
    """Discrete Frechet distance between two polylines.

    Dynamic program over the pairwise distance matrix::

        C[i, j] = max(d[i, j], min(C[i-1, j], C[i-1, j-1], C[i, j-1]))

    which equals the minimum over monotone couplings of the maximum
    matched-pair distance.

    Parameters
    ----------
    a, b : (n, 2) array_like
        Unit-space polylines, at least one point each.

    Returns
    -------
    float
    """
    d = pairwise_distances(a, b)
    n, m = d.shape
    rows = d.tolist()
    prev = None
    for i in range(n):
        cur = rows[i]
        if i == 0:
            acc = cur[0]
            for j in range(1, m):
                if cur[j] < acc:
                    cur[j] = acc
                else:
                    acc = cur[j]
        else:
            if prev[0] > cur[0]:
                cur[0] = prev[0]
            for j in range(1, m):
                best = prev[j - 1]
                if prev[j] < best:
                    best = prev[j]
                if cur[j - 1] < best:
                    best = cur[j - 1]
                if best > cur[j]:
                    cur[j] = best
        prev = cur
    return float(prev[m - 1])


def hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between two point sets.

    Order-insensitive: the max over both directed max-min distances.
    """
    d = pairwise_distances(a, b)
    forward = d.min(axis=1).max()
    backward = d.min(axis=0).max()
    return float(max(forward, backward))


def arc_length(a) -> float:
    """Total chord length of a polyline."""
    pts = _as_points(a)
    if len(pts) == 1:
        return 0.0
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def resample_arclength(a, k: int) -> np.ndarray:
    """Resample a polyline to ``k`` points at equal arc-length fractions.

    Endpoints are preserved exactly.  A single-point (or zero-length)
    polyline resamples to that point repeated ``k`` times.

    Parameters
    ----------
    a : (n, 2) array_like
    k : int
        Number of output points, at least 2.

    Returns
    -------
    (k, 2) float ndarray
    """
    if type(k) is not int or k < 2:
        raise ValueError(f"resample count must be an integer >= 2, got {k!r}")
    pts = _as_points(a)
    if len(pts) == 1:
        return np.tile(pts[0], (k, 1))
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    total = cum[-1]
    if total == 0.0:
        return np.tile(pts[0], (k, 1))
    targets = np.linspace(0.0, total, k)
    out = np.column_stack((
        np.interp(targets, cum, pts[:, 0]),
        np.interp(targets, cum, pts[:, 1]),
    ))
    out[0] = pts[0]
    out[-1] = pts[-1]
    return out


def rmse(a, b, k: int = DEFAULT_RESAMPLE_POINTS) -> float:
    """Pointwise RMSE after arc-length resampling both polylines to ``k`` points.

    Resampling fixes the correspondence problem for unequal-length
    inputs: both sides are compared at the same arc-length fractions.
    """
    ra = resample_arclength(a, k)
    rb = resample_arclength(b, k)
    return float(np.sqrt(np.mean(np.sum((ra - rb) ** 2, axis=1))))


@dataclass(frozen=True)
class TrajScore:
    """Bundle of the three trajectory metrics for one prediction/target pair."""

    dfd: float
    hd: float
    rmse: float


def score_pair(a, b, rmse_k: int = DEFAULT_RESAMPLE_POINTS) -> TrajScore:
    """All three metrics for a unit-space trajectory pair."""
    return TrajScore(dfd=discrete_frechet(a, b), hd=hausdorff(a, b), rmse=rmse(a, b, rmse_k))
