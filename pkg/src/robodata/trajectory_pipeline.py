"""Trajectory cleaning, decimation, and text serialization.

The pipeline turns raw annotated waypoint tracks into training-ready
text samples: RANSAC drops annotation outliers, index-uniform
downsampling caps the waypoint count, and the composer renders the
surviving waypoints in one of the supported text grammars (with a
companion parser for round-trips).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .records import Trajectory, Waypoint, with_points
from .seeding import check_seed, derive_rng


@dataclass(frozen=True)
class RansacParams:
    """Knobs for polynomial RANSAC cleaning.

    The model fits x(s) and y(s) as degree-``degree`` polynomials of
    the normalized waypoint index s_i = i / (n - 1); ``threshold`` is
    the inlier cutoff on the Euclidean residual in raw coordinate
    units.
    """

    degree: int = 2
    threshold: float = 20.0
    iterations: int = 100
    min_inliers: int = 3
    seed: int = 0

    def __post_init__(self):
        if type(self.degree) is not int or self.degree < 1:
            raise ValueError(f"degree must be a positive integer, got {self.degree!r}")
        if not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold!r}")
        if type(self.iterations) is not int or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations!r}")
        if type(self.min_inliers) is not int or self.min_inliers < self.degree + 1:
            raise ValueError(
                f"min_inliers must be an integer >= degree + 1, got {self.min_inliers!r}"
            )
        check_seed(self.seed)


@dataclass(frozen=True)
class RansacResult:
    """Outcome of cleaning one trajectory.

    ``outlier_mask[i]`` is True when input point i was dropped.  When
    no iteration reaches ``min_inliers`` the input passes through
    unchanged with an all-False mask and ``passthrough`` set.
    """

    trajectory: Trajectory
    outlier_mask: tuple[bool, ...]
    passthrough: bool

    @property
    def n_outliers(self) -> int:
        return sum(self.outlier_mask)


def ransac_clean(t: Trajectory, params: RansacParams = RansacParams()) -> RansacResult:
    """Drop waypoints inconsistent with a smooth index-parametrized path.

    Deterministic for a fixed ``params.seed``: the sampling stream is
    derived from the seed and the trajectory's episode_id, so results
    do not depend on corpus order or parallel scheduling.
    """
    pts = np.array([[p.x, p.y] for p in t.points], dtype=float)
    n = len(pts)
    if n < params.min_inliers:
        raise ValueError(
            f"trajectory has {n} points, fewer than min_inliers={params.min_inliers}"
        )
    need = params.degree + 1
    best_count = 0
    best_mask: Optional[np.ndarray] = None
    # min_inliers >= degree + 1 >= 2, so n supports both the fit and s_i = i/(n-1)
    s = np.arange(n, dtype=float) / (n - 1)
    rng = derive_rng(params.seed, t.episode_id)
    for _ in range(params.iterations):
        idx = rng.choice(n, size=need, replace=False)
        cx = npoly.polyfit(s[idx], pts[idx, 0], params.degree)
        cy = npoly.polyfit(s[idx], pts[idx, 1], params.degree)
        res = np.hypot(pts[:, 0] - npoly.polyval(s, cx), pts[:, 1] - npoly.polyval(s, cy))
        mask = res <= params.threshold
        count = int(mask.sum())
        if count > best_count:
            best_count = count
            best_mask = mask
    if best_count < params.min_inliers or best_mask is None:
        return RansacResult(t, (False,) * n, True)
    outliers = ~best_mask
    kept = tuple(p for p, out in zip(t.points, outliers) if not out)
    cleaned = t if not outliers.any() else with_points(t, kept)
    return RansacResult(cleaned, tuple(bool(o) for o in outliers), False)


def uniform_downsample(t: Trajectory, max_points: int) -> Trajectory:
    """Cap the waypoint count by index-uniform selection.

    Keeps waypoints at indices round(j * (n - 1) / (max_points - 1))
    for j = 0..max_points-1 (round half up), so both endpoints always
    survive.  Trajectories at or under the cap pass through unchanged.
    """
    if type(max_points) is not int or max_points < 2:
        raise ValueError(f"max_points must be an integer >= 2, got {max_points!r}")
    n = len(t.points)
    if n <= max_points:
        return t
    step_num = n - 1
    denom = max_points - 1
    indices = [math.floor((j * step_num) / denom + 0.5) for j in range(max_points)]
    return with_points(t, (t.points[i] for i in indices))


def downsample_indices(n: int, max_points: int) -> list[int]:
    """The index selection used by ``uniform_downsample`` (exposed for audits)."""
    if n <= max_points:
        return list(range(n))
    return [math.floor((j * (n - 1)) / (max_points - 1) + 0.5) for j in range(max_points)]


@dataclass(frozen=True)
class ComposeOptions:
    """Serialization options for trajectory text samples.

    ``max_points`` decimates before composing; ``include_start_point``
    prefixes the sample with the end-effector start coordinates
    (defaults to the trajectory's first waypoint when ``start`` is not
    given); ``use_special_tokens`` switches the waypoint list from the
    bracket grammar to tagged waypoints with a terminal goal tag.
    """

    max_points: Optional[int] = None
    include_start_point: bool = False
    use_special_tokens: bool = False
    start: Optional[Waypoint] = None


def compose_traj_sample(t: Trajectory, opts: ComposeOptions = ComposeOptions()) -> str:
    """Render a trajectory as a training-text sample.

    Grammars::

        plain:   [(x1,y1),(x2,y2),...]
        tokens:  <wp>(x1,y1)</wp>...<goal>(xn,yn)</goal>

    either of which may be prefixed by ``<start>(sx,sy)</start>``.
    Downsampling (when requested) happens before serialization.
    """
    if opts.max_points is not None:
        t = uniform_downsample(t, opts.max_points)
    pts = t.points
    parts: list[str] = []
    if opts.include_start_point:
        start = opts.start if opts.start is not None else pts[0]
        parts.append(f"<start>({start.x},{start.y})</start>")
    if opts.use_special_tokens:
        for p in pts[:-1]:
            parts.append(f"<wp>({p.x},{p.y})</wp>")
        goal = pts[-1]
        parts.append(f"<goal>({goal.x},{goal.y})</goal>")
    else:
        parts.append("[" + ",".join(f"({p.x},{p.y})" for p in pts) + "]")
    return "".join(parts)


_START_RE = re.compile(r"^<start>\((\d+),(\d+)\)</start>")
_PLAIN_RE = re.compile(r"^\[\((\d+),(\d+)\)(?:,\((\d+),(\d+)\))*\]$")
_PAIR_RE = re.compile(r"\((\d+),(\d+)\)")
_TOKENS_RE = re.compile(r"^(?:<wp>\(\d+,\d+\)</wp>)*<goal>\(\d+,\d+\)</goal>$")


def parse_traj_sample(text: str) -> tuple[Optional[Waypoint], tuple[Waypoint, ...]]:
    """Inverse of ``compose_traj_sample``: recover (start, waypoints).

    Accepts exactly the strings the composer can emit; anything else
    raises ``ValueError``.  Coordinates are validated on the way in,
    so out-of-range values are rejected rather than clamped.
    """
    start = None
    rest = text
    m = _START_RE.match(rest)
    if m:
        start = Waypoint(int(m.group(1)), int(m.group(2)))
        rest = rest[m.end():]
    if rest.startswith("["):
        if not _PLAIN_RE.match(rest):
            raise ValueError(f"malformed trajectory sample: {text!r}")
        pairs = _PAIR_RE.findall(rest)
    elif _TOKENS_RE.match(rest):
        pairs = _PAIR_RE.findall(rest)
    else:
        raise ValueError(f"malformed trajectory sample: {text!r}")
    waypoints = tuple(Waypoint(int(x), int(y)) for x, y in pairs)
    return start, waypoints
