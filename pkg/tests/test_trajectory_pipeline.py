from __future__ import annotations

import numpy as np
import pytest

from robodata.records import Trajectory, Waypoint
from robodata.trajectory_pipeline import (
    ComposeOptions,
    RansacParams,
    compose_traj_sample,
    downsample_indices,
    parse_traj_sample,
    ransac_clean,
    uniform_downsample,
)


def _traj(points, eid="e0"):
    return Trajectory(points=tuple(Waypoint(x, y) for x, y in points), episode_id=eid, instruction="i")


def _collinear(n=10, eid="line"):
    return _traj([(i * 50, i * 30) for i in range(n)], eid)


# -- RANSAC -------------------------------------------------------------------

def test_ransac_collinear_all_inliers():
    t = _collinear()
    result = ransac_clean(t, RansacParams(seed=5))
    assert result.trajectory == t
    assert result.outlier_mask == (False,) * 10
    assert not result.passthrough


def test_ransac_masks_single_displaced_point():
    pts = [(i * 50, i * 30) for i in range(10)]
    pts[4] = (pts[4][0], pts[4][1] + 200)
    result = ransac_clean(_traj(pts), RansacParams(seed=5))
    assert result.outlier_mask == tuple(i == 4 for i in range(10))
    assert len(result.trajectory.points) == 9
    assert result.n_outliers == 1
    assert not result.passthrough


def test_ransac_same_seed_bit_identical():
    pts = [(i * 37 % 900, (i * i * 13) % 900) for i in range(12)]
    t = _traj(pts, "jitter")
    p = RansacParams(seed=77)
    r1 = ransac_clean(t, p)
    r2 = ransac_clean(t, p)
    assert r1 == r2


def test_ransac_keeps_order():
    rng = np.random.default_rng(42)
    for _ in range(50):
        n = int(rng.integers(4, 15))
        pts = [(int(x), int(y)) for x, y in rng.integers(0, 1000, size=(n, 2))]
        result = ransac_clean(_traj(pts, f"f{n}"), RansacParams(seed=1))
        assert len(result.outlier_mask) == n
        kept = [p for p, out in zip(pts, result.outlier_mask) if not out]
        assert [(p.x, p.y) for p in result.trajectory.points] == (
            kept if not result.passthrough else pts
        )
        if not result.passthrough:
            assert len(kept) >= 3


def test_ransac_passthrough_when_no_consensus():
    # min_inliers above the point count of any consensus forces passthrough
    pts = [(0, 0), (900, 50), (20, 800), (500, 500), (100, 100)]
    result = ransac_clean(_traj(pts), RansacParams(threshold=1.0, min_inliers=5, degree=2, seed=3))
    assert result.passthrough
    assert result.trajectory.points == _traj(pts).points
    assert result.outlier_mask == (False,) * 5


def test_ransac_too_few_points_rejected():
    with pytest.raises(ValueError):
        ransac_clean(_traj([(0, 0), (10, 10)]), RansacParams(min_inliers=3))


def test_ransac_params_validation():
    with pytest.raises(ValueError):
        RansacParams(degree=0)
    with pytest.raises(ValueError):
        RansacParams(min_inliers=2, degree=2)  # below degree + 1
    with pytest.raises(ValueError):
        RansacParams(threshold=0.0)
    with pytest.raises(ValueError):
        RansacParams(iterations=0)


# -- downsampling ----------------------------------------------------------------

def test_downsample_under_limit_identity():
    t = _traj([(i, i) for i in range(7)])
    assert uniform_downsample(t, 10) is t


def test_downsample_twenty_to_ten_indices():
    assert downsample_indices(20, 10) == [0, 2, 4, 6, 8, 11, 13, 15, 17, 19]
    t = _traj([(i, 0) for i in range(20)])
    out = uniform_downsample(t, 10)
    assert [p.x for p in out.points] == [0, 2, 4, 6, 8, 11, 13, 15, 17, 19]


def test_downsample_endpoints_and_monotone_indices():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        n = int(rng.integers(2, 60))
        k = int(rng.integers(2, 25))
        idx = downsample_indices(n, k)
        assert idx[0] == 0
        assert idx[-1] == n - 1
        assert all(b > a for a, b in zip(idx, idx[1:]))
        if n > k:
            assert len(idx) == k


def test_downsample_rejects_small_max_points():
    with pytest.raises(ValueError):
        uniform_downsample(_traj([(0, 0), (1, 1), (2, 2)]), 1)


# -- composing and parsing ---------------------------------------------------------

def test_compose_plain():
    t = _traj([(1, 2), (3, 4)])
    assert compose_traj_sample(t, ComposeOptions()) == "[(1,2),(3,4)]"


def test_compose_start_and_tokens():
    t = _traj([(1, 2), (3, 4)])
    opts = ComposeOptions(include_start_point=True, use_special_tokens=True, start=Waypoint(0, 0))
    assert compose_traj_sample(t, opts) == "<start>(0,0)</start><wp>(1,2)</wp><goal>(3,4)</goal>"


def test_compose_start_defaults_to_first_waypoint():
    t = _traj([(7, 8), (9, 10)])
    out = compose_traj_sample(t, ComposeOptions(include_start_point=True))
    assert out == "<start>(7,8)</start>[(7,8),(9,10)]"


def test_compose_downsamples_first():
    t = _traj([(i, 0) for i in range(20)])
    out = compose_traj_sample(t, ComposeOptions(max_points=10))
    xs = [w.x for w in parse_traj_sample(out)[1]]
    assert xs == [0, 2, 4, 6, 8, 11, 13, 15, 17, 19]


def test_parse_round_trip_every_option_combo():
    rng = np.random.default_rng(31)
    for _ in range(200):
        n = int(rng.integers(1, 12))
        pts = [(int(x), int(y)) for x, y in rng.integers(0, 1000, size=(n, 2))]
        t = _traj(pts, "rt")
        for start_flag in (False, True):
            for tokens in (False, True):
                for mp in (None, 5):
                    opts = ComposeOptions(
                        max_points=mp,
                        include_start_point=start_flag,
                        use_special_tokens=tokens,
                        start=Waypoint(3, 4) if start_flag else None,
                    )
                    text = compose_traj_sample(t, opts)
                    start, waypoints = parse_traj_sample(text)
                    expected = t if mp is None else uniform_downsample(t, mp)
                    assert waypoints == expected.points
                    assert start == (Waypoint(3, 4) if start_flag else None)


@pytest.mark.parametrize(
    "bad",
    [
        "",
        "[(1,2)",
        "[(1,2),]",
        "(1,2)",
        "<wp>(1,2)</wp>",  # no goal
        "<goal>(1,2)</goal><wp>(3,4)</wp>",  # goal not terminal
        "[(1,2)]<goal>(3,4)</goal>",  # mixed grammars
        "<start>(1,2)</start>",  # start alone
        "[(1000,2)]",  # out of range coordinate
        "[(1, 2)]",  # internal whitespace
    ],
)
def test_parse_rejects_malformed(bad):
    with pytest.raises((ValueError,)):
        parse_traj_sample(bad)
