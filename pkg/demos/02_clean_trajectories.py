"""
Trajectory cleaning and text serialization
==========================================

RANSAC outlier removal, index-uniform downsampling, and the three
text layouts a trajectory can be rendered into.
"""

from robodata import (
    ComposeOptions,
    RansacParams,
    Trajectory,
    Waypoint,
    compose_traj_sample,
    parse_traj_sample,
    ransac_clean,
    uniform_downsample,
)

# a smooth sweep with one glitched waypoint (index 4 jumps far off the path)
points = [Waypoint(i * 100, 100 + i * 3) for i in range(10)]
points[4] = Waypoint(400, 950)
raw = Trajectory(tuple(points), episode_id="demo-1", instruction="wipe the table")

result = ransac_clean(raw, RansacParams(threshold=20.0, seed=11))
print(f"dropped {result.n_outliers} outlier(s); passthrough={result.passthrough}")
print("outlier mask:", "".join("x" if m else "." for m in result.outlier_mask))

clean = result.trajectory

# cap the point count; first and last waypoints always survive
short = uniform_downsample(clean, 5)
print(f"\ndownsampled {len(clean.points)} -> {len(short.points)} points")
print("  endpoints kept:", short.points[0] == clean.points[0], short.points[-1] == clean.points[-1])

# three serialization layouts
plain = compose_traj_sample(short)
with_start = compose_traj_sample(short, ComposeOptions(include_start_point=True))
tokens = compose_traj_sample(short, ComposeOptions(use_special_tokens=True))
print("\nplain:      ", plain)
print("with start: ", with_start)
print("tokenized:  ", tokens)

# every layout parses back to the same waypoints
for text in (plain, with_start, tokens):
    start, waypoints = parse_traj_sample(text)
    assert waypoints == short.points
print("\nall three layouts round-trip exactly")
