"""
Scoring affordance box predictions
==================================

IoU, greedy confidence-ordered matching, and interpolated average
precision swept over IoU thresholds.
"""

from robodata import BoundingBox, PredictionRecord, iou, mean_ap

gt = {
    "frame-01.png::grab the handle": [BoundingBox(100, 100, 300, 260)],
    "frame-02.png::press the button": [BoundingBox(400, 80, 520, 200), BoundingBox(50, 50, 120, 130)],
}

predictions = [
    # dead on
    PredictionRecord("frame-01.png::grab the handle", "affordance",
                     BoundingBox(100, 100, 300, 260), confidence=0.95),
    # decent overlap with the first button box
    PredictionRecord("frame-02.png::press the button", "affordance",
                     BoundingBox(390, 90, 510, 210), confidence=0.80),
    # confident but wrong
    PredictionRecord("frame-02.png::press the button", "affordance",
                     BoundingBox(700, 700, 820, 800), confidence=0.90),
]

print("pairwise IoU examples:")
print(f"  identical boxes      {iou(BoundingBox(0, 0, 10, 10), BoundingBox(0, 0, 10, 10)):.3f}")
print(f"  quarter-ish overlap  {iou(BoundingBox(0, 0, 10, 10), BoundingBox(5, 5, 15, 15)):.3f}")
print(f"  disjoint             {iou(BoundingBox(0, 0, 10, 10), BoundingBox(20, 0, 30, 10)):.3f}")

# the usual threshold sweep, 0.5 to 0.95 in steps of 0.05
result = mean_ap(predictions, gt)
print("\nAP by IoU threshold:")
for threshold, value in result.per_threshold:
    print(f"  {threshold:.2f}  {value:.4f}")
print(f"mean AP: {result.mean:.4f}")

# tightening the threshold can only lower AP
values = [v for _, v in result.per_threshold]
assert all(x >= y for x, y in zip(values, values[1:]))
print("AP is non-increasing in the threshold, as it must be")
