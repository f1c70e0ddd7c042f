"""
Scoring planning answers with corpus BLEU
=========================================

Sentence and corpus scoring, clipping, smoothing, and the verifiable
report document the evaluation drivers emit.
"""

import json

from robodata import PredictionRecord, QAPair, bleu_n, corpus_bleu, tokenize
from robodata.reporting import build_report, evaluate_planning, planning_item_key, render_report, verify_report

print("tokenize('Pick up the red block!') ->", tokenize("Pick up the red block!"))

# clipping in action: the candidate repeats "the", the reference has one
print(f"\nbleu-1 'the the the' vs 'the cat' = {bleu_n('the the the', ['the cat'], 1):.4f}  (1/3, clipped)")

# perfect match scores 1.0 at every order
for n in (1, 2, 3, 4):
    assert bleu_n("place the cup on the shelf", ["place the cup on the shelf"], n) == 1.0
print("identical sentences score 1.0 for n = 1..4")

# corpus scoring pools n-gram statistics over all pairs BEFORE the
# geometric mean; it is not an average of sentence scores
pairs = [
    ("pick up the sponge", ["pick up the sponge"]),
    ("move it to the sink slowly", ["move it to the sink"]),
    ("turn the faucet", ["turn on the faucet"]),
]
for n in (1, 2, 4):
    plain = corpus_bleu(pairs, n)
    smoothed = corpus_bleu(pairs, n, smooth="add-one")
    print(f"corpus bleu-{n}: {plain:.4f}  (add-one: {smoothed:.4f})")

# the evaluation driver joins predictions to ground truth and emits a
# report whose aggregates can be recomputed from its per-item section
gts = [
    QAPair("what comes next?", "pour the water", "planning", 0, "ep-1"),
    QAPair("what comes next?", "stir the pot", "planning", 2, "ep-2"),
]
preds = [
    PredictionRecord(planning_item_key(gts[0]), "planning", "pour the water"),
    PredictionRecord(planning_item_key(gts[1]), "planning", "stir the soup"),
]
aggregates, per_item = evaluate_planning(preds, gts)
report = build_report("planning", {"bleu": "1,2,3,4"}, aggregates, per_item,
                      created_at="2026-01-01T00:00:00Z")
verify_report(report)  # raises if any aggregate drifts from per_item
print("\nreport verifies; aggregates:")
print(json.dumps(report["aggregates"]["bleu"], indent=2))
print(f"rendered report is {len(render_report(report))} bytes, byte-stable under a pinned timestamp")
