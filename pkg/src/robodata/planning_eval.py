"""Corpus-level BLEU for planning answers.

Clipped n-gram counts are summed across the corpus before the
geometric mean is taken, so the corpus score is not a mean of
sentence scores.  The tokenizer is deliberately plain: lowercase,
split on Unicode whitespace, strip leading/trailing ASCII punctuation
from each token.
"""

from __future__ import annotations

import math
import string
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

_PUNCT = string.punctuation

SMOOTHING_MODES = (None, "add-one")


def tokenize(text: str) -> list[str]:
    """Lowercase, whitespace-split, punctuation-stripped tokens.

    Tokens that are nothing but punctuation disappear, so the result
    is idempotent under re-joining with spaces.
    """
    out = []
    for raw in text.lower().split():
        tok = raw.strip(_PUNCT)
        if tok:
            out.append(tok)
    return out


def _ngrams(tokens: Sequence[str], k: int) -> Counter:
    return Counter(tuple(tokens[i : i + k]) for i in range(len(tokens) - k + 1))


@dataclass(frozen=True)
class PairStats:
    """Sufficient statistics for one candidate/reference pair.

    ``clipped[k-1]`` / ``total[k-1]`` are the clipped match count and
    candidate k-gram count; ``ref_len`` is the closest reference
    length (ties resolved toward the shorter reference).
    """

    clipped: tuple[int, ...]
    total: tuple[int, ...]
    cand_len: int
    ref_len: int


def pair_stats(candidate: str, references: Sequence[str], max_n: int) -> PairStats:
    """Compute clipped n-gram statistics for orders 1..max_n."""
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    if not references:
        raise ValueError("at least one reference is required")
    cand = tokenize(candidate)
    refs = [tokenize(r) for r in references]
    clipped = []
    total = []
    for k in range(1, max_n + 1):
        cand_counts = _ngrams(cand, k)
        max_ref: Counter = Counter()
        for ref in refs:
            for gram, count in _ngrams(ref, k).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        clipped.append(sum(min(count, max_ref[gram]) for gram, count in cand_counts.items()))
        total.append(max(0, len(cand) - k + 1))
    cand_len = len(cand)
    ref_len = min((abs(len(r) - cand_len), len(r)) for r in refs)[1]
    return PairStats(tuple(clipped), tuple(total), cand_len, ref_len)


def _score(stats: Sequence[PairStats], n: int, smooth: Optional[str]) -> float:
    if smooth not in SMOOTHING_MODES:
        raise ValueError(f"unknown smoothing mode {smooth!r}")
    cand_len = sum(s.cand_len for s in stats)
    ref_len = sum(s.ref_len for s in stats)
    if cand_len == 0:
        return 0.0
    log_sum = 0.0
    n_used = 0
    for k in range(n):
        clipped = sum(s.clipped[k] for s in stats)
        total = sum(s.total[k] for s in stats)
        if total == 0:
            # 0/0 precision: the corpus has no k-grams at this order at
            # all (every candidate shorter than k).  The order is
            # excluded from the geometric mean rather than zeroing the
            # score, so identical short pairs still score 1.0.
            continue
        if smooth == "add-one":
            clipped += 1
            total += 1
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total)
        n_used += 1
    # cand_len >= 1 guarantees order 1 always participates
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * math.exp(log_sum / n_used)


def bleu_n(candidate: str, references: Sequence[str], n: int, smooth: Optional[str] = None) -> float:
    """Sentence-level BLEU-n with uniform 1/n weights.

    Unsmoothed by default: any zero precision zeroes the score.  The
    brevity penalty is min(1, exp(1 - r/c)) with r the closest
    reference length.
    """
    if type(n) is not int or not 1 <= n <= 4:
        raise ValueError(f"n must be an integer in 1..4, got {n!r}")
    return _score([pair_stats(candidate, references, n)], n, smooth)


def corpus_bleu(
    pairs: Sequence[tuple[str, Sequence[str]]], n: int, smooth: Optional[str] = None
) -> float:
    """Corpus BLEU-n: statistics pooled over all pairs before combining.

    A singleton corpus scores identically to ``bleu_n`` on that pair.
    """
    if type(n) is not int or not 1 <= n <= 4:
        raise ValueError(f"n must be an integer in 1..4, got {n!r}")
    if not pairs:
        raise ValueError("corpus must contain at least one pair")
    stats = [pair_stats(cand, refs, n) for cand, refs in pairs]
    return _score(stats, n, smooth)


def score_from_stats(stats: Sequence[PairStats], n: int, smooth: Optional[str] = None) -> float:
    """Corpus score from precomputed pair statistics (orders >= n required)."""
    if type(n) is not int or not 1 <= n <= 4:
        raise ValueError(f"n must be an integer in 1..4, got {n!r}")
    for s in stats:
        if len(s.clipped) < n:
            raise ValueError("pair statistics do not cover the requested order")
    return _score(stats, n, smooth)
