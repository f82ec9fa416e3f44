"""
BLEU with clipped n-gram precision and brevity penalty.

Orders for which the hypothesis has no n-grams at all (a hypothesis shorter
than n) are left out of the geometric mean, so any non-empty hypothesis scores
100 against itself.
"""

import math
from collections import Counter
from typing import Hashable, List, NamedTuple, Sequence

from speechlm_runtime.errors import ConfigError

SMOOTHING_NONE = "none"
SMOOTHING_FLOOR = "floor"
SMOOTHING_ADD_ONE = "add-one"
SMOOTHING_METHODS = (SMOOTHING_NONE, SMOOTHING_FLOOR, SMOOTHING_ADD_ONE)

FLOOR_VALUE = 0.1

Tokens = Sequence[Hashable]


class BleuStats(NamedTuple):
    matches: List[int]
    totals: List[int]
    hyp_len: int
    ref_len: int


def ngram_counts(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def closest_ref_length(refs: Sequence[Tokens], hyp_len: int) -> int:
    """Reference length closest to the hypothesis; the shorter wins ties."""
    return min((abs(len(r) - hyp_len), len(r)) for r in refs)[1]


def sentence_stats(refs: Sequence[Tokens], hyp: Tokens, max_n: int = 4) -> BleuStats:
    matches, totals = [], []
    for n in range(1, max_n + 1):
        hyp_counts = ngram_counts(hyp, n)
        max_ref = Counter()
        for ref in refs:
            for gram, count in ngram_counts(ref, n).items():
                max_ref[gram] = max(max_ref[gram], count)
        matches.append(sum(min(c, max_ref[g]) for g, c in hyp_counts.items()))
        totals.append(sum(hyp_counts.values()))
    ref_len = closest_ref_length(refs, len(hyp)) if refs else 0
    return BleuStats(matches, totals, len(hyp), ref_len)


def score_stats(stats: BleuStats, smoothing: str = SMOOTHING_NONE) -> float:
    if smoothing not in SMOOTHING_METHODS:
        raise ConfigError(f"unknown BLEU smoothing {smoothing!r}, expected one of {SMOOTHING_METHODS}")
    if stats.hyp_len == 0:
        return 0.0

    log_precisions = []
    for order, (match, total) in enumerate(zip(stats.matches, stats.totals), start=1):
        if total == 0:
            continue
        if match == 0:
            if smoothing == SMOOTHING_FLOOR:
                log_precisions.append(math.log(FLOOR_VALUE / total))
                continue
            if smoothing == SMOOTHING_ADD_ONE and order > 1:
                log_precisions.append(math.log(1.0 / (total + 1)))
                continue
            return 0.0
        if smoothing == SMOOTHING_ADD_ONE and order > 1:
            log_precisions.append(math.log((match + 1) / (total + 1)))
        else:
            log_precisions.append(math.log(match / total))

    if stats.hyp_len >= stats.ref_len:
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - stats.ref_len / stats.hyp_len)
    return 100.0 * brevity * math.exp(sum(log_precisions) / len(log_precisions))


def bleu(refs: Sequence[Tokens], hyp: Tokens, max_n: int = 4, smoothing: str = SMOOTHING_NONE) -> float:
    """
    Sentence BLEU against one or more references.

    Args:
        refs: Reference token lists
        hyp: Hypothesis tokens
        max_n: Highest n-gram order
        smoothing: "none", "floor" or "add-one"

    Returns:
        Score in [0, 100]; 0.0 for an empty hypothesis
    """
    return score_stats(sentence_stats(refs, hyp, max_n), smoothing)


def corpus_bleu(
    refs_per_sentence: Sequence[Sequence[Tokens]],
    hyps: Sequence[Tokens],
    max_n: int = 4,
    smoothing: str = SMOOTHING_NONE,
) -> float:
    """Corpus BLEU: n-gram counts and lengths are summed before scoring."""
    if len(refs_per_sentence) != len(hyps):
        raise ConfigError(
            f"corpus BLEU needs one reference set per hypothesis ({len(refs_per_sentence)} != {len(hyps)})"
        )
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = ref_len = 0
    for refs, hyp in zip(refs_per_sentence, hyps):
        stats = sentence_stats(refs, hyp, max_n)
        for i in range(max_n):
            matches[i] += stats.matches[i]
            totals[i] += stats.totals[i]
        hyp_len += stats.hyp_len
        ref_len += stats.ref_len
    return score_stats(BleuStats(matches, totals, hyp_len, ref_len), smoothing)
