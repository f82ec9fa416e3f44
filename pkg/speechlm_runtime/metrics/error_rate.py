"""
Edit distance and word/character error rates.
"""

import unicodedata
from dataclasses import dataclass
from typing import Hashable, Iterable, List, NamedTuple, Sequence, Tuple

from speechlm_runtime.errors import ConfigError, EmptyReference
from speechlm_runtime.metrics.report import MetricReport

ENGLISH_WORDS = "english_words"
CHINESE_CHARS = "chinese_chars"


@dataclass(frozen=True)
class NormalizationProfile:
    """
    Text normalization applied before counting errors.

    english_words compares whitespace-separated words; chinese_chars compares
    characters after removing all whitespace.
    """

    mode: str = ENGLISH_WORDS
    lowercase: bool = True
    strip_punctuation: bool = True
    version: int = 1

    def __post_init__(self):
        if self.mode not in (ENGLISH_WORDS, CHINESE_CHARS):
            raise ConfigError(f"unknown normalization mode: {self.mode!r}")

    @property
    def unit_name(self) -> str:
        return "wer" if self.mode == ENGLISH_WORDS else "cer"

    def units(self, text: str) -> List[str]:
        if self.lowercase:
            text = text.lower()
        if self.strip_punctuation:
            text = "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))
        if self.mode == ENGLISH_WORDS:
            return text.split()
        return [ch for ch in text if not ch.isspace()]


ENGLISH = NormalizationProfile(ENGLISH_WORDS)
CHINESE = NormalizationProfile(CHINESE_CHARS)


def profile_for(name: str) -> NormalizationProfile:
    if name in ("wer", ENGLISH_WORDS, "english", "en"):
        return ENGLISH
    if name in ("cer", CHINESE_CHARS, "chinese", "zh"):
        return CHINESE
    raise ConfigError(f"unknown normalization profile: {name!r}")


class EditCounts(NamedTuple):
    distance: int
    substitutions: int
    insertions: int
    deletions: int


def edit_distance(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> EditCounts:
    """
    Levenshtein distance with unit costs, decomposed into S/I/D.

    Args:
        ref: Reference units
        hyp: Hypothesis units

    Returns:
        EditCounts with substitutions + insertions + deletions == distance
    """
    n, m = len(ref), len(hyp)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = 0 if ref[i - 1] == hyp[j - 1] else 1
            d[i][j] = min(d[i - 1][j - 1] + cost, d[i - 1][j] + 1, d[i][j - 1] + 1)

    subs = ins = dels = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and d[i][j] == d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            subs += ref[i - 1] != hyp[j - 1]
            i, j = i - 1, j - 1
        elif i > 0 and d[i][j] == d[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditCounts(d[n][m], subs, ins, dels)


def wer(ref_text: str, hyp_text: str, profile: NormalizationProfile = ENGLISH) -> float:
    """
    Error rate in percent: 100 * (S + I + D) / reference units.

    Raises:
        EmptyReference: reference has no units after normalization
    """
    ref = profile.units(ref_text)
    if not ref:
        raise EmptyReference("reference is empty after normalization")
    return 100.0 * edit_distance(ref, profile.units(hyp_text)).distance / len(ref)


def cer(ref_text: str, hyp_text: str) -> float:
    return wer(ref_text, hyp_text, CHINESE)


def corpus_error_rate(
    pairs: Iterable[Tuple[str, str]],
    profile: NormalizationProfile = ENGLISH,
) -> MetricReport:
    """
    Corpus error rate: total edits over total reference units.

    Pairs whose reference normalizes to nothing are skipped and counted in
    the breakdown.
    """
    edits = units = subs = ins = dels = skipped = 0
    for ref_text, hyp_text in pairs:
        ref = profile.units(ref_text)
        if not ref:
            skipped += 1
            continue
        counts = edit_distance(ref, profile.units(hyp_text))
        edits += counts.distance
        units += len(ref)
        subs += counts.substitutions
        ins += counts.insertions
        dels += counts.deletions
    report = MetricReport.ratio(profile.unit_name, edits, units)
    report.breakdown.update(
        {"substitutions": subs, "insertions": ins, "deletions": dels, "skipped": skipped}
    )
    return report
