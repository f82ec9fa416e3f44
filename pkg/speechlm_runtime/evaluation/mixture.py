"""
Test-clip construction: question speech placed before or after source audio,
or mixed on top of it.
"""

import random
from typing import Optional, Sequence

import numpy as np

from speechlm_runtime.audio.pcm import PcmClip
from speechlm_runtime.errors import ConfigError, RateMismatch

BEFORE = "before"
AFTER = "after"
CONCAT = "concat"
MIX = "mix"


def random_placement(rng: random.Random) -> str:
    return rng.choice((BEFORE, AFTER))


def _check_rates(clips: Sequence[PcmClip]):
    rates = {c.sample_rate for c in clips}
    if len(rates) > 1:
        raise RateMismatch(f"clips have different sample rates: {sorted(rates)}")


def mix_clips(clips: Sequence[PcmClip]) -> PcmClip:
    """
    Sample-wise sum, zero-padded to the longest clip.

    Scaled down to a peak of 1.0 only when the sum exceeds it.
    """
    _check_rates(clips)
    length = max(len(c) for c in clips)
    total = np.zeros(length, dtype=np.float64)
    for clip in clips:
        total[: len(clip)] += clip.samples
    peak = float(np.max(np.abs(total))) if length else 0.0
    if peak > 1.0:
        total /= peak
    return PcmClip(total, clips[0].sample_rate)


def build_mixture(
    audios: Sequence[PcmClip],
    speech: PcmClip,
    placement: str = BEFORE,
    mode: str = CONCAT,
    rng: Optional[random.Random] = None,
) -> PcmClip:
    """
    Combine source audio with question speech.

    Args:
        audios: Source clips, kept in order
        speech: Question speech
        placement: "before" or "after" the source audio; ignored when mixing
        mode: "concat" or "mix"
        rng: When given, the placement is drawn from it

    Returns:
        Combined clip

    Raises:
        RateMismatch: sample rates differ
    """
    clips = list(audios) + [speech]
    _check_rates(clips)
    if rng is not None:
        placement = random_placement(rng)
    if placement not in (BEFORE, AFTER):
        raise ConfigError(f"placement must be 'before' or 'after', got {placement!r}")
    if mode == MIX:
        return mix_clips(clips)
    if mode != CONCAT:
        raise ConfigError(f"mixture mode must be 'concat' or 'mix', got {mode!r}")
    ordered = [speech] + list(audios) if placement == BEFORE else list(audios) + [speech]
    return PcmClip.concat(ordered)
