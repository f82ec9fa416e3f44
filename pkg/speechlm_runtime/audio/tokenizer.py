"""
Deterministic stand-in for the speech tokenizer.

Real audio tokens come from a neural codec. For plumbing (voice-library WAVs,
fixtures) each 40 ms frame is mapped to an id derived from its quantized
log energy and zero-crossing count, always below the reserved pad id.
"""

from typing import List

import numpy as np

from speechlm_runtime.audio.pcm import PcmClip
from speechlm_runtime.interleave.codec import AUDIO_PAD


class StubAudioTokenizer:
    def __init__(self, token_rate: float = 25.0, vocab_limit: int = AUDIO_PAD):
        self.token_rate = token_rate
        self.vocab_limit = vocab_limit

    def encode(self, clip: PcmClip) -> List[int]:
        frame = max(1, int(round(clip.sample_rate / self.token_rate)))
        ids = []
        for start in range(0, len(clip), frame):
            chunk = clip.samples[start : start + frame].astype(np.float64)
            power = float(np.mean(chunk * chunk))
            level = 0 if power <= 0 else int(np.clip(60 + 10 * np.log10(power), 0, 63))
            crossings = int(np.count_nonzero(np.diff(np.signbit(chunk).astype(np.int8))))
            ids.append((level * 101 + crossings) % self.vocab_limit)
        return ids
