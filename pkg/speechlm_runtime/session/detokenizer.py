"""
Audio detokenizers: audio token ids back to a waveform.
"""

from typing import Dict, Sequence

import numpy as np

from speechlm_runtime.audio.pcm import DEFAULT_SAMPLE_RATE, PcmClip
from speechlm_runtime.errors import ConfigError
from speechlm_runtime.interleave.codec import AUDIO_VOCAB_SIZE


class Detokenizer:
    sample_rate: int = DEFAULT_SAMPLE_RATE
    token_rate: int = 25

    def synthesize(self, audio_tokens: Sequence[int]) -> PcmClip:
        raise NotImplementedError


class SineDetokenizer(Detokenizer):
    """
    Maps each token id to a fixed sine chunk, so output length and content
    are exact functions of the token sequence.

    Token k becomes sample_rate / token_rate samples of a sine at
    100 + k * step Hz, where the step spreads the audio vocabulary over
    100 Hz to 45% of the sample rate so every id below the vocabulary size
    gets its own frequency under Nyquist.
    """

    amplitude = 0.3

    def __init__(
        self,
        sample_rate: int = DEFAULT_SAMPLE_RATE,
        token_rate: int = 25,
        vocab_size: int = AUDIO_VOCAB_SIZE,
    ):
        if token_rate <= 0 or sample_rate % token_rate:
            raise ConfigError(
                f"sample_rate {sample_rate} must be a multiple of token_rate {token_rate}"
            )
        self.sample_rate = sample_rate
        self.token_rate = token_rate
        self.samples_per_token = sample_rate // token_rate
        self.step_hz = (0.45 * sample_rate - 100.0) / vocab_size
        self._chunks: Dict[int, np.ndarray] = {}
        self._t = np.arange(self.samples_per_token) / sample_rate

    def frequency(self, token_id: int) -> float:
        return 100.0 + token_id * self.step_hz

    def chunk(self, token_id: int) -> np.ndarray:
        key = int(token_id)
        chunk = self._chunks.get(key)
        if chunk is None:
            frequency = self.frequency(key)
            chunk = (self.amplitude * np.sin(2 * np.pi * frequency * self._t)).astype(np.float32)
            self._chunks[key] = chunk
        return chunk

    def synthesize(self, audio_tokens: Sequence[int]) -> PcmClip:
        if len(audio_tokens) == 0:
            return PcmClip(np.zeros(0, dtype=np.float32), self.sample_rate)
        return PcmClip(np.concatenate([self.chunk(t) for t in audio_tokens]), self.sample_rate)
