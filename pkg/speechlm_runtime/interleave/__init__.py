from speechlm_runtime.interleave.codec import (
    AUDIO_PAD,
    AUDIO_VOCAB_SIZE,
    TEXT_PAD,
    Channel,
    InterleaveConfig,
    InterleavedSequence,
    Token,
    demux,
    interleaved_length,
    mux,
)
from speechlm_runtime.interleave.text import ByteTokenizer

__all__ = [
    "AUDIO_PAD",
    "AUDIO_VOCAB_SIZE",
    "TEXT_PAD",
    "ByteTokenizer",
    "Channel",
    "InterleaveConfig",
    "InterleavedSequence",
    "Token",
    "demux",
    "interleaved_length",
    "mux",
]
