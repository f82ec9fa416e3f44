"""
On-disk formats for token streams.

ILV1 binary files hold an interleaved sequence:

    header  "ILV1" + n_text, n_audio, text_pad, audio_pad   (uint32 LE each)
    body    per token: tag byte (0 = text, 1 = audio) + id (uint32 LE)

Plain token-list files hold one decimal id per line.
"""

import struct
from typing import List

from speechlm_runtime.errors import InputError, MalformedSequence
from speechlm_runtime.interleave.codec import (
    AUDIO_VOCAB_SIZE,
    Channel,
    InterleaveConfig,
    InterleavedSequence,
    Token,
)

MAGIC = b"ILV1"
_HEADER = struct.Struct("<4sIIII")
_TOKEN = struct.Struct("<BI")


def encode_sequence(seq: InterleavedSequence) -> bytes:
    cfg = seq.config
    parts = [_HEADER.pack(MAGIC, cfg.n_text, cfg.n_audio, cfg.text_pad, cfg.audio_pad)]
    parts.extend(_TOKEN.pack(int(t.channel), t.id) for t in seq.tokens)
    return b"".join(parts)


def decode_sequence(data: bytes, audio_vocab_size: int = AUDIO_VOCAB_SIZE) -> InterleavedSequence:
    """
    Parse ILV1 bytes into a validated sequence.

    Raises:
        MalformedSequence: bad magic, truncated body or invalid layout
    """
    if len(data) < _HEADER.size:
        raise MalformedSequence(0, "file shorter than ILV1 header")
    magic, n_text, n_audio, text_pad, audio_pad = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise MalformedSequence(0, f"bad magic {magic!r}")
    body = data[_HEADER.size :]
    if len(body) % _TOKEN.size:
        raise MalformedSequence(len(body) // _TOKEN.size, "truncated token record")
    cfg = InterleaveConfig(n_text, n_audio, text_pad, audio_pad, audio_vocab_size)
    tokens = []
    for index, (tag, token_id) in enumerate(_TOKEN.iter_unpack(body)):
        if tag not in (0, 1):
            raise MalformedSequence(index, f"unknown tag byte {tag}")
        tokens.append(Token(Channel(tag), token_id))
    return InterleavedSequence.from_tokens(tokens, cfg)


def write_sequence(path: str, seq: InterleavedSequence):
    with open(path, "wb") as f:
        f.write(encode_sequence(seq))


def read_sequence(path: str, audio_vocab_size: int = AUDIO_VOCAB_SIZE) -> InterleavedSequence:
    with open(path, "rb") as f:
        return decode_sequence(f.read(), audio_vocab_size)


def read_token_list(path: str) -> List[int]:
    with open(path, encoding="utf-8") as f:
        words = f.read().split()
    try:
        return [int(word) for word in words]
    except ValueError as e:
        raise InputError(f"{path}: token ids must be integers ({e})")


def write_token_list(path: str, ids: List[int]):
    with open(path, "w", encoding="utf-8") as f:
        f.writelines(f"{i}\n" for i in ids)
