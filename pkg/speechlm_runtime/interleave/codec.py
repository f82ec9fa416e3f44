"""
Fixed-ratio multiplexing of text and audio token streams.

The decoder emits blocks of `n_text` text tokens followed by `n_audio` audio
tokens. When one channel runs out before the other, its remaining slots are
filled with that channel's pad token so every block is complete.
"""

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, List, NamedTuple, Sequence, Tuple

from speechlm_runtime.errors import ConfigError, InvalidToken, MalformedSequence

AUDIO_VOCAB_SIZE = 6600
# Byte-level text ids occupy 0..255; the pad is the first id after them.
TEXT_PAD = 256
AUDIO_PAD = AUDIO_VOCAB_SIZE - 1


class Channel(IntEnum):
    TEXT = 0
    AUDIO = 1


class Token(NamedTuple):
    channel: Channel
    id: int

    @classmethod
    def text(cls, token_id: int) -> "Token":
        return cls(Channel.TEXT, int(token_id))

    @classmethod
    def audio(cls, token_id: int) -> "Token":
        return cls(Channel.AUDIO, int(token_id))


@dataclass(frozen=True)
class InterleaveConfig:
    """
    Ratio and vocabulary symbols of the interleaved stream.

    The ratio is mandatory in spirit; 1:3 is the documented default since
    speech token rates exceed text token rates.
    """

    n_text: int = 1
    n_audio: int = 3
    text_pad: int = TEXT_PAD
    audio_pad: int = AUDIO_PAD
    audio_vocab_size: int = AUDIO_VOCAB_SIZE

    def __post_init__(self):
        if self.n_text < 1 or self.n_audio < 1:
            raise ConfigError(
                f"interleave ratio must be positive, got {self.n_text}:{self.n_audio}"
            )
        if self.text_pad < 0:
            raise ConfigError(f"text_pad must be a valid text id, got {self.text_pad}")
        if not 0 <= self.audio_pad < self.audio_vocab_size:
            raise ConfigError(
                f"audio_pad {self.audio_pad} outside audio vocabulary of {self.audio_vocab_size}"
            )

    @property
    def block_size(self) -> int:
        return self.n_text + self.n_audio

    def pad_for(self, channel: Channel) -> int:
        return self.text_pad if channel == Channel.TEXT else self.audio_pad

    def channel_at(self, position: int) -> Channel:
        """Channel expected at an absolute position of the stream."""
        return Channel.TEXT if position % self.block_size < self.n_text else Channel.AUDIO


def interleaved_length(text_len: int, audio_len: int, cfg: InterleaveConfig) -> int:
    """Closed form of the mux block rule: B * (n_text + n_audio)."""
    blocks = max(-(-text_len // cfg.n_text), -(-audio_len // cfg.n_audio))
    return blocks * cfg.block_size


@dataclass(frozen=True)
class InterleavedSequence:
    """
    A validated interleaved token stream.

    Construct through mux() or from_tokens()/from_stream(); the constructor
    itself does not validate.
    """

    tokens: Tuple[Token, ...]
    config: InterleaveConfig

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def num_blocks(self) -> int:
        return len(self.tokens) // self.config.block_size

    @classmethod
    def from_tokens(cls, tokens: Iterable[Token], cfg: InterleaveConfig):
        """Validate a complete stream and wrap it."""
        tokens = tuple(Token(Channel(t[0]), int(t[1])) for t in tokens)
        validate(tokens, cfg)
        return cls(tokens, cfg)

    @classmethod
    def from_stream(cls, tokens: Iterable[Token], cfg: InterleaveConfig):
        """
        Pad a possibly truncated final block and validate.

        Generators stop at end-of-turn without completing the last block; the
        missing slots get the pad of whichever channel the slot belongs to.
        """
        tokens = [Token(Channel(t[0]), int(t[1])) for t in tokens]
        remainder = len(tokens) % cfg.block_size
        if remainder:
            for position in range(len(tokens), len(tokens) + cfg.block_size - remainder):
                channel = cfg.channel_at(position)
                tokens.append(Token(channel, cfg.pad_for(channel)))
        return cls.from_tokens(tokens, cfg)

    def to_ids(self) -> List[int]:
        """Id-offset view: text ids as-is, audio ids shifted past the text range."""
        offset = text_id_span(self.config)
        return [t.id if t.channel == Channel.TEXT else offset + t.id for t in self.tokens]

    @classmethod
    def from_ids(cls, ids: Sequence[int], cfg: InterleaveConfig):
        """Inverse of to_ids()."""
        offset = text_id_span(cfg)
        tokens = [Token.audio(i - offset) if i >= offset else Token.text(i) for i in ids]
        return cls.from_tokens(tokens, cfg)


def text_id_span(cfg: InterleaveConfig) -> int:
    """Number of ids reserved for text (byte vocabulary plus the text pad)."""
    return max(TEXT_PAD, cfg.text_pad) + 1


def mux(text: Sequence[int], audio: Sequence[int], cfg: InterleaveConfig) -> InterleavedSequence:
    """
    Multiplex text and audio tokens into the fixed-ratio interleaved sequence.

    Args:
        text: Text token ids in order
        audio: Audio token ids in order
        cfg: Interleave configuration

    Returns:
        InterleavedSequence of length B * (n_text + n_audio)

    Raises:
        InvalidToken: an audio id is outside the audio vocabulary, a text id is
            negative, or either channel carries its own pad id
    """
    for index, token_id in enumerate(text):
        if token_id < 0:
            raise InvalidToken(index, token_id, "is negative", channel="text")
        if token_id == cfg.text_pad:
            raise InvalidToken(index, token_id, "is the text pad id", channel="text")
    for index, token_id in enumerate(audio):
        if not 0 <= token_id < cfg.audio_vocab_size:
            raise InvalidToken(index, token_id, f"is outside the vocabulary of size {cfg.audio_vocab_size}")
        if token_id == cfg.audio_pad:
            raise InvalidToken(index, token_id, "is the audio pad id")

    blocks = interleaved_length(len(text), len(audio), cfg) // cfg.block_size
    tokens = []
    for b in range(blocks):
        for i in range(b * cfg.n_text, (b + 1) * cfg.n_text):
            tokens.append(Token.text(text[i] if i < len(text) else cfg.text_pad))
        for i in range(b * cfg.n_audio, (b + 1) * cfg.n_audio):
            tokens.append(Token.audio(audio[i] if i < len(audio) else cfg.audio_pad))
    return InterleavedSequence(tuple(tokens), cfg)


def validate(tokens: Sequence[Token], cfg: InterleaveConfig):
    """
    Check block length, tag pattern and pad placement.

    Raises:
        MalformedSequence: with the first offending position
    """
    if len(tokens) % cfg.block_size:
        raise MalformedSequence(
            len(tokens), f"length {len(tokens)} is not a multiple of block size {cfg.block_size}"
        )
    padding_started = {Channel.TEXT: False, Channel.AUDIO: False}
    for position, (channel, token_id) in enumerate(tokens):
        expected = cfg.channel_at(position)
        if channel != expected:
            raise MalformedSequence(position, f"expected {expected.name} token, got {channel.name}")
        if channel == Channel.AUDIO and not 0 <= token_id < cfg.audio_vocab_size:
            raise MalformedSequence(position, f"audio id {token_id} outside vocabulary")
        is_pad = token_id == cfg.pad_for(channel)
        if is_pad:
            padding_started[channel] = True
        elif padding_started[channel]:
            raise MalformedSequence(position, f"{channel.name} token after padding began")


def demux(seq: InterleavedSequence, strip_padding: bool = True) -> Tuple[List[int], List[int]]:
    """
    Split an interleaved sequence back into its text and audio channels.

    Args:
        seq: Interleaved sequence
        strip_padding: Drop the trailing pad run of each channel

    Returns:
        (text ids, audio ids)

    Raises:
        MalformedSequence: length or tag pattern violation
    """
    cfg = seq.config
    validate(seq.tokens, cfg)
    text = [t.id for t in seq.tokens if t.channel == Channel.TEXT]
    audio = [t.id for t in seq.tokens if t.channel == Channel.AUDIO]
    if strip_padding:
        text = _strip_trailing(text, cfg.text_pad)
        audio = _strip_trailing(audio, cfg.audio_pad)
    return text, audio


def _strip_trailing(ids: List[int], pad: int) -> List[int]:
    end = len(ids)
    while end and ids[end - 1] == pad:
        end -= 1
    return ids[:end]
