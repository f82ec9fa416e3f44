"""
Context segments, turns and session state.

Every segment costs one unit of context budget per token or per adaptor
feature frame.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from speechlm_runtime.audio.frame_clock import FrameClock, feature_frames
from speechlm_runtime.audio.pcm import PcmClip
from speechlm_runtime.errors import InputError
from speechlm_runtime.interleave.codec import Channel, InterleavedSequence, Token
from speechlm_runtime.interleave.text import ByteTokenizer
from speechlm_runtime.tools.calls import ToolCall

_text_tokenizer = ByteTokenizer()


class SegmentKind(str, Enum):
    SYSTEM_TEXT = "SystemText"
    AUDIO_FEATURES = "AudioFeatures"
    RETRIEVED_INFO = "RetrievedInfo"
    INTERLEAVED_OUTPUT = "InterleavedOutput"
    THINKING_TEXT = "ThinkingText"


@dataclass(frozen=True)
class FeatureHandle:
    """Reference to adaptor features of a clip: content digest and frame count."""

    digest: str
    frames: int


@dataclass(frozen=True)
class Segment:
    kind: SegmentKind
    tokens: Tuple[Token, ...] = ()
    features: Optional[FeatureHandle] = None

    def __post_init__(self):
        if (self.kind == SegmentKind.AUDIO_FEATURES) != (self.features is not None):
            raise InputError("only AudioFeatures segments carry a feature handle")

    @property
    def count(self) -> int:
        if self.features is not None:
            return self.features.frames
        return len(self.tokens)

    @property
    def cost(self) -> int:
        return self.count

    @classmethod
    def system_text(cls, prompt: str) -> "Segment":
        tokens = tuple(Token.text(t) for t in _text_tokenizer.encode(prompt))
        return cls(SegmentKind.SYSTEM_TEXT, tokens)

    @classmethod
    def audio_features(cls, clip: PcmClip, clock: FrameClock = FrameClock()) -> "Segment":
        """Feature segment for a clip; raises EmptyAudio for an empty clip."""
        return cls(
            SegmentKind.AUDIO_FEATURES,
            features=FeatureHandle(clip.digest(), feature_frames(clip, clock)),
        )

    @classmethod
    def retrieved_info(cls, tokens: Sequence[Token]) -> "Segment":
        return cls(SegmentKind.RETRIEVED_INFO, tuple(tokens))

    @classmethod
    def interleaved_output(cls, seq: InterleavedSequence) -> "Segment":
        return cls(SegmentKind.INTERLEAVED_OUTPUT, seq.tokens)

    @classmethod
    def thinking_text(cls, ids: Sequence[int]) -> "Segment":
        return cls(SegmentKind.THINKING_TEXT, tuple(Token.text(i) for i in ids))

    def to_dict(self) -> Dict[str, object]:
        data: Dict[str, object] = {"kind": self.kind.value, "count": self.count}
        if self.features is not None:
            data["digest"] = self.features.digest
        else:
            data["tokens"] = [[int(t.channel), t.id] for t in self.tokens]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "Segment":
        kind = SegmentKind(data["kind"])
        if kind == SegmentKind.AUDIO_FEATURES:
            return cls(kind, features=FeatureHandle(data["digest"], int(data["count"])))
        tokens = tuple(Token(Channel(c), int(i)) for c, i in data.get("tokens", []))
        return cls(kind, tokens)


@dataclass(frozen=True)
class Turn:
    """
    One finished exchange: the user side is the audio features followed by one
    retrieved-information segment per tool call, in call order.
    """

    user: Tuple[Segment, ...]
    assistant: Segment
    tool_calls: Tuple[ToolCall, ...] = ()

    def __post_init__(self):
        if not self.user or self.user[0].kind != SegmentKind.AUDIO_FEATURES:
            raise InputError("a turn must begin with one AudioFeatures segment")
        if any(s.kind != SegmentKind.RETRIEVED_INFO for s in self.user[1:]):
            raise InputError("only RetrievedInfo segments may follow the turn's audio")
        if len(self.user) - 1 != len(self.tool_calls):
            raise InputError(
                f"turn has {len(self.user) - 1} retrieved segments for {len(self.tool_calls)} tool calls"
            )
        if self.assistant.kind != SegmentKind.INTERLEAVED_OUTPUT:
            raise InputError("the assistant side of a turn is an InterleavedOutput segment")

    @property
    def segments(self) -> List[Segment]:
        return list(self.user) + [self.assistant]

    @property
    def cost(self) -> int:
        return sum(s.cost for s in self.user) + self.assistant.cost


@dataclass
class SessionState:
    """
    Conversation history of one session.

    Mutated only by the thread driving the session.
    """

    system_prompt: Segment
    budget: int
    turns: List[Turn] = field(default_factory=list)

    @classmethod
    def create(cls, system_prompt: str, budget: int) -> "SessionState":
        return cls(Segment.system_text(system_prompt), budget)

    @property
    def cost(self) -> int:
        return self.system_prompt.cost + sum(t.cost for t in self.turns)
