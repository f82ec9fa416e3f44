"""
Generator backends.

A backend turns a prefill context into a stream of events. Generation pauses
at a ToolCallSpan: the runtime resolves the call and calls generate() again
with the retrieved information appended, so a backend reads the current tool
round from the context it is given.

Backends are chosen by a URI-style spec:

    stub:               echo the number of feature frames heard
    scripted:<path>     replay turns from a JSON script
"""

import json
import os
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Union

from speechlm_runtime.errors import ConfigError, DatasetError
from speechlm_runtime.interleave.codec import Channel, InterleaveConfig, mux
from speechlm_runtime.interleave.text import ByteTokenizer
from speechlm_runtime.log import get_logger
from speechlm_runtime.session.segments import Segment, SegmentKind
from speechlm_runtime.tools.calls import ToolCall

logger = get_logger("session.backends")

_text_tokenizer = ByteTokenizer()


@dataclass(frozen=True)
class TextToken:
    id: int


@dataclass(frozen=True)
class AudioToken:
    id: int


@dataclass(frozen=True)
class ThinkStart:
    pass


@dataclass(frozen=True)
class ThinkEnd:
    pass


@dataclass(frozen=True)
class ToolCallSpan:
    text: str


@dataclass(frozen=True)
class EndOfTurn:
    pass


Event = Union[TextToken, AudioToken, ThinkStart, ThinkEnd, ToolCallSpan, EndOfTurn]


def event_to_list(event: Event) -> list:
    """Compact JSON form used by scripts and transcripts."""
    if isinstance(event, TextToken):
        return ["text", event.id]
    if isinstance(event, AudioToken):
        return ["audio", event.id]
    if isinstance(event, ThinkStart):
        return ["think_start"]
    if isinstance(event, ThinkEnd):
        return ["think_end"]
    if isinstance(event, ToolCallSpan):
        return ["tool_call", event.text]
    if isinstance(event, EndOfTurn):
        return ["end"]
    raise TypeError(f"not a backend event: {event!r}")


def event_from_list(item: Sequence) -> Event:
    if not item:
        raise DatasetError("empty event record")
    kind = item[0]
    if kind == "text":
        return TextToken(int(item[1]))
    if kind == "audio":
        return AudioToken(int(item[1]))
    if kind == "think_start":
        return ThinkStart()
    if kind == "think_end":
        return ThinkEnd()
    if kind == "tool_call":
        return ToolCallSpan(str(item[1]))
    if kind == "end":
        return EndOfTurn()
    raise DatasetError(f"unknown event kind: {kind!r}")


class GeneratorBackend:
    """Interface: context segments in, event stream out."""

    def generate(self, context: List[Segment]) -> Iterator[Event]:
        raise NotImplementedError


def _current_round(context: Sequence[Segment]) -> int:
    """Retrieved segments after the last AudioFeatures segment."""
    rounds = 0
    for segment in reversed(context):
        if segment.kind == SegmentKind.AUDIO_FEATURES:
            return rounds
        if segment.kind == SegmentKind.RETRIEVED_INFO:
            rounds += 1
    return rounds


def _current_frames(context: Sequence[Segment]) -> int:
    for segment in reversed(context):
        if segment.kind == SegmentKind.AUDIO_FEATURES:
            return segment.count
    return 0


def output_events(text: Sequence[int], audio: Sequence[int], cfg: InterleaveConfig) -> List[Event]:
    """Interleave text and audio ids the way a decoder emits them."""
    events: List[Event] = []
    for token in mux(text, audio, cfg):
        if token.channel == Channel.TEXT:
            events.append(TextToken(token.id))
        else:
            events.append(AudioToken(token.id))
    return events


class StubBackend(GeneratorBackend):
    """Answers every turn with "heard <n> frames" and one audio token per frame."""

    def __init__(self, cfg: InterleaveConfig = InterleaveConfig()):
        self.cfg = cfg

    def generate(self, context: List[Segment]) -> Iterator[Event]:
        frames = _current_frames(context)
        text = _text_tokenizer.encode(f"heard {frames} frames")
        audio = [i % self.cfg.audio_pad for i in range(frames)]
        yield from output_events(text, audio, self.cfg)
        yield EndOfTurn()


def _script_ids(value) -> List[int]:
    if value is None:
        return []
    if isinstance(value, str):
        return _text_tokenizer.encode(value)
    return [int(v) for v in value]


def _script_call(value) -> str:
    if isinstance(value, str):
        return value
    return ToolCall.unchecked(value["name"], value.get("arguments", {})).to_wire()


class ScriptedBackend(GeneratorBackend):
    """
    Deterministic backend replaying a list of turn scripts.

    Each turn script may hold:
        think:      thinking text emitted before anything else
        tool_calls: calls (objects or wire strings), one per generation round
        text:       answer text (string, byte-tokenized, or id list)
        audio:      answer audio token ids
        events:     raw event list replacing the answer, e.g. [["text", 72], ["end"]]

    One instance serves one session: turns are counted as they start, and the
    last script repeats once the list runs out.
    """

    def __init__(self, turns: Sequence[Dict[str, object]], cfg: InterleaveConfig = InterleaveConfig()):
        if not turns:
            raise DatasetError("a scripted backend needs at least one turn")
        self.turns = list(turns)
        self.cfg = cfg
        self._turn = -1

    @property
    def turns_started(self) -> int:
        return self._turn + 1

    def generate(self, context: List[Segment]) -> Iterator[Event]:
        round_index = _current_round(context)
        if round_index == 0:
            self._turn += 1
        script = self.turns[min(max(self._turn, 0), len(self.turns) - 1)]
        calls = script.get("tool_calls") or []

        if round_index == 0 and script.get("think"):
            yield ThinkStart()
            for token_id in _script_ids(script["think"]):
                yield TextToken(token_id)
            yield ThinkEnd()

        if round_index < len(calls):
            yield ToolCallSpan(_script_call(calls[round_index]))
            return

        if script.get("events") is not None:
            for item in script["events"]:
                yield event_from_list(item)
            return
        yield from output_events(_script_ids(script.get("text")), _script_ids(script.get("audio")), self.cfg)
        yield EndOfTurn()


class ReplayBackend(GeneratorBackend):
    """Yields recorded event rounds in order, ignoring the context."""

    def __init__(self, rounds: Sequence[Sequence[Event]]):
        self._rounds = list(rounds)
        self._next = 0

    def generate(self, context: List[Segment]) -> Iterator[Event]:
        if self._next >= len(self._rounds):
            raise DatasetError("transcript has no more recorded generation rounds")
        events = self._rounds[self._next]
        self._next += 1
        yield from events


BackendFactory = Callable[[str], GeneratorBackend]


def load_script(path: str) -> Dict[str, object]:
    """
    Read a script file: {"default": {"turns": [...]}, "sessions": {key: {"turns": [...]}}}.

    A bare {"turns": [...]} is taken as the default script.
    """
    if not os.path.exists(path):
        raise ConfigError(f"backend script not found: {path}")
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise DatasetError(f"{path}: {e}")
    if "turns" in data:
        data = {"default": {"turns": data["turns"]}}
    return data


def scripted_factory(script: Dict[str, object], cfg: InterleaveConfig = InterleaveConfig()) -> BackendFactory:
    sessions = script.get("sessions", {})
    default = script.get("default")

    def create(session_key: str) -> GeneratorBackend:
        entry = sessions.get(session_key, default)
        if entry is None:
            raise DatasetError(f"script has no turns for session {session_key!r} and no default")
        return ScriptedBackend(entry["turns"], cfg)

    return create


def create_backend_factory(spec: str, cfg: InterleaveConfig = InterleaveConfig()) -> BackendFactory:
    """
    Resolve a backend spec into a per-session factory.

    Args:
        spec: "stub:" or "scripted:<path>"
        cfg: Interleave configuration the backend emits

    Returns:
        Callable taking a session key and returning a fresh backend
    """
    scheme, _, target = spec.partition(":")
    if scheme == "stub":
        return lambda session_key: StubBackend(cfg)
    if scheme == "scripted":
        if not target:
            raise ConfigError("scripted backend needs a script path: scripted:<path>")
        script = load_script(target)
        logger.info(f"Loaded backend script path={target} sessions={len(script.get('sessions', {}))}")
        return scripted_factory(script, cfg)
    raise ConfigError(f"unknown backend spec: {spec!r}")


def backend_for(spec: str, session_key: str, cfg: Optional[InterleaveConfig] = None) -> GeneratorBackend:
    return create_backend_factory(spec, cfg or InterleaveConfig())(session_key)
