"""
Turn execution: VAD gate, feature extraction, generation with tool rounds,
detokenization and history update.
"""

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from speechlm_runtime.audio.frame_clock import FrameClock
from speechlm_runtime.audio.pcm import PcmClip
from speechlm_runtime.audio.vad import VadConfig, has_speech
from speechlm_runtime.config import ServiceConfig
from speechlm_runtime.errors import BackendProtocolError, MalformedSequence, SilenceRejected, ToolCallError
from speechlm_runtime.interleave.codec import InterleaveConfig, InterleavedSequence, Token, demux
from speechlm_runtime.interleave.text import ByteTokenizer
from speechlm_runtime.log import get_logger
from speechlm_runtime.session.backends import (
    AudioToken,
    EndOfTurn,
    Event,
    GeneratorBackend,
    TextToken,
    ThinkEnd,
    ThinkStart,
    ToolCallSpan,
    event_to_list,
)
from speechlm_runtime.session.context import assemble_context, trim_history
from speechlm_runtime.session.detokenizer import Detokenizer
from speechlm_runtime.session.segments import Segment, SessionState, Turn
from speechlm_runtime.tools.calls import ToolCall, parse_tool_call, parse_tool_call_lenient
from speechlm_runtime.tools.dispatcher import ToolDispatcher, ToolResult

logger = get_logger("session.runtime")

_text_tokenizer = ByteTokenizer()

# Listener receives TextToken, AudioToken, ToolCall and ToolResult objects in
# generation order; pads and thinking tokens are not forwarded.
Listener = Callable[[object], None]


@dataclass(frozen=True)
class TurnOptions:
    interleave: InterleaveConfig = InterleaveConfig()
    vad: VadConfig = VadConfig()
    frame_clock: FrameClock = FrameClock()
    max_tool_rounds: int = 8

    @classmethod
    def from_config(cls, cfg: ServiceConfig) -> "TurnOptions":
        return cls(
            interleave=InterleaveConfig(
                cfg.n_text, cfg.n_audio, cfg.text_pad, cfg.audio_pad, cfg.audio_vocab_size
            ),
            vad=VadConfig(
                cfg.vad_window_ms,
                cfg.vad_threshold_dbfs,
                cfg.vad_hangover_ms,
                cfg.vad_min_segment_ms,
            ),
            max_tool_rounds=cfg.max_tool_rounds,
        )


@dataclass(frozen=True)
class TurnResult:
    """
    Everything one turn produced.

    `rounds` holds the backend events consumed in each generation round; it
    is what a transcript records for replay.
    """

    text: Tuple[int, ...]
    audio_tokens: Tuple[int, ...]
    pcm: PcmClip
    tool_calls: Tuple[ToolCall, ...] = ()
    tool_results: Tuple[ToolResult, ...] = ()
    thinking: Tuple[int, ...] = ()
    rounds: Tuple[Tuple[Event, ...], ...] = field(default=(), compare=False)

    @property
    def text_str(self) -> str:
        return _text_tokenizer.decode(self.text)

    @property
    def thinking_tokens(self) -> int:
        return len(self.thinking)

    def pcm_digest(self) -> str:
        return hashlib.sha1(self.pcm.to_pcm16()).hexdigest()

    def to_dict(self) -> Dict[str, object]:
        return {
            "text": list(self.text),
            "text_str": self.text_str,
            "audio_tokens": list(self.audio_tokens),
            "pcm_samples": len(self.pcm),
            "pcm_sha1": self.pcm_digest(),
            "tool_calls": [c.to_dict() for c in self.tool_calls],
            "tool_results": [r.to_dict() for r in self.tool_results],
            "thinking_tokens": self.thinking_tokens,
        }


def _resolve_tool_call(span: str, tools: ToolDispatcher) -> Tuple[ToolCall, ToolResult]:
    try:
        call = parse_tool_call(span)
    except ToolCallError as e:
        call = parse_tool_call_lenient(span)
        logger.warning(f"Invalid tool call from backend tool={call.name} reason={e}")
        return call, ToolResult.error(call, str(e))
    return call, tools.dispatch(call)


def generate_turn(
    state: SessionState,
    current_audio: Segment,
    backend: GeneratorBackend,
    tools: ToolDispatcher,
    detok: Detokenizer,
    options: TurnOptions = TurnOptions(),
    listener: Optional[Listener] = None,
) -> TurnResult:
    """
    Run generation for one turn whose audio features are already extracted.

    The state is only changed once the turn completes; a failing turn leaves
    history as it was.

    Raises:
        ContextOverflow: the current turn does not fit the budget
        BackendProtocolError: the backend broke the event contract
    """
    cfg = options.interleave
    retrieved: List[Segment] = []
    calls: List[ToolCall] = []
    results: List[ToolResult] = []
    collected: List[Token] = []
    thinking: List[int] = []
    rounds: List[Tuple[Event, ...]] = []

    while True:
        context = assemble_context(state, current_audio, retrieved)
        consumed: List[Event] = []
        span: Optional[str] = None
        ended = False
        in_think = False
        for event in backend.generate(context):
            consumed.append(event)
            if isinstance(event, ThinkStart):
                in_think = True
            elif isinstance(event, ThinkEnd):
                in_think = False
            elif isinstance(event, TextToken):
                if in_think:
                    thinking.append(event.id)
                    continue
                collected.append(Token.text(event.id))
                if listener is not None and event.id != cfg.text_pad:
                    listener(event)
            elif isinstance(event, AudioToken):
                if in_think:
                    raise BackendProtocolError("audio token inside a thinking span", len(collected))
                collected.append(Token.audio(event.id))
                if listener is not None and event.id != cfg.audio_pad:
                    listener(event)
            elif isinstance(event, ToolCallSpan):
                span = event.text
                break
            elif isinstance(event, EndOfTurn):
                ended = True
                break
            else:
                raise BackendProtocolError(f"unknown backend event {event!r}", len(collected))
        rounds.append(tuple(consumed))

        if span is not None:
            if len(calls) >= options.max_tool_rounds:
                raise BackendProtocolError(
                    f"backend exceeded {options.max_tool_rounds} tool rounds in one turn"
                )
            call, result = _resolve_tool_call(span, tools)
            calls.append(call)
            results.append(result)
            retrieved.append(Segment.retrieved_info(result.payload_tokens()))
            if listener is not None:
                listener(call)
                listener(result)
            continue
        if not ended:
            raise BackendProtocolError("backend stream ended without end of turn", len(collected))
        break

    try:
        seq = InterleavedSequence.from_stream(collected, cfg)
    except MalformedSequence as e:
        raise BackendProtocolError(f"backend output is not a valid interleaved stream: {e}", e.position)
    text, audio = demux(seq, strip_padding=True)
    pcm = detok.synthesize(audio)

    turn = Turn(tuple([current_audio] + retrieved), Segment.interleaved_output(seq), tuple(calls))
    grown = SessionState(state.system_prompt, state.budget, state.turns + [turn])
    state.turns = trim_history(grown).turns
    logger.debug(
        f"Turn complete turns={len(state.turns)} text={len(text)} audio={len(audio)} tools={len(calls)}"
    )
    return TurnResult(
        tuple(text),
        tuple(audio),
        pcm,
        tuple(calls),
        tuple(results),
        tuple(thinking),
        tuple(rounds),
    )


def run_turn(
    state: SessionState,
    clip: PcmClip,
    backend: GeneratorBackend,
    tools: ToolDispatcher,
    detok: Detokenizer,
    options: TurnOptions = TurnOptions(),
    listener: Optional[Listener] = None,
) -> TurnResult:
    """
    Run one conversational turn from user audio to assistant output.

    Args:
        state: Session history, updated with the new turn on success
        clip: User utterance
        backend: Generator backend
        tools: Tool dispatcher
        detok: Audio detokenizer
        options: Interleave, VAD and frame-clock settings
        listener: Optional callback for streamed output

    Returns:
        TurnResult with text, audio tokens, waveform and tool activity

    Raises:
        SilenceRejected: the clip contains no speech
    """
    if not has_speech(clip, options.vad):
        raise SilenceRejected("no speech detected in input audio")
    features = Segment.audio_features(clip, options.frame_clock)
    return generate_turn(state, features, backend, tools, detok, options, listener)


def rounds_to_lists(rounds) -> List[List[list]]:
    return [[event_to_list(e) for e in events] for events in rounds]
