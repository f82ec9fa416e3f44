from speechlm_runtime.session.backends import (
    AudioToken,
    EndOfTurn,
    GeneratorBackend,
    ScriptedBackend,
    StubBackend,
    TextToken,
    ThinkEnd,
    ThinkStart,
    ToolCallSpan,
    create_backend_factory,
)
from speechlm_runtime.session.context import assemble_context, trim_history
from speechlm_runtime.session.conversation import Session
from speechlm_runtime.session.detokenizer import Detokenizer, SineDetokenizer
from speechlm_runtime.session.runtime import TurnOptions, TurnResult, generate_turn, run_turn
from speechlm_runtime.session.segments import FeatureHandle, Segment, SegmentKind, SessionState, Turn
from speechlm_runtime.session.transcript import TranscriptRecorder, replay_transcript

__all__ = [
    "AudioToken",
    "Detokenizer",
    "EndOfTurn",
    "FeatureHandle",
    "GeneratorBackend",
    "ScriptedBackend",
    "Segment",
    "SegmentKind",
    "Session",
    "SessionState",
    "SineDetokenizer",
    "StubBackend",
    "TextToken",
    "ThinkEnd",
    "ThinkStart",
    "ToolCallSpan",
    "TranscriptRecorder",
    "Turn",
    "TurnOptions",
    "TurnResult",
    "assemble_context",
    "create_backend_factory",
    "generate_turn",
    "replay_transcript",
    "run_turn",
    "trim_history",
]
