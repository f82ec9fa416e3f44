"""
Session object bundling state, backend, tools, detokenizer and transcript.
"""

import os
from typing import Optional

from speechlm_runtime.audio.pcm import PcmClip
from speechlm_runtime.audio.vad import has_speech
from speechlm_runtime.config import ServiceConfig
from speechlm_runtime.errors import SilenceRejected, SpeechLMError
from speechlm_runtime.log import get_logger
from speechlm_runtime.session.backends import GeneratorBackend
from speechlm_runtime.session.detokenizer import Detokenizer, SineDetokenizer
from speechlm_runtime.session.runtime import Listener, TurnOptions, TurnResult, generate_turn
from speechlm_runtime.session.segments import Segment, SessionState
from speechlm_runtime.session.transcript import TranscriptRecorder
from speechlm_runtime.tools.dispatcher import ToolDispatcher

logger = get_logger("session")

DEFAULT_SYSTEM_PROMPT = "You are a helpful voice assistant."


class Session:
    """
    One conversation. Not thread-safe: drive it from a single thread.
    """

    def __init__(
        self,
        session_id: str,
        backend: GeneratorBackend,
        tools: Optional[ToolDispatcher] = None,
        detok: Optional[Detokenizer] = None,
        options: TurnOptions = TurnOptions(),
        system_prompt: str = DEFAULT_SYSTEM_PROMPT,
        budget: int = 8192,
        recorder: Optional[TranscriptRecorder] = None,
    ):
        self.session_id = session_id
        self.backend = backend
        self.tools = tools or ToolDispatcher()
        self.detok = detok or SineDetokenizer()
        self.options = options
        self.state = SessionState.create(system_prompt, budget)
        self.recorder = recorder
        self._attempts = 0
        if recorder is not None:
            recorder.session_start(session_id, system_prompt, budget, options, self.detok)

    @classmethod
    def from_config(
        cls,
        session_id: str,
        cfg: ServiceConfig,
        backend: GeneratorBackend,
        tools: Optional[ToolDispatcher] = None,
        detok: Optional[Detokenizer] = None,
    ) -> "Session":
        recorder = None
        if cfg.transcript_dir:
            recorder = TranscriptRecorder(os.path.join(cfg.transcript_dir, f"{session_id}.jsonl"))
        return cls(
            session_id,
            backend,
            tools,
            detok or SineDetokenizer(cfg.sample_rate),
            TurnOptions.from_config(cfg),
            cfg.system_prompt,
            cfg.context_budget,
            recorder,
        )

    @property
    def turns(self):
        return self.state.turns

    def run_turn(self, clip: PcmClip, listener: Optional[Listener] = None) -> TurnResult:
        """Gate, featurize and generate one turn; see runtime.run_turn."""
        if not has_speech(clip, self.options.vad):
            raise SilenceRejected("no speech detected in input audio")
        features = Segment.audio_features(clip, self.options.frame_clock)
        index = self._attempts
        self._attempts += 1
        try:
            result = generate_turn(
                self.state, features, self.backend, self.tools, self.detok, self.options, listener
            )
        except SpeechLMError as e:
            logger.warning(f"Turn failed session={self.session_id} turn={index} error={e}")
            if self.recorder is not None:
                self.recorder.turn_error(index, e)
            raise
        if self.recorder is not None:
            self.recorder.turn(index, features, result)
        logger.info(
            f"Turn done session={self.session_id} turn={index} "
            f"text={len(result.text)} audio={len(result.audio_tokens)} tools={len(result.tool_calls)}"
        )
        return result

    def close(self):
        if self.recorder is not None:
            self.recorder.close()
