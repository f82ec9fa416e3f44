from speechlm_runtime.audio.frame_clock import (
    FrameClock,
    adaptor_frames,
    encoder_frames,
    feature_frames,
)
from speechlm_runtime.audio.pcm import PcmClip, read_wav, resample, write_wav
from speechlm_runtime.audio.tokenizer import StubAudioTokenizer
from speechlm_runtime.audio.vad import UtteranceDetector, VadConfig, has_speech, vad_segments

__all__ = [
    "FrameClock",
    "PcmClip",
    "StubAudioTokenizer",
    "UtteranceDetector",
    "VadConfig",
    "adaptor_frames",
    "encoder_frames",
    "feature_frames",
    "has_speech",
    "read_wav",
    "resample",
    "vad_segments",
    "write_wav",
]
