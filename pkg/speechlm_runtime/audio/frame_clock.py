"""
Encoder and adaptor frame clock.

The audio encoder emits 25 frames per second and the adaptor downsamples by
2, so the LLM sees 12.5 feature frames per second. Both stages round partial
windows up so trailing audio always produces a frame.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from speechlm_runtime.audio.pcm import PcmClip
from speechlm_runtime.errors import ConfigError


@dataclass(frozen=True)
class FrameClock:
    encoder_rate: float = 25.0
    adaptor_downsample: int = 2

    def __post_init__(self):
        if self.encoder_rate <= 0:
            raise ConfigError(f"encoder_rate must be positive, got {self.encoder_rate}")
        if self.adaptor_downsample < 1:
            raise ConfigError(
                f"adaptor_downsample must be >= 1, got {self.adaptor_downsample}"
            )

    @property
    def adaptor_rate(self) -> float:
        return self.encoder_rate / self.adaptor_downsample


def encoder_frames(clip: PcmClip, clock: FrameClock = FrameClock()) -> int:
    """ceil(duration_seconds * encoder_rate), computed exactly."""
    clip.require_samples()
    exact = Fraction(len(clip)) * Fraction(str(clock.encoder_rate)) / clip.sample_rate
    return math.ceil(exact)


def adaptor_frames(n_encoder_frames: int, clock: FrameClock = FrameClock()) -> int:
    """ceil(encoder_frames / adaptor_downsample)."""
    return -(-n_encoder_frames // clock.adaptor_downsample)


def feature_frames(clip: PcmClip, clock: FrameClock = FrameClock()) -> int:
    """Frames the LLM receives for a clip (encoder then adaptor)."""
    return adaptor_frames(encoder_frames(clip, clock), clock)
