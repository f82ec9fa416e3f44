"""
Mono PCM clips: normalization, WAV I/O and resampling.
"""

import hashlib
from dataclasses import dataclass

import numpy as np
import soundfile as sf

from speechlm_runtime.errors import EmptyAudio, InputError

DEFAULT_SAMPLE_RATE = 24000
PCM16_SCALE = 32768.0


@dataclass(frozen=True, eq=False)
class PcmClip:
    """
    Mono audio with amplitudes in [-1, 1].

    Attributes:
        samples: float32 array of amplitudes
        sample_rate: Samples per second
    """

    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise InputError(f"sample_rate must be positive, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=np.float32).reshape(-1)
        if not np.all(np.isfinite(samples)):
            raise InputError("PCM samples must be finite")
        object.__setattr__(self, "samples", np.clip(samples, -1.0, 1.0))

    def __len__(self):
        return int(self.samples.shape[0])

    def __eq__(self, other):
        if not isinstance(other, PcmClip):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(
            self.samples, other.samples
        )

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def require_samples(self):
        if self.is_empty:
            raise EmptyAudio("audio clip has no samples")

    def digest(self) -> str:
        """Content hash used to reference the clip's features from history."""
        h = hashlib.sha1(str(self.sample_rate).encode())
        h.update(self.samples.tobytes())
        return h.hexdigest()

    # Construction helpers

    @classmethod
    def from_pcm16(cls, data, sample_rate: int = DEFAULT_SAMPLE_RATE) -> "PcmClip":
        """Build from 16-bit integers (array or little-endian bytes), dividing by 32768."""
        if isinstance(data, (bytes, bytearray, memoryview)):
            if len(data) % 2:
                raise InputError("PCM16 byte payload has odd length")
            data = np.frombuffer(bytes(data), dtype="<i2")
        return cls(np.asarray(data, dtype=np.float32) / PCM16_SCALE, sample_rate)

    def to_pcm16(self) -> bytes:
        ints = np.clip(np.round(self.samples * PCM16_SCALE), -32768, 32767).astype("<i2")
        return ints.tobytes()

    @classmethod
    def silence(cls, seconds: float, sample_rate: int = DEFAULT_SAMPLE_RATE) -> "PcmClip":
        return cls(np.zeros(int(round(seconds * sample_rate)), dtype=np.float32), sample_rate)

    @classmethod
    def tone(
        cls,
        seconds: float,
        frequency: float = 220.0,
        amplitude: float = 0.5,
        sample_rate: int = DEFAULT_SAMPLE_RATE,
    ) -> "PcmClip":
        t = np.arange(int(round(seconds * sample_rate))) / sample_rate
        return cls(amplitude * np.sin(2 * np.pi * frequency * t), sample_rate)

    @classmethod
    def concat(cls, clips) -> "PcmClip":
        clips = list(clips)
        if not clips:
            return cls(np.zeros(0, dtype=np.float32))
        rate = clips[0].sample_rate
        return cls(np.concatenate([c.samples for c in clips]), rate)

    def slice_seconds(self, start: float, end: float) -> "PcmClip":
        a = int(round(start * self.sample_rate))
        b = int(round(end * self.sample_rate))
        return PcmClip(self.samples[a:b], self.sample_rate)


def read_wav(path: str) -> PcmClip:
    """
    Read a WAV file (PCM16 or float32) as a mono clip.

    Multi-channel files are averaged down to mono.
    """
    data, sample_rate = sf.read(path, dtype="float32", always_2d=True)
    return PcmClip(data.mean(axis=1), int(sample_rate))


def write_wav(path: str, clip: PcmClip, subtype: str = "PCM_16"):
    """
    Write a clip as mono WAV.

    Args:
        path: Output path
        clip: Clip to write
        subtype: "PCM_16" or "FLOAT"
    """
    sf.write(path, clip.samples, clip.sample_rate, subtype=subtype)


def resample(clip: PcmClip, target_rate: int) -> PcmClip:
    """
    Linear-interpolation resampling.

    Output duration matches the input within one sample period; a same-rate
    call returns an identical clip.
    """
    if target_rate <= 0:
        raise InputError(f"target_rate must be positive, got {target_rate}")
    if target_rate == clip.sample_rate:
        return PcmClip(clip.samples.copy(), clip.sample_rate)
    n_in = len(clip)
    n_out = int(round(n_in * target_rate / clip.sample_rate))
    if n_in == 0 or n_out == 0:
        return PcmClip(np.zeros(0, dtype=np.float32), target_rate)
    positions = np.arange(n_out, dtype=np.float64) * (clip.sample_rate / target_rate)
    samples = np.interp(positions, np.arange(n_in, dtype=np.float64), clip.samples)
    return PcmClip(samples.astype(np.float32), target_rate)
