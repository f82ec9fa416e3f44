"""
Energy-threshold voice activity detection.

A clip is cut into fixed windows; a window is active when its energy in
dBFS exceeds the threshold. Active runs separated by less than the hangover
are merged and runs shorter than the minimum segment are dropped.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from speechlm_runtime.audio.pcm import PcmClip
from speechlm_runtime.errors import ConfigError
from speechlm_runtime.log import get_logger

logger = get_logger("audio.vad")

Span = Tuple[float, float]


@dataclass(frozen=True)
class VadConfig:
    window_ms: float = 20.0
    energy_threshold: float = -40.0
    hangover_ms: float = 200.0
    min_segment_ms: float = 100.0

    def __post_init__(self):
        if self.window_ms <= 0:
            raise ConfigError(f"VAD window must be positive, got {self.window_ms}")
        if self.hangover_ms < 0 or self.min_segment_ms < 0:
            raise ConfigError("VAD hangover and min_segment must be non-negative")

    def window_samples(self, sample_rate: int) -> int:
        return max(1, int(round(self.window_ms * sample_rate / 1000.0)))


def window_energies_dbfs(samples: np.ndarray, window: int) -> np.ndarray:
    """Mean power per window in dBFS; the last partial window is included."""
    n_windows = -(-len(samples) // window)
    power = np.empty(n_windows, dtype=np.float64)
    for i in range(n_windows):
        chunk = samples[i * window : (i + 1) * window].astype(np.float64)
        power[i] = np.mean(chunk * chunk)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(power)


def _active_runs(active: np.ndarray) -> List[Tuple[int, int]]:
    """Inclusive-exclusive window index ranges of consecutive active windows."""
    runs = []
    start = None
    for i, flag in enumerate(active):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(active)))
    return runs


def vad_segments(clip: PcmClip, cfg: VadConfig = VadConfig()) -> List[Span]:
    """
    Detect speech spans in a clip.

    Args:
        clip: Input audio
        cfg: VAD configuration

    Returns:
        Sorted, disjoint (start, end) spans in seconds within [0, duration]
    """
    clip.require_samples()
    window = cfg.window_samples(clip.sample_rate)
    energies = window_energies_dbfs(clip.samples, window)
    runs = _active_runs(energies > cfg.energy_threshold)

    hangover = cfg.hangover_ms / 1000.0
    merged: List[List[int]] = []
    for start, end in runs:
        if merged:
            gap = (start - merged[-1][1]) * window / clip.sample_rate
            if gap < hangover:
                merged[-1][1] = end
                continue
        merged.append([start, end])

    spans = []
    for start, end in merged:
        with np.errstate(divide="ignore"):
            mean_db = 10.0 * np.log10(np.mean(10.0 ** (energies[start:end] / 10.0)))
        if mean_db <= cfg.energy_threshold:
            continue
        t0 = start * window / clip.sample_rate
        t1 = min(end * window, len(clip)) / clip.sample_rate
        if (t1 - t0) * 1000.0 < cfg.min_segment_ms:
            continue
        spans.append((t0, t1))
    return spans


def has_speech(clip: PcmClip, cfg: VadConfig = VadConfig()) -> bool:
    return not clip.is_empty and bool(vad_segments(clip, cfg))


class UtteranceDetector:
    """
    Streaming end-of-utterance detection over incoming PCM chunks.

    Audio is buffered until speech has been heard and followed by at least
    `end_of_utterance_ms` of silence; the buffered utterance is then handed
    back and the buffer reset.
    """

    def __init__(
        self,
        sample_rate: int,
        cfg: VadConfig = VadConfig(),
        end_of_utterance_ms: float = 600.0,
    ):
        self.sample_rate = sample_rate
        self.cfg = cfg
        self.end_of_utterance_ms = end_of_utterance_ms
        self._window = cfg.window_samples(sample_rate)
        self._reset()

    def _reset(self):
        self._buffer = np.zeros(0, dtype=np.float32)
        self._windows_done = 0
        self._last_active: Optional[int] = None

    @property
    def buffered_seconds(self) -> float:
        return len(self._buffer) / self.sample_rate

    def feed(self, clip: PcmClip) -> Optional[PcmClip]:
        """
        Add a chunk; return the finished utterance when end-of-utterance is seen.
        """
        self._buffer = np.concatenate([self._buffer, clip.samples])
        complete = len(self._buffer) // self._window
        for i in range(self._windows_done, complete):
            chunk = self._buffer[i * self._window : (i + 1) * self._window].astype(np.float64)
            power = float(np.mean(chunk * chunk))
            if power > 0 and 10.0 * np.log10(power) > self.cfg.energy_threshold:
                self._last_active = i
        self._windows_done = complete

        if self._last_active is None:
            self._drop_leading_silence()
            return None
        silent_windows = self._windows_done - self._last_active - 1
        if silent_windows * self.cfg.window_ms >= self.end_of_utterance_ms:
            return self.flush()
        return None

    def flush(self) -> Optional[PcmClip]:
        """Return whatever speech is buffered (or None) and reset."""
        utterance = None
        if self._last_active is not None:
            utterance = PcmClip(self._buffer.copy(), self.sample_rate)
            logger.debug(f"Utterance complete duration_s={utterance.duration:.3f}")
        self._reset()
        return utterance

    def _drop_leading_silence(self):
        keep_windows = max(1, int(self.cfg.hangover_ms // self.cfg.window_ms))
        drop = self._windows_done - keep_windows
        if drop > 0:
            self._buffer = self._buffer[drop * self._window :]
            self._windows_done -= drop
