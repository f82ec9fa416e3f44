import json
from datetime import datetime, timezone

import numpy as np
import pytest

from speechlm_runtime.audio.pcm import PcmClip
from speechlm_runtime.interleave.codec import InterleaveConfig
from speechlm_runtime.tools.clients import (
    AudioSearchClient,
    FixtureWeatherClient,
    FixtureWebSearchClient,
    frozen_clock,
)
from speechlm_runtime.tools.dispatcher import ToolClients, ToolDispatcher
from speechlm_runtime.tools.voice_library import VoiceLibraryEntry, VoiceLibraryIndex

FIXED_MOMENT = datetime(2025, 3, 14, 9, 26, 53, tzinfo=timezone.utc)

VOICE_ENTRIES = [
    ("anchor", (11, 12, 13), "Good evening, here is the news.", "a calm female news anchor voice"),
    ("commentator", (21, 22), "And he scores!", "an excited male sports commentator shouting"),
    ("storyteller", (31, 32, 33, 34), "Once upon a time.", "a deep slow male storyteller voice"),
    ("child", (41,), "Can we go to the park?", "a cheerful young child voice"),
]


@pytest.fixture
def cfg_1_2():
    return InterleaveConfig(n_text=1, n_audio=2)


@pytest.fixture
def speech_clip():
    """One second of tone, loud enough to pass the VAD gate."""
    return PcmClip.tone(1.0, frequency=220.0, amplitude=0.5)


@pytest.fixture
def silent_clip():
    return PcmClip.silence(1.0)


@pytest.fixture
def voice_library():
    return VoiceLibraryIndex(
        VoiceLibraryEntry.from_text(entry_id, tokens, transcription, description)
        for entry_id, tokens, transcription, description in VOICE_ENTRIES
    )


@pytest.fixture
def tool_clients(voice_library):
    return ToolClients(
        clock=frozen_clock(FIXED_MOMENT),
        weather=FixtureWeatherClient({"paris": "sunny, 21C"}),
        web_search=FixtureWebSearchClient({"python release": "Python 3.13 is out."}),
        audio_search=AudioSearchClient(voice_library, default_k=2),
    )


@pytest.fixture
def dispatcher(tool_clients):
    return ToolDispatcher(tool_clients)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def write_jsonl(tmp_path):
    def write(name, rows):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as f:
            for row in rows:
                f.write(json.dumps(row) + "\n")
        return str(path)

    return write
