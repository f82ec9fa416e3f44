"""
Transcriber and judge interfaces for ASR-mediated scoring.

A verdict is produced from transcribed text and the gold annotation only;
judges never see audio.
"""

import json
import os
import re
from dataclasses import dataclass
from string import Template
from typing import Callable, Optional

import requests

from speechlm_runtime.errors import DatasetError
from speechlm_runtime.evaluation.records import EvalRecord
from speechlm_runtime.interleave.text import ByteTokenizer
from speechlm_runtime.metrics.error_rate import ENGLISH, NormalizationProfile
from speechlm_runtime.session.runtime import TurnResult

JUDGE_PROMPT_VERSION = 1
JUDGE_PROMPT_PATH = os.path.join(
    os.path.dirname(__file__), "data", f"judge_prompt_v{JUDGE_PROMPT_VERSION}.txt"
)

_JSON_OBJECT_RE = re.compile(r"\{.*\}", re.DOTALL)


@dataclass(frozen=True)
class JudgeVerdict:
    record_id: str
    correct: bool
    rationale: str = ""

    def to_dict(self):
        return {"id": self.record_id, "correct": self.correct, "rationale": self.rationale}


class Transcriber:
    def transcribe(self, result: TurnResult) -> str:
        raise NotImplementedError


class EchoTranscriber(Transcriber):
    """Returns the text channel of the output, as a perfect ASR would."""

    def __init__(self):
        self._tokenizer = ByteTokenizer()

    def transcribe(self, result: TurnResult) -> str:
        return self._tokenizer.decode(result.text)


class Judge:
    def judge(self, record: EvalRecord, transcript: str) -> JudgeVerdict:
        raise NotImplementedError


class ExactMatchJudge(Judge):
    """Correct when the normalized transcript equals the normalized gold text."""

    def __init__(self, profile: NormalizationProfile = ENGLISH):
        self.profile = profile

    def judge(self, record: EvalRecord, transcript: str) -> JudgeVerdict:
        gold = self.profile.units(str(record.gold or ""))
        said = self.profile.units(transcript)
        correct = bool(gold) and gold == said
        return JudgeVerdict(record.id, correct, "exact match" if correct else "mismatch")


def load_judge_prompt(path: Optional[str] = None) -> Template:
    path = path or JUDGE_PROMPT_PATH
    if not os.path.exists(path):
        raise DatasetError(f"judge prompt template not found: {path}")
    with open(path, encoding="utf-8") as f:
        return Template(f.read())


def parse_judge_reply(record_id: str, reply: str) -> JudgeVerdict:
    """Read the {"correct": ..., "rationale": ...} object out of a reply."""
    match = _JSON_OBJECT_RE.search(reply)
    if match is None:
        raise DatasetError(f"judge reply for {record_id!r} has no JSON object")
    try:
        payload = json.loads(match.group(0))
    except json.JSONDecodeError as e:
        raise DatasetError(f"judge reply for {record_id!r} is not valid JSON: {e}")
    if not isinstance(payload.get("correct"), bool):
        raise DatasetError(f"judge reply for {record_id!r} lacks a boolean 'correct'")
    return JudgeVerdict(record_id, payload["correct"], str(payload.get("rationale", "")))


class PromptedJudge(Judge):
    """
    Text-LLM judge driven by the versioned prompt template.

    Args:
        complete: Callable sending a prompt to a text model and returning its reply
        template: Prompt template (defaults to the shipped version)
    """

    def __init__(self, complete: Callable[[str], str], template: Optional[Template] = None):
        self.complete = complete
        self.template = template or load_judge_prompt()

    def build_prompt(self, record: EvalRecord, transcript: str) -> str:
        return self.template.substitute(
            task=record.task,
            question=record.question or "(not given)",
            reference=str(record.gold or ""),
            response=transcript,
        )

    def judge(self, record: EvalRecord, transcript: str) -> JudgeVerdict:
        return parse_judge_reply(record.id, self.complete(self.build_prompt(record, transcript)))


class HttpCompletion:
    """
    POST {"prompt": ...} to a completion endpoint and return its "text" field.
    """

    def __init__(self, url: str, timeout: float = 30.0, session: Optional[requests.Session] = None):
        self.url = url
        self.timeout = timeout
        self.session = session or requests.Session()

    def __call__(self, prompt: str) -> str:
        response = self.session.post(self.url, json={"prompt": prompt}, timeout=self.timeout)
        response.raise_for_status()
        return response.json()["text"]
