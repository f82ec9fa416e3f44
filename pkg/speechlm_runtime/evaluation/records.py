"""
Benchmark records and manifests.

Manifests are line-delimited JSON. Audio is either a file path relative to
the manifest or a synthetic tone spec, so fixtures need no audio files:

    {"id": "p-001", "task": "emotion", "audio": ["a.wav"], "gold": "happy"}
    {"id": "w-001", "task": "weather", "label": "positive",
     "turns": [{"tone": {"seconds": 0.6, "frequency": 220}}, ...],
     "gold": {"name": "weather", "arguments": {"location": "Paris"}}}

A mixture reference combines nested references through build_mixture():

    {"mixture": {"source": [<ref>, ...], "speech": <ref>,
                 "placement": "before" | "after", "mode": "concat" | "mix"}}
"""

import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from speechlm_runtime.audio.pcm import DEFAULT_SAMPLE_RATE, PcmClip, read_wav, resample
from speechlm_runtime.errors import DatasetError
from speechlm_runtime.evaluation.mixture import BEFORE, CONCAT, build_mixture
from speechlm_runtime.log import get_logger
from speechlm_runtime.tools.calls import TOOL_SCHEMAS

logger = get_logger("evaluation.records")

PARALINGUISTIC_TASKS = (
    "gender",
    "age",
    "timbre",
    "scenario",
    "event",
    "emotion",
    "pitch",
    "rhythm",
    "speed",
    "style",
    "vocal",
)

POSITIVE = "positive"
NEGATIVE = "negative"


@dataclass(frozen=True)
class EvalRecord:
    id: str
    task: str
    turns: Tuple[Tuple[Mapping[str, object], ...], ...]
    gold: object = None
    question: str = ""
    label: str = POSITIVE
    intended_tool: Optional[str] = None
    metadata: Dict[str, str] = field(default_factory=dict, compare=False)
    base_dir: str = field(default="", compare=False)

    @property
    def is_paralinguistic(self) -> bool:
        return self.task in PARALINGUISTIC_TASKS

    @property
    def gold_trigger(self) -> bool:
        return self.label == POSITIVE


def _audio_refs(value) -> Tuple[Mapping[str, object], ...]:
    """One turn's audio: a path, a list of paths/specs, or a single spec."""
    if isinstance(value, str):
        return ({"path": value},)
    if isinstance(value, Mapping):
        return (value,)
    return tuple({"path": v} if isinstance(v, str) else v for v in value)


def record_from_dict(data: Mapping[str, object], base_dir: str = "") -> EvalRecord:
    if "id" not in data or "task" not in data:
        raise DatasetError(f"record needs id and task: {dict(data)}")
    task = str(data["task"])
    if task not in PARALINGUISTIC_TASKS and task not in TOOL_SCHEMAS:
        raise DatasetError(f"record {data['id']!r} has unknown task {task!r}")
    if "turns" in data:
        turns = tuple(
            _audio_refs(t.get("audio", t) if isinstance(t, Mapping) else t) for t in data["turns"]
        )
    elif "audio" in data:
        turns = (_audio_refs(data["audio"]),)
    else:
        raise DatasetError(f"record {data['id']!r} has no audio")
    label = str(data.get("label", POSITIVE))
    if label not in (POSITIVE, NEGATIVE):
        raise DatasetError(f"record {data['id']!r} has unknown label {label!r}")
    return EvalRecord(
        id=str(data["id"]),
        task=task,
        turns=turns,
        gold=data.get("gold"),
        question=str(data.get("question", "")),
        label=label,
        intended_tool=data.get("intended_tool"),
        metadata={k: str(v) for k, v in dict(data.get("metadata", {})).items()},
        base_dir=base_dir,
    )


def record_to_dict(record: EvalRecord) -> Dict[str, object]:
    data: Dict[str, object] = {"id": record.id, "task": record.task}
    if record.is_paralinguistic:
        data["audio"] = [dict(a) for a in record.turns[0]]
    else:
        data["turns"] = [{"audio": [dict(a) for a in turn]} for turn in record.turns]
        data["label"] = record.label
        if record.intended_tool:
            data["intended_tool"] = record.intended_tool
    if record.gold is not None:
        data["gold"] = record.gold
    if record.question:
        data["question"] = record.question
    if record.metadata:
        data["metadata"] = dict(record.metadata)
    return data


def read_manifest(path: str) -> List[EvalRecord]:
    if not os.path.exists(path):
        raise DatasetError(f"manifest not found: {path}")
    base_dir = os.path.dirname(os.path.abspath(path))
    records = []
    seen = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = record_from_dict(json.loads(line), base_dir)
            except json.JSONDecodeError as e:
                raise DatasetError(f"{path}:{lineno}: {e}")
            if record.id in seen:
                raise DatasetError(f"{path}:{lineno}: duplicate record id {record.id!r}")
            seen.add(record.id)
            records.append(record)
    logger.info(f"Loaded manifest path={path} records={len(records)}")
    return records


def write_manifest(path: str, records: Sequence[EvalRecord]):
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record_to_dict(record), ensure_ascii=False) + "\n")


def load_audio(ref: Mapping[str, object], base_dir: str = "", sample_rate: int = DEFAULT_SAMPLE_RATE) -> PcmClip:
    """Materialize one audio reference at the requested sample rate."""
    if "tone" in ref:
        spec = ref["tone"]
        return PcmClip.tone(
            float(spec.get("seconds", 1.0)),
            float(spec.get("frequency", 220.0)),
            float(spec.get("amplitude", 0.5)),
            sample_rate,
        )
    if "mixture" in ref:
        spec = ref["mixture"]
        if not isinstance(spec, Mapping) or "speech" not in spec or not spec.get("source"):
            raise DatasetError(f"mixture needs source and speech references: {dict(ref)}")
        return build_mixture(
            [load_audio(source, base_dir, sample_rate) for source in _audio_refs(spec["source"])],
            load_audio(_audio_refs(spec["speech"])[0], base_dir, sample_rate),
            str(spec.get("placement", BEFORE)),
            str(spec.get("mode", CONCAT)),
        )
    if "silence" in ref:
        return PcmClip.silence(float(ref["silence"]), sample_rate)
    if "path" in ref:
        path = os.path.join(base_dir, str(ref["path"]))
        if not os.path.exists(path):
            raise DatasetError(f"audio file not found: {path}")
        return resample(read_wav(path), sample_rate)
    raise DatasetError(f"unsupported audio reference: {dict(ref)}")


def turn_audio(record: EvalRecord, index: int, sample_rate: int = DEFAULT_SAMPLE_RATE) -> PcmClip:
    """The clips of one turn, concatenated in manifest order."""
    return PcmClip.concat(load_audio(ref, record.base_dir, sample_rate) for ref in record.turns[index])
