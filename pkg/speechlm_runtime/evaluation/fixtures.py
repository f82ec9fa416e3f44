"""
Synthetic benchmark fixtures with matching perfect scripted models.

Audio is described by tone specs inside the manifest, so a fixture is two
small JSON files:

    manifest.jsonl      benchmark records
    perfect_model.json  backend script answering every record correctly
"""

import json
import os
import random
from typing import Dict, List, Tuple

from speechlm_runtime.evaluation.mixture import MIX, random_placement
from speechlm_runtime.evaluation.records import (
    NEGATIVE,
    PARALINGUISTIC_TASKS,
    POSITIVE,
    EvalRecord,
    write_manifest,
)
from speechlm_runtime.log import get_logger
from speechlm_runtime.tools.calls import TOOL_SCHEMAS

logger = get_logger("evaluation.fixtures")

MANIFEST_NAME = "manifest.jsonl"
SCRIPT_NAME = "perfect_model.json"

_LOCATIONS = ["Beijing", "Shanghai", "Paris", "London", "New York", "Tokyo", "Sydney", "Berlin", "Cairo", "Toronto"]
_WEB_QUERIES = [
    "latest electric car prices",
    "who won the football final",
    "best hiking trails near seattle",
    "how to bake sourdough bread",
    "stock market news today",
    "opening hours of the city museum",
    "new releases in science fiction",
]
_VOICE_QUERIES = [
    "a calm female news anchor",
    "an excited sports commentator",
    "a deep male storyteller",
    "a cheerful child voice",
    "a whispering narrator",
]
_CHAT_REPLIES = [
    "Sure, let's keep talking.",
    "That sounds interesting.",
    "Happy to help with that.",
    "Tell me more.",
]

_ANNOTATIONS = {
    "gender": ["male", "female"],
    "age": ["child", "young adult", "middle aged", "elderly"],
    "timbre": ["bright", "husky", "deep", "soft"],
    "scenario": ["street", "office", "park", "train station"],
    "event": ["dog barking", "door knock", "applause", "siren"],
    "emotion": ["happy", "sad", "angry", "neutral"],
    "pitch": ["high", "low", "medium"],
    "rhythm": ["steady", "irregular"],
    "speed": ["fast", "slow", "normal"],
    "style": ["news broadcast", "storytelling", "casual chat"],
    "vocal": ["laughter", "cough", "sigh", "sneeze"],
}

# Scenario, event and vocal clips are sound recordings overlaid with background speech.
_MIXED_TASKS = ("scenario", "event", "vocal")


def _tone(rng: random.Random) -> Dict[str, object]:
    return {
        "tone": {
            "seconds": rng.choice([0.6, 0.8, 1.0]),
            "frequency": 150 + 10 * rng.randint(0, 40),
        }
    }


def gold_call(tool: str, rng: random.Random) -> Dict[str, object]:
    if tool == "weather":
        arguments = {"location": rng.choice(_LOCATIONS)}
    elif tool == "web_search":
        arguments = {"query": rng.choice(_WEB_QUERIES)}
    elif tool == "audio_search":
        arguments = {"query": rng.choice(_VOICE_QUERIES)}
    else:
        arguments = {}
    return {"name": tool, "arguments": arguments}


def _write_fixture(out_dir: str, records: List[EvalRecord], sessions: Dict[str, object]) -> Tuple[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    manifest = os.path.join(out_dir, MANIFEST_NAME)
    script = os.path.join(out_dir, SCRIPT_NAME)
    write_manifest(manifest, records)
    with open(script, "w", encoding="utf-8") as f:
        json.dump({"sessions": sessions}, f, ensure_ascii=False, indent=1)
    logger.info(f"Wrote fixture dir={out_dir} records={len(records)}")
    return manifest, script


def make_toolcall_fixture(out_dir: str, per_tool: int = 200, seed: int = 0) -> Tuple[str, str]:
    """
    Write a tool-call fixture: for each tool, `per_tool` positive and
    `per_tool` negative conversations of 3 to 6 turns. Half of the negatives
    carry no tool intention; the other half intend a different tool.

    Returns:
        (manifest path, perfect model script path)
    """
    rng = random.Random(seed)
    records: List[EvalRecord] = []
    sessions: Dict[str, object] = {}
    tools = list(TOOL_SCHEMAS)
    for tool in tools:
        for label in (POSITIVE, NEGATIVE):
            for i in range(per_tool):
                record_id = f"{tool}-{label[:3]}-{i:04d}"
                n_turns = rng.randint(3, 6)
                turns = tuple((_tone(rng),) for _ in range(n_turns))
                script_turns: List[Dict[str, object]] = [
                    {"text": rng.choice(_CHAT_REPLIES)} for _ in range(n_turns - 1)
                ]
                gold = None
                intended = None
                if label == POSITIVE:
                    gold = gold_call(tool, rng)
                    script_turns.append({"tool_calls": [gold], "text": "Here is what I found."})
                elif i >= per_tool // 2:
                    intended = rng.choice([t for t in tools if t != tool])
                    script_turns.append(
                        {"tool_calls": [gold_call(intended, rng)], "text": "Here is what I found."}
                    )
                else:
                    script_turns.append({"text": rng.choice(_CHAT_REPLIES)})
                records.append(
                    EvalRecord(
                        id=record_id,
                        task=tool,
                        turns=turns,
                        gold=gold,
                        label=label,
                        intended_tool=intended,
                    )
                )
                sessions[record_id] = {"turns": script_turns}
    return _write_fixture(out_dir, records, sessions)


def make_paralinguistic_fixture(out_dir: str, per_task: int = 50, seed: int = 0) -> Tuple[str, str]:
    """
    Write a paralinguistic fixture: `per_task` single-turn records for each
    of the 11 tasks, question placed before or after the source at random.
    Scenario, event and vocal sources are first overlaid with background speech.

    Returns:
        (manifest path, perfect model script path)
    """
    rng = random.Random(seed)
    records: List[EvalRecord] = []
    sessions: Dict[str, object] = {}
    for task in PARALINGUISTIC_TASKS:
        for i in range(per_task):
            record_id = f"{task}-{i:04d}"
            gold = rng.choice(_ANNOTATIONS[task])
            question = _tone(rng)
            source = _tone(rng)
            if task in _MIXED_TASKS:
                source = {"mixture": {"source": [source], "speech": _tone(rng), "mode": MIX}}
            placement = random_placement(rng)
            refs = ({"mixture": {"source": [source], "speech": question, "placement": placement}},)
            records.append(
                EvalRecord(
                    id=record_id,
                    task=task,
                    turns=(refs,),
                    gold=gold,
                    question=f"What is the {task} of this audio?",
                )
            )
            sessions[record_id] = {"turns": [{"text": gold}]}
    return _write_fixture(out_dir, records, sessions)
