"""
Session transcripts: one JSON record per line, replayable through the same
turn logic.

Record kinds, in file order:

    session_start      prompt, budget, interleave and detokenizer settings
    turn_start         feature handle of the user audio
    generation_round   backend events consumed in one round
    tool_result        dispatcher outcome for one call
    turn_end           the TurnResult summary
    turn_error         a turn that failed (history unchanged)
"""

import json
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from speechlm_runtime.errors import DatasetError
from speechlm_runtime.interleave.codec import InterleaveConfig
from speechlm_runtime.log import get_logger
from speechlm_runtime.session.backends import ReplayBackend, event_from_list, event_to_list
from speechlm_runtime.session.detokenizer import Detokenizer, SineDetokenizer
from speechlm_runtime.session.runtime import TurnOptions, TurnResult, generate_turn
from speechlm_runtime.session.segments import FeatureHandle, Segment, SegmentKind, SessionState
from speechlm_runtime.tools.calls import ToolCall
from speechlm_runtime.tools.dispatcher import ToolResult

logger = get_logger("session.transcript")


class TranscriptRecorder:
    def __init__(self, path: str):
        self.path = path
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self._file = open(path, "w", encoding="utf-8")

    def _write(self, record: Dict[str, object]):
        self._file.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
        self._file.flush()

    def session_start(
        self,
        session_id: str,
        system_prompt: str,
        budget: int,
        options: TurnOptions,
        detok: Detokenizer,
    ):
        cfg = options.interleave
        self._write(
            {
                "event": "session_start",
                "session_id": session_id,
                "system_prompt": system_prompt,
                "budget": budget,
                "max_tool_rounds": options.max_tool_rounds,
                "interleave": {
                    "n_text": cfg.n_text,
                    "n_audio": cfg.n_audio,
                    "text_pad": cfg.text_pad,
                    "audio_pad": cfg.audio_pad,
                    "audio_vocab_size": cfg.audio_vocab_size,
                },
                "sample_rate": detok.sample_rate,
                "token_rate": detok.token_rate,
            }
        )

    def turn(self, index: int, features: Segment, result: TurnResult):
        self._write(
            {
                "event": "turn_start",
                "turn": index,
                "digest": features.features.digest,
                "frames": features.count,
            }
        )
        for round_index, events in enumerate(result.rounds):
            self._write(
                {
                    "event": "generation_round",
                    "turn": index,
                    "round": round_index,
                    "events": [event_to_list(e) for e in events],
                }
            )
        for tool_result in result.tool_results:
            self._write({"event": "tool_result", "turn": index, "result": tool_result.to_dict()})
        self._write({"event": "turn_end", "turn": index, "result": result.to_dict()})

    def turn_error(self, index: int, error: Exception):
        self._write(
            {"event": "turn_error", "turn": index, "error": type(error).__name__, "reason": str(error)}
        )

    def close(self):
        if not self._file.closed:
            self._file.close()


class ReplayDispatcher:
    """Hands back recorded tool results in order, matched by call."""

    def __init__(self, results: Sequence[ToolResult]):
        self._results = list(results)
        self._next = 0

    def dispatch(self, call: ToolCall) -> ToolResult:
        while self._next < len(self._results):
            result = self._results[self._next]
            self._next += 1
            if result.call == call:
                return result
        raise DatasetError(f"transcript has no recorded result for tool call {call.name!r}")


@dataclass
class ReplayedTurn:
    index: int
    recorded: Dict[str, object]
    replayed: Dict[str, object]

    @property
    def matches(self) -> bool:
        return self.recorded == self.replayed


def read_transcript(path: str) -> List[Dict[str, object]]:
    if not os.path.exists(path):
        raise DatasetError(f"transcript not found: {path}")
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise DatasetError(f"{path}:{lineno}: {e}")
    if not records or records[0].get("event") != "session_start":
        raise DatasetError(f"{path}: transcript must begin with a session_start record")
    return records


def replay_transcript(path: str, detok: Optional[Detokenizer] = None) -> List[ReplayedTurn]:
    """
    Re-run every completed turn of a transcript from its recorded backend
    events and tool results.

    Args:
        path: Transcript file
        detok: Detokenizer override (defaults to the recorded sine settings)

    Returns:
        One ReplayedTurn per completed turn, in order
    """
    records = read_transcript(path)
    header = records[0]
    state = SessionState.create(header["system_prompt"], int(header["budget"]))
    options = TurnOptions(
        interleave=InterleaveConfig(**header["interleave"]),
        max_tool_rounds=int(header["max_tool_rounds"]),
    )
    detok = detok or SineDetokenizer(int(header["sample_rate"]), int(header["token_rate"]))

    turns: Dict[int, Dict[str, object]] = {}
    for record in records[1:]:
        index = record.get("turn")
        if index is None:
            continue
        entry = turns.setdefault(int(index), {"rounds": [], "results": []})
        kind = record["event"]
        if kind == "turn_start":
            entry["features"] = Segment(
                SegmentKind.AUDIO_FEATURES,
                features=FeatureHandle(record["digest"], int(record["frames"])),
            )
        elif kind == "generation_round":
            entry["rounds"].append([event_from_list(e) for e in record["events"]])
        elif kind == "tool_result":
            entry["results"].append(ToolResult.from_dict(record["result"]))
        elif kind == "turn_end":
            entry["end"] = record["result"]

    replayed = []
    for index in sorted(turns):
        entry = turns[index]
        if "end" not in entry:
            continue
        if "features" not in entry:
            raise DatasetError(f"{path}: turn {index} has no turn_start record")
        result = generate_turn(
            state,
            entry["features"],
            ReplayBackend(entry["rounds"]),
            ReplayDispatcher(entry["results"]),
            detok,
            options,
        )
        replayed.append(ReplayedTurn(index, entry["end"], result.to_dict()))
    logger.info(f"Replayed transcript path={path} turns={len(replayed)}")
    return replayed
