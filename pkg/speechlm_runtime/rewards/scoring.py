"""
Offline scoring of generation traces.

A trace file holds one JSON object per line:

    {"id": "...", "thinking_tokens": 37, "group_id": "prompt-3", "reward": 0.5}

`reward` is optional; without it the thinking-length reward is used as the
reward that gets normalized within each group.
"""

import json
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

from speechlm_runtime.errors import DatasetError, GroupTooSmall
from speechlm_runtime.log import get_logger
from speechlm_runtime.rewards.advantage import RewardGroup, group_advantage
from speechlm_runtime.rewards.thinking import ThinkingTrace, binary_length_reward

logger = get_logger("rewards.scoring")


@dataclass(frozen=True)
class ScoredTrace:
    id: str
    group_id: str
    thinking_tokens: int
    length_reward: int
    reward: float
    advantage: Optional[float]

    def to_dict(self) -> Dict[str, object]:
        return {
            "id": self.id,
            "group_id": self.group_id,
            "thinking_tokens": self.thinking_tokens,
            "length_reward": self.length_reward,
            "reward": self.reward,
            "advantage": self.advantage,
        }


def read_traces(path: str) -> List[Dict[str, object]]:
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"{path}:{lineno}: invalid JSON: {e}")
            if not isinstance(record, dict):
                raise DatasetError(f"{path}:{lineno}: expected an object")
            records.append(record)
    return records


def score_traces(records: Sequence[Mapping[str, object]], max_len: int) -> List[ScoredTrace]:
    """
    Length rewards and group-relative advantages for a batch of traces.

    Groups with a single member get no advantage (None) and a warning.

    Args:
        records: Trace dicts with id, thinking_tokens, group_id, optional reward
        max_len: Thinking-length limit

    Returns:
        One ScoredTrace per record, in input order
    """
    rows = []
    groups: "OrderedDict[str, List[int]]" = OrderedDict()
    for i, record in enumerate(records):
        try:
            record_id = str(record["id"])
            thinking = int(record["thinking_tokens"])
        except (KeyError, TypeError, ValueError) as e:
            raise DatasetError(f"trace {i}: needs id and integer thinking_tokens ({e})")
        group_id = str(record.get("group_id", record_id))
        length_reward = binary_length_reward(ThinkingTrace(thinking), max_len)
        reward = record.get("reward")
        reward = float(length_reward if reward is None else reward)
        rows.append([record_id, group_id, thinking, length_reward, reward])
        groups.setdefault(group_id, []).append(i)

    advantages: Dict[int, Optional[float]] = {}
    for group_id, members in groups.items():
        try:
            values = group_advantage(RewardGroup([rows[i][4] for i in members]))
        except GroupTooSmall:
            logger.warning(f"Group too small for advantage group={group_id} size={len(members)}")
            values = [None] * len(members)
        advantages.update(zip(members, values))

    logger.info(f"Scored traces count={len(rows)} groups={len(groups)}")
    return [ScoredTrace(*row, advantages[i]) for i, row in enumerate(rows)]
