"""
Group-relative advantage normalization.
"""

from dataclasses import dataclass
from typing import List, Sequence

import torch

from speechlm_runtime.errors import GroupTooSmall

# Relative tolerance below which a group's spread counts as zero.
ZERO_STD_TOLERANCE = 1e-12


@dataclass(frozen=True)
class RewardGroup:
    rewards: Sequence[float]

    def __len__(self):
        return len(self.rewards)


def group_advantage(group: RewardGroup) -> List[float]:
    """
    Normalize rewards within a group of responses to the same prompt.

    advantage_i = (r_i - mean(r)) / std(r) with the population standard
    deviation; a group with no spread gets all-zero advantages.

    Args:
        group: Rewards of one group

    Returns:
        Advantages in input order

    Raises:
        GroupTooSmall: fewer than two rewards
    """
    if len(group) < 2:
        raise GroupTooSmall(len(group))
    rewards = torch.tensor([float(r) for r in group.rewards], dtype=torch.float64)
    mean = rewards.mean()
    std = rewards.std(unbiased=False)
    if std.item() <= ZERO_STD_TOLERANCE * max(1.0, abs(mean.item())):
        return [0.0] * len(group)
    return ((rewards - mean) / std).tolist()
