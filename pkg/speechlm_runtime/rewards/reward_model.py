"""
Response-quality reward models.

Only the interface ships; trained reward models plug in behind `score`.
"""

from typing import Sequence


class RewardModel:
    def score(self, prompt: str, response: str) -> float:
        raise NotImplementedError

    def score_batch(self, prompt: str, responses: Sequence[str]) -> list:
        return [self.score(prompt, r) for r in responses]


class ConstantRewardModel(RewardModel):
    """Gives every response the same score."""

    def __init__(self, value: float = 0.0):
        self.value = value

    def score(self, prompt: str, response: str) -> float:
        return self.value
