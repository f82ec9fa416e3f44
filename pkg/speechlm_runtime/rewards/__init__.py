from speechlm_runtime.rewards.advantage import RewardGroup, group_advantage
from speechlm_runtime.rewards.reward_model import ConstantRewardModel, RewardModel
from speechlm_runtime.rewards.scoring import ScoredTrace, read_traces, score_traces
from speechlm_runtime.rewards.thinking import ThinkingTrace, binary_length_reward

__all__ = [
    "ConstantRewardModel",
    "RewardGroup",
    "RewardModel",
    "ScoredTrace",
    "ThinkingTrace",
    "binary_length_reward",
    "group_advantage",
    "read_traces",
    "score_traces",
]
