"""
Thinking-length reward.

A reasoning span earns 1 when it is present and no longer than the limit,
0 when it is empty or runs over.
"""

from dataclasses import dataclass

from speechlm_runtime.errors import ConfigError, InputError


@dataclass(frozen=True)
class ThinkingTrace:
    thinking_tokens: int
    response_tokens: int = 0

    def __post_init__(self):
        if self.thinking_tokens < 0 or self.response_tokens < 0:
            raise InputError("token counts must be non-negative")


def binary_length_reward(trace: ThinkingTrace, max_len: int) -> int:
    """1 iff 0 < thinking_tokens <= max_len."""
    if max_len < 1:
        raise ConfigError(f"max_len must be >= 1, got {max_len}")
    return int(0 < trace.thinking_tokens <= max_len)
