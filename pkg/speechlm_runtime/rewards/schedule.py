"""
Training schedule and data budgets of the reference model, kept as
documentation. No trainer in this package reads them.
"""

# Reinforcement learning stages
PPO_LENGTH_STAGE_ITERATIONS = 60
PPO_QUALITY_STAGE_ITERATIONS = 120
GRPO_ITERATIONS = 400
GLOBAL_BATCH_SIZE = 64
ACTOR_LEARNING_RATE = 1e-6
CRITIC_LEARNING_RATE = 2.5e-6

# Pre-training token budgets
AUDIO_VOCAB_EXTENSION = 6600
CONTINUED_PRETRAIN_TOKENS = 1_356_000_000_000
VOCAB_ALIGNMENT_TEXT_TOKENS = 128_000_000_000
VOCAB_ALIGNMENT_AUDIO_TOKENS = 128_000_000_000
MAIN_PRETRAIN_TOKENS = 800_000_000_000
COOLDOWN_TOKENS = 200_000_000_000
SFT_TOKENS = 4_000_000_000

STAGES = (
    ("ppo_thinking_length", PPO_LENGTH_STAGE_ITERATIONS),
    ("ppo_response_quality", PPO_QUALITY_STAGE_ITERATIONS),
    ("grpo", GRPO_ITERATIONS),
)
