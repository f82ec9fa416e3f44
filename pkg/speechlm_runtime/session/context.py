"""
Prefill context assembly and history trimming.
"""

import dataclasses
from typing import List, Sequence

from speechlm_runtime.errors import ContextOverflow, EmptyAudio, InputError
from speechlm_runtime.session.segments import Segment, SegmentKind, SessionState, Turn


def _fit_turns(turns: Sequence[Turn], available: int) -> List[Turn]:
    """Newest whole turns whose total cost fits in `available`."""
    kept: List[Turn] = []
    used = 0
    for turn in reversed(turns):
        if used + turn.cost > available:
            break
        kept.append(turn)
        used += turn.cost
    kept.reverse()
    return kept


def assemble_context(
    state: SessionState,
    current_audio: Segment,
    retrieved: Sequence[Segment] = (),
) -> List[Segment]:
    """
    Build the segment list the generator is prefilled with.

    Order is system prompt, each prior turn's user segments then its
    assistant output, the current audio features, then retrieved information
    in call order. When history does not fit next to the current turn the
    oldest whole turns are left out; the state itself is not changed.

    Args:
        state: Session history
        current_audio: AudioFeatures segment of the current utterance
        retrieved: RetrievedInfo segments gathered so far in this turn

    Returns:
        Ordered list of segments

    Raises:
        ContextOverflow: system prompt plus the current turn exceed the budget
    """
    if current_audio.kind != SegmentKind.AUDIO_FEATURES:
        raise InputError(f"current audio must be AudioFeatures, got {current_audio.kind.value}")
    if current_audio.count <= 0:
        raise EmptyAudio("current audio has no feature frames")

    mandatory = state.system_prompt.cost + current_audio.cost + sum(s.cost for s in retrieved)
    if mandatory > state.budget:
        raise ContextOverflow(
            f"context budget {state.budget} cannot hold system prompt and current turn ({mandatory})"
        )

    context = [state.system_prompt]
    for turn in _fit_turns(state.turns, state.budget - mandatory):
        context.extend(turn.segments)
    context.append(current_audio)
    context.extend(retrieved)
    return context


def trim_history(state: SessionState) -> SessionState:
    """
    Drop the oldest whole turns until the state fits its budget.

    Returns:
        A new SessionState; the input is left untouched

    Raises:
        ContextOverflow: the budget is smaller than the system prompt
    """
    if state.budget < state.system_prompt.cost:
        raise ContextOverflow(
            f"context budget {state.budget} is smaller than the system prompt ({state.system_prompt.cost})"
        )
    if state.cost <= state.budget:
        return dataclasses.replace(state, turns=list(state.turns))
    kept = _fit_turns(state.turns, state.budget - state.system_prompt.cost)
    return dataclasses.replace(state, turns=kept)


def context_cost(context: Sequence[Segment]) -> int:
    return sum(s.cost for s in context)
