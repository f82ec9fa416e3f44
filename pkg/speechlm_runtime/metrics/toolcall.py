"""
Tool-call trigger, type and parameter metrics.

The three stages form a funnel: precision and recall look at whether any
call was made, type accuracy at which tool was called among true triggers,
and parameter accuracy at the arguments among correctly typed calls whose
gold arguments are non-empty.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional

from speechlm_runtime.errors import DatasetError, InputError
from speechlm_runtime.metrics.report import MetricReport
from speechlm_runtime.tools.calls import ToolCall


@dataclass(frozen=True)
class ToolCallOutcome:
    gold_trigger: bool
    gold_tool: Optional[str] = None
    gold_params: Optional[Mapping[str, str]] = None
    predicted_call: Optional[ToolCall] = None

    def __post_init__(self):
        if self.gold_trigger != (self.gold_tool is not None):
            raise InputError("gold_tool must be set exactly when gold_trigger is")
        if self.gold_params is not None and self.gold_tool is None:
            raise InputError("gold_params require gold_tool")

    @property
    def triggered(self) -> bool:
        return self.predicted_call is not None


def _normalize_params(params: Mapping[str, object]) -> Dict[str, str]:
    return {str(k).strip().casefold(): str(v).strip().casefold() for k, v in params.items()}


def params_match(gold: Mapping[str, object], predicted: Mapping[str, object]) -> bool:
    return _normalize_params(gold) == _normalize_params(predicted)


def toolcall_metrics(outcomes: Iterable[ToolCallOutcome]) -> Dict[str, MetricReport]:
    """
    Compute precision, recall, type accuracy and parameter accuracy.

    Args:
        outcomes: Gold labels with the model's predicted call (or None)

    Returns:
        Dict of MetricReport keyed by precision, recall, type_accuracy,
        parameter_accuracy; zero denominators give a None (N/A) value

    Raises:
        DatasetError: no gold-positive or no gold-negative outcome
    """
    outcomes = list(outcomes)
    positives = sum(o.gold_trigger for o in outcomes)
    negatives = len(outcomes) - positives
    if positives == 0 or negatives == 0:
        raise DatasetError(
            f"tool-call metrics need positive and negative samples, got {positives}/{negatives}"
        )

    tp = fp = fn = 0
    type_correct = 0
    param_total = param_correct = 0
    for outcome in outcomes:
        if outcome.gold_trigger and outcome.triggered:
            tp += 1
            if outcome.predicted_call.name == outcome.gold_tool:
                type_correct += 1
                if outcome.gold_params:
                    param_total += 1
                    param_correct += params_match(outcome.gold_params, outcome.predicted_call.arguments)
        elif outcome.gold_trigger:
            fn += 1
        elif outcome.triggered:
            fp += 1

    return {
        "precision": MetricReport.ratio("precision", tp, tp + fp),
        "recall": MetricReport.ratio("recall", tp, tp + fn),
        "type_accuracy": MetricReport.ratio("type_accuracy", type_correct, tp),
        "parameter_accuracy": MetricReport.ratio("parameter_accuracy", int(param_correct), param_total),
    }
