from speechlm_runtime.metrics.aggregate import derive_golden_rows, load_golden_tables, mean_of_subsets
from speechlm_runtime.metrics.bleu import bleu, corpus_bleu
from speechlm_runtime.metrics.error_rate import (
    CHINESE,
    ENGLISH,
    EditCounts,
    NormalizationProfile,
    cer,
    corpus_error_rate,
    edit_distance,
    wer,
)
from speechlm_runtime.metrics.report import MetricReport
from speechlm_runtime.metrics.toolcall import ToolCallOutcome, toolcall_metrics

__all__ = [
    "CHINESE",
    "ENGLISH",
    "EditCounts",
    "MetricReport",
    "NormalizationProfile",
    "ToolCallOutcome",
    "bleu",
    "cer",
    "corpus_bleu",
    "corpus_error_rate",
    "derive_golden_rows",
    "edit_distance",
    "load_golden_tables",
    "mean_of_subsets",
    "toolcall_metrics",
    "wer",
]
