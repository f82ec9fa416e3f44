from speechlm_runtime.evaluation.fixtures import make_paralinguistic_fixture, make_toolcall_fixture
from speechlm_runtime.evaluation.judges import (
    EchoTranscriber,
    ExactMatchJudge,
    Judge,
    JudgeVerdict,
    PromptedJudge,
    Transcriber,
)
from speechlm_runtime.evaluation.mixture import build_mixture
from speechlm_runtime.evaluation.paralinguistic import (
    ParalinguisticReport,
    run_paralinguistic,
    summarize_verdicts,
)
from speechlm_runtime.evaluation.records import PARALINGUISTIC_TASKS, EvalRecord, read_manifest
from speechlm_runtime.evaluation.runner import oracle_factory
from speechlm_runtime.evaluation.toolcall_bench import (
    ToolcallReport,
    run_toolcall,
    summarize_predictions,
)

__all__ = [
    "PARALINGUISTIC_TASKS",
    "EchoTranscriber",
    "EvalRecord",
    "ExactMatchJudge",
    "Judge",
    "JudgeVerdict",
    "ParalinguisticReport",
    "PromptedJudge",
    "ToolcallReport",
    "Transcriber",
    "build_mixture",
    "make_paralinguistic_fixture",
    "make_toolcall_fixture",
    "oracle_factory",
    "read_manifest",
    "run_paralinguistic",
    "run_toolcall",
    "summarize_predictions",
    "summarize_verdicts",
]
