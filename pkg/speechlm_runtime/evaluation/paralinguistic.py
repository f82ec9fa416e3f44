"""
Paralinguistic benchmark: the model answers a spoken question about a clip,
its spoken answer is transcribed, and a text judge compares the transcript
with the gold annotation.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

from speechlm_runtime.errors import DatasetError
from speechlm_runtime.evaluation.judges import Judge, JudgeVerdict, Transcriber
from speechlm_runtime.evaluation.records import PARALINGUISTIC_TASKS, EvalRecord
from speechlm_runtime.evaluation.runner import map_records, run_conversation
from speechlm_runtime.log import get_logger
from speechlm_runtime.metrics.aggregate import mean_of_subsets
from speechlm_runtime.metrics.report import MetricReport
from speechlm_runtime.session.backends import BackendFactory
from speechlm_runtime.session.runtime import TurnOptions
from speechlm_runtime.tools.dispatcher import ToolDispatcher

logger = get_logger("evaluation.paralinguistic")


@dataclass
class ParalinguisticReport:
    per_task: Dict[str, MetricReport]
    average: Optional[float]
    unscored: Dict[str, int]
    verdicts: List[JudgeVerdict] = field(default_factory=list)
    failures: Dict[str, str] = field(default_factory=dict)

    @property
    def total_unscored(self) -> int:
        return sum(self.unscored.values())

    def to_dict(self) -> Dict[str, object]:
        return {
            "average": self.average,
            "tasks": {
                task: dict(report.to_dict(), unscored=self.unscored.get(task, 0))
                for task, report in self.per_task.items()
            },
            "unscored": self.total_unscored,
        }

    def format_table(self) -> str:
        lines = [f"{'task':<10} {'acc':>7} {'correct':>8} {'scored':>7} {'unscored':>9}"]
        for task, report in self.per_task.items():
            lines.append(
                f"{task:<10} {report.formatted():>7} {report.numerator:>8} "
                f"{report.denominator:>7} {self.unscored.get(task, 0):>9}"
            )
        average = "N/A" if self.average is None else f"{self.average:.2f}"
        lines.append(f"{'average':<10} {average:>7}")
        return "\n".join(lines)


def summarize_verdicts(
    records: Sequence[EvalRecord],
    verdicts: Mapping[str, JudgeVerdict],
    failures: Optional[Mapping[str, str]] = None,
) -> ParalinguisticReport:
    """
    Per-task accuracy over scored records and their unweighted average.

    Records without a verdict count as unscored and stay out of the
    denominators.
    """
    correct: Counter = Counter()
    scored: Counter = Counter()
    unscored: Counter = Counter()
    for record in records:
        verdict = verdicts.get(record.id)
        if verdict is None:
            unscored[record.task] += 1
            continue
        scored[record.task] += 1
        correct[record.task] += verdict.correct

    tasks = [t for t in PARALINGUISTIC_TASKS if scored[t] or unscored[t]]
    per_task = {t: MetricReport.ratio(t, correct[t], scored[t]) for t in tasks}
    values = [r.value for r in per_task.values() if r.value is not None]
    average = mean_of_subsets(values) if values else None
    return ParalinguisticReport(
        per_task,
        average,
        {t: unscored[t] for t in tasks},
        [verdicts[r.id] for r in records if r.id in verdicts],
        dict(failures or {}),
    )


def run_paralinguistic(
    records: Sequence[EvalRecord],
    backend_factory: BackendFactory,
    transcriber: Transcriber,
    judge: Judge,
    tools: Optional[ToolDispatcher] = None,
    options: TurnOptions = TurnOptions(),
    workers: int = 4,
    progress: bool = False,
) -> ParalinguisticReport:
    """
    Run the paralinguistic benchmark.

    Args:
        records: Paralinguistic records (one turn each)
        backend_factory: Per-record backend factory keyed by record id
        transcriber: ASR over the model's spoken answer
        judge: Text judge over transcript and gold annotation
        tools: Tool dispatcher handed to each session
        options: Turn options
        workers: Worker threads
        progress: Show a progress bar

    Returns:
        ParalinguisticReport with per-task accuracy, average and verdicts
    """
    bad = [r.id for r in records if not r.is_paralinguistic]
    if bad:
        raise DatasetError(f"not paralinguistic records: {bad[:5]}")
    counts = Counter(r.task for r in records)
    if len(set(counts.values())) > 1:
        logger.warning(f"Uneven task partition counts={dict(counts)}")

    def score(record: EvalRecord) -> JudgeVerdict:
        result = run_conversation(record, backend_factory, tools, options)[-1]
        return judge.judge(record, transcriber.transcribe(result))

    verdicts, failures = map_records(records, score, workers, "paralinguistic", progress)
    report = summarize_verdicts(records, verdicts, failures)
    logger.info(
        f"Paralinguistic run done records={len(records)} unscored={report.total_unscored} "
        f"average={report.average}"
    )
    return report
