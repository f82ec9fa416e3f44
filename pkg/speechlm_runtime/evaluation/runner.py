"""
Shared machinery for benchmark runs: conversations through sessions and a
worker pool whose results are merged by record id.
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

from tqdm import tqdm

from speechlm_runtime.evaluation.records import EvalRecord, turn_audio
from speechlm_runtime.log import get_logger
from speechlm_runtime.session.backends import BackendFactory, ScriptedBackend
from speechlm_runtime.session.conversation import Session
from speechlm_runtime.session.detokenizer import SineDetokenizer
from speechlm_runtime.session.runtime import TurnOptions, TurnResult
from speechlm_runtime.tools.dispatcher import ToolDispatcher

logger = get_logger("evaluation.runner")

T = TypeVar("T")


def run_conversation(
    record: EvalRecord,
    backend_factory: BackendFactory,
    tools: Optional[ToolDispatcher] = None,
    options: TurnOptions = TurnOptions(),
    sample_rate: int = 24000,
) -> List[TurnResult]:
    """Play every turn of a record through a fresh session."""
    session = Session(
        record.id,
        backend_factory(record.id),
        tools,
        SineDetokenizer(sample_rate),
        options,
    )
    return [session.run_turn(turn_audio(record, i, sample_rate)) for i in range(len(record.turns))]


def map_records(
    records: Sequence[EvalRecord],
    fn: Callable[[EvalRecord], T],
    workers: int = 4,
    desc: str = "records",
    progress: bool = False,
) -> Tuple[Dict[str, T], Dict[str, str]]:
    """
    Apply fn to every record in a thread pool.

    Returns:
        (results by record id, failure reasons by record id); the outcome
        does not depend on scheduling order
    """
    results: Dict[str, T] = {}
    failures: Dict[str, str] = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = {executor.submit(fn, record): record.id for record in records}
        for future in tqdm(as_completed(futures), total=len(futures), desc=desc, disable=not progress):
            record_id = futures[future]
            try:
                results[record_id] = future.result()
            except Exception as e:
                failures[record_id] = f"{type(e).__name__}: {e}"
                logger.debug(f"Record failed id={record_id} reason={failures[record_id]}")
    if failures:
        logger.warning(f"Unscored records desc={desc} count={len(failures)}")
    return results, failures


def oracle_factory(records: Sequence[EvalRecord]) -> BackendFactory:
    """Backend that answers each paralinguistic record with its gold text."""
    answers = {r.id: str(r.gold or "") for r in records}

    def create(session_key: str):
        return ScriptedBackend([{"text": answers.get(session_key, "")}])

    return create
