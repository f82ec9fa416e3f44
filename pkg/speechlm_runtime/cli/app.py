#!/usr/bin/env python3
"""
Umbrella command line for the speechlm runtime.

Exit codes: 0 on success, 1 on bad input or usage, 2 on internal errors.
"""

import argparse
import json
import sys
from typing import Dict, List, Optional, Sequence

from speechlm_runtime.audio.pcm import read_wav
from speechlm_runtime.audio.vad import VadConfig, vad_segments
from speechlm_runtime.config import ServiceConfig, load_config
from speechlm_runtime.errors import DatasetError, InputError, SpeechLMError
from speechlm_runtime.evaluation.fixtures import make_paralinguistic_fixture, make_toolcall_fixture
from speechlm_runtime.evaluation.judges import (
    EchoTranscriber,
    ExactMatchJudge,
    HttpCompletion,
    PromptedJudge,
    load_judge_prompt,
)
from speechlm_runtime.evaluation.paralinguistic import run_paralinguistic
from speechlm_runtime.evaluation.records import read_manifest
from speechlm_runtime.evaluation.toolcall_bench import run_toolcall
from speechlm_runtime.interleave.codec import InterleaveConfig, demux, mux
from speechlm_runtime.interleave.token_file import (
    read_sequence,
    read_token_list,
    write_sequence,
    write_token_list,
)
from speechlm_runtime.log import configure_logging, get_logger
from speechlm_runtime.metrics.aggregate import derive_golden_rows
from speechlm_runtime.metrics.bleu import SMOOTHING_METHODS, SMOOTHING_NONE, corpus_bleu
from speechlm_runtime.metrics.error_rate import corpus_error_rate, profile_for
from speechlm_runtime.metrics.toolcall import ToolCallOutcome, toolcall_metrics
from speechlm_runtime.rewards.scoring import read_traces, score_traces
from speechlm_runtime.service.server import serve
from speechlm_runtime.session.backends import create_backend_factory
from speechlm_runtime.session.runtime import TurnOptions
from speechlm_runtime.session.transcript import replay_transcript
from speechlm_runtime.tools.calls import ToolCall
from speechlm_runtime.tools.dispatcher import dispatcher_from_config
from speechlm_runtime.tools.voice_library import audio_search, build_library, load_library

logger = get_logger("cli")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _read_jsonl(path: str) -> List[Dict[str, object]]:
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise DatasetError(f"{path}:{lineno}: invalid JSON: {e}")
    return rows


def _print_json(value: object):
    print(json.dumps(value, indent=2, ensure_ascii=False, sort_keys=True))


def _write_json(path: Optional[str], value: object):
    if path:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(value, f, indent=2, ensure_ascii=False, sort_keys=True)
        logger.info(f"Wrote report: {path}")


def _load_cfg(args) -> ServiceConfig:
    overrides = {
        "host": getattr(args, "host", None),
        "port": getattr(args, "port", None),
        "backend": getattr(args, "backend", None),
        "library_path": getattr(args, "library", None),
        "transcript_dir": getattr(args, "transcript_dir", None),
        "status_port": getattr(args, "status_port", None),
        "workers": getattr(args, "workers", None),
    }
    return load_config(args.config, overrides=overrides)


def _interleave_cfg(args) -> InterleaveConfig:
    return InterleaveConfig(args.n_text, args.n_audio)


# Codec


def cmd_mux(args) -> int:
    seq = mux(read_token_list(args.text), read_token_list(args.audio), _interleave_cfg(args))
    write_sequence(args.out, seq)
    print(f"{args.out}: {len(seq)} tokens in {seq.num_blocks} blocks")
    return EXIT_OK


def cmd_demux(args) -> int:
    seq = read_sequence(args.sequence)
    text, audio = demux(seq, strip_padding=args.strip)
    write_token_list(args.text_out, text)
    write_token_list(args.audio_out, audio)
    print(f"text={len(text)} audio={len(audio)}")
    return EXIT_OK


# Audio


def cmd_vad(args) -> int:
    clip = read_wav(args.wav)
    cfg = VadConfig(args.window_ms, args.threshold, args.hangover_ms, args.min_segment_ms)
    for start, end in vad_segments(clip, cfg):
        print(json.dumps({"start_ms": round(start * 1000.0, 3), "end_ms": round(end * 1000.0, 3)}))
    return EXIT_OK


# Voice library


def cmd_library_build(args) -> int:
    path = build_library(args.directory)
    print(path)
    return EXIT_OK


def cmd_library_search(args) -> int:
    library = load_library(args.directory)
    entries = audio_search(args.query, args.k, library)
    _print_json([{"id": e.id, "transcription": e.transcription, "description": e.description} for e in entries])
    return EXIT_OK


# Transcripts


def cmd_replay(args) -> int:
    replayed = replay_transcript(args.transcript)
    diverged = [t.index for t in replayed if not t.matches]
    for turn in replayed:
        print(f"turn {turn.index}: {'identical' if turn.matches else 'DIVERGED'}")
    if diverged:
        logger.error(f"Replay diverged turns={diverged}")
        return EXIT_INTERNAL
    print(f"{len(replayed)} turns replayed identically")
    return EXIT_OK


# Scoring


def cmd_score_asr(args) -> int:
    pairs = [(str(r["ref"]), str(r["hyp"])) for r in _read_jsonl(args.pairs)]
    report = corpus_error_rate(pairs, profile_for(args.profile))
    _print_json(report.to_dict())
    return EXIT_OK


def _bleu_tokens(text: str, mode: str) -> List[str]:
    if mode == "char":
        return [c for c in text if not c.isspace()]
    return text.split()


def cmd_score_bleu(args) -> int:
    refs_per_sentence = []
    hyps = []
    for row in _read_jsonl(args.pairs):
        refs = row.get("refs") or [row.get("ref", "")]
        refs_per_sentence.append([_bleu_tokens(str(r), args.tokenize) for r in refs])
        hyps.append(_bleu_tokens(str(row.get("hyp", "")), args.tokenize))
    score = corpus_bleu(refs_per_sentence, hyps, args.max_n, args.smoothing)
    _print_json({"bleu": round(score, 2), "sentences": len(hyps), "smoothing": args.smoothing})
    return EXIT_OK


def _outcome_from_row(row: Dict[str, object]) -> ToolCallOutcome:
    """
    One scored outcome line, either {id, gold, predicted} where gold is a
    call {name, arguments} or null for a negative, or the flat
    {gold_trigger, gold_tool, gold_params, predicted} form.
    """
    predicted = row.get("predicted")
    call = None
    if predicted:
        call = ToolCall.unchecked(str(predicted["name"]), predicted.get("arguments") or {})
    if "gold" in row:
        gold = row["gold"]
        if not gold:
            return ToolCallOutcome(False, predicted_call=call)
        if not isinstance(gold, dict) or "name" not in gold:
            raise DatasetError(f"outcome gold must be a call with a name or null: {row}")
        return ToolCallOutcome(True, str(gold["name"]), dict(gold.get("arguments") or {}), call)
    if "gold_trigger" not in row:
        raise DatasetError(f"outcome line needs gold or gold_trigger: {row}")
    gold_tool = row.get("gold_tool")
    return ToolCallOutcome(
        bool(row["gold_trigger"]),
        gold_tool,
        (row.get("gold_params") or {}) if gold_tool is not None else None,
        call,
    )


def cmd_score_toolcall(args) -> int:
    outcomes = [_outcome_from_row(r) for r in _read_jsonl(args.outcomes)]
    metrics = toolcall_metrics(outcomes)
    _print_json({name: report.to_dict() for name, report in metrics.items()})
    return EXIT_OK


def cmd_score_table(args) -> int:
    rows = derive_golden_rows(args.golden)
    current = None
    for row in rows:
        if row.table != current:
            current = row.table
            print(f"[{current}]")
        status = "ok" if row.matches else "MISMATCH"
        print(f"  {row.system:<12} derived={row.derived:<8} reported={row.reported:<8} {status}")
    bad = [r for r in rows if not r.matches]
    if bad:
        logger.error(f"Golden averages do not match count={len(bad)}")
        return EXIT_INPUT
    print(f"{len(rows)} averages reproduced")
    return EXIT_OK


# Benchmarks


def _bench_setup(args):
    cfg = _load_cfg(args)
    options = TurnOptions.from_config(cfg)
    records = read_manifest(args.dataset)
    factory = create_backend_factory(cfg.backend, options.interleave)
    return cfg, options, records, factory, dispatcher_from_config(cfg)


def cmd_bench_paralinguistic(args) -> int:
    cfg, options, records, factory, tools = _bench_setup(args)
    if args.judge_url:
        judge = PromptedJudge(HttpCompletion(args.judge_url), load_judge_prompt(args.judge_prompt))
    else:
        judge = ExactMatchJudge(profile_for(args.profile))
    report = run_paralinguistic(
        records, factory, EchoTranscriber(), judge, tools, options, cfg.workers, args.progress
    )
    print(report.format_table())
    _write_json(args.out, report.to_dict())
    return EXIT_OK


def cmd_bench_toolcall(args) -> int:
    cfg, options, records, factory, tools = _bench_setup(args)
    report = run_toolcall(records, factory, tools, options, cfg.workers, args.progress)
    print(report.format_table())
    _write_json(args.out, report.to_dict())
    return EXIT_OK


def cmd_bench_make_fixture(args) -> int:
    if args.dataset == "toolcall":
        manifest, script = make_toolcall_fixture(args.out, args.per_group or 200, args.seed)
    else:
        manifest, script = make_paralinguistic_fixture(args.out, args.per_group or 50, args.seed)
    print(manifest)
    print(script)
    return EXIT_OK


# Rewards


def cmd_reward_score(args) -> int:
    for scored in score_traces(read_traces(args.traces), args.max_len):
        print(json.dumps(scored.to_dict(), sort_keys=True))
    return EXIT_OK


# Service


def cmd_serve(args) -> int:
    serve(_load_cfg(args))
    return EXIT_OK


def _add_ratio(parser):
    parser.add_argument("--n-text", type=int, default=1, help="Text tokens per block (default: 1)")
    parser.add_argument("--n-audio", type=int, default=3, help="Audio tokens per block (default: 3)")


def _add_bench_common(parser):
    parser.add_argument(
        "--dataset", "--manifest", dest="dataset", required=True, help="Benchmark manifest (JSONL)"
    )
    parser.add_argument("--model", "--backend", dest="backend", help="Backend spec: stub: or scripted:<path>")
    parser.add_argument("--library", help="Voice library directory for audio_search")
    parser.add_argument("--workers", type=int, help="Worker threads")
    parser.add_argument("--out", help="Write the JSON report here")
    parser.add_argument("--progress", action="store_true", help="Show a progress bar")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="speechlm", description="Speech language model runtime and evaluation toolkit")
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--log-level", default="WARNING", help="Logging level (default: WARNING)")
    commands = parser.add_subparsers(dest="command", metavar="command", parser_class=ArgumentParser)
    commands.required = True

    p = commands.add_parser("mux", help="Interleave text and audio token files")
    p.add_argument("--text", required=True, help="Text token ids, one per line")
    p.add_argument("--audio", required=True, help="Audio token ids, one per line")
    p.add_argument("--out", required=True, help="Output ILV1 sequence file")
    _add_ratio(p)
    p.set_defaults(func=cmd_mux)

    p = commands.add_parser("demux", help="Split an ILV1 sequence into token files")
    p.add_argument("sequence", help="ILV1 sequence file")
    p.add_argument("--text-out", required=True, help="Text token output file")
    p.add_argument("--audio-out", required=True, help="Audio token output file")
    p.add_argument("--strip", action="store_true", help="Drop trailing padding")
    p.set_defaults(func=cmd_demux)

    p = commands.add_parser("vad", help="Print speech segments of a WAV file")
    p.add_argument("wav", help="Input WAV file")
    p.add_argument("--window-ms", type=float, default=20.0, help="Analysis window (default: 20)")
    p.add_argument("--threshold", type=float, default=-40.0, help="Energy threshold in dBFS (default: -40)")
    p.add_argument("--hangover-ms", type=float, default=200.0, help="Gap merged into a segment (default: 200)")
    p.add_argument("--min-segment-ms", type=float, default=100.0, help="Shortest segment kept (default: 100)")
    p.set_defaults(func=cmd_vad)

    library = commands.add_parser("library", help="Voice library tools")
    library_commands = library.add_subparsers(dest="library_command", metavar="action", parser_class=ArgumentParser)
    library_commands.required = True
    p = library_commands.add_parser("build", help="Compute the embedding sidecar")
    p.add_argument("directory", help="Library directory with manifest.jsonl")
    p.set_defaults(func=cmd_library_build)
    p = library_commands.add_parser("search", help="Query the library")
    p.add_argument("directory", help="Library directory with manifest.jsonl")
    p.add_argument("--query", required=True, help="Text query")
    p.add_argument("--k", type=int, default=3, help="Number of results (default: 3)")
    p.set_defaults(func=cmd_library_search)

    p = commands.add_parser("replay", help="Replay a session transcript and compare results")
    p.add_argument("transcript", help="Transcript JSONL file")
    p.set_defaults(func=cmd_replay)

    score = commands.add_parser("score", help="Metrics over prepared files")
    score_commands = score.add_subparsers(dest="score_command", metavar="metric", parser_class=ArgumentParser)
    score_commands.required = True
    p = score_commands.add_parser("asr", help="Corpus WER/CER from {ref, hyp} lines")
    p.add_argument("--pairs", required=True, help="JSONL with ref and hyp")
    p.add_argument("--profile", default="english", choices=["english", "chinese"], help="Normalization profile")
    p.set_defaults(func=cmd_score_asr)
    p = score_commands.add_parser("bleu", help="Corpus BLEU from {ref|refs, hyp} lines")
    p.add_argument("--pairs", required=True, help="JSONL with ref or refs, and hyp")
    p.add_argument("--max-n", type=int, default=4, help="Highest n-gram order (default: 4)")
    p.add_argument("--smoothing", default=SMOOTHING_NONE, choices=SMOOTHING_METHODS, help="Smoothing method")
    p.add_argument("--tokenize", default="word", choices=["word", "char"], help="Tokenization")
    p.set_defaults(func=cmd_score_bleu)
    p = score_commands.add_parser("toolcall", help="Tool-call funnel metrics from outcome lines")
    p.add_argument("--outcomes", required=True, help="JSONL of {id, gold, predicted} lines")
    p.set_defaults(func=cmd_score_toolcall)
    p = score_commands.add_parser("table", help="Re-derive the bundled golden averages")
    p.add_argument("--golden", help="Golden table JSON (default: bundled)")
    p.set_defaults(func=cmd_score_table)

    bench = commands.add_parser("bench", help="Benchmark runners")
    bench_commands = bench.add_subparsers(dest="bench_command", metavar="benchmark", parser_class=ArgumentParser)
    bench_commands.required = True
    p = bench_commands.add_parser("paralinguistic", help="Paralinguistic understanding benchmark")
    _add_bench_common(p)
    p.add_argument("--judge-url", help="Completion endpoint for the prompted judge")
    p.add_argument("--judge-prompt", help="Judge prompt template (default: bundled v1)")
    p.add_argument("--profile", default="english", choices=["english", "chinese"], help="Exact-match normalization")
    p.set_defaults(func=cmd_bench_paralinguistic)
    p = bench_commands.add_parser("toolcall", help="Tool-call benchmark")
    _add_bench_common(p)
    p.set_defaults(func=cmd_bench_toolcall)
    p = bench_commands.add_parser("make-fixture", help="Write a synthetic fixture and its perfect model script")
    p.add_argument("dataset", choices=["toolcall", "paralinguistic"], help="Fixture kind")
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--per-group", type=int, help="Records per tool (200) or per task (50)")
    p.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    p.set_defaults(func=cmd_bench_make_fixture)

    reward = commands.add_parser("reward", help="Reward shaping")
    reward_commands = reward.add_subparsers(dest="reward_command", metavar="action", parser_class=ArgumentParser)
    reward_commands.required = True
    p = reward_commands.add_parser("score", help="Length rewards and group advantages for traces")
    p.add_argument("--traces", required=True, help="JSONL with id, thinking_tokens, group_id, reward")
    p.add_argument("--max-len", type=int, required=True, help="Thinking-length limit")
    p.set_defaults(func=cmd_reward_score)

    p = commands.add_parser("serve", help="Run the streaming session service")
    p.add_argument("--host", help="Bind address")
    p.add_argument("--port", type=int, help="Port")
    p.add_argument("--backend", help="Backend spec: stub: or scripted:<path>")
    p.add_argument("--library", help="Voice library directory")
    p.add_argument("--transcript-dir", help="Write one transcript per session here")
    p.add_argument("--status-port", type=int, help="Serve /api/status on this port")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.func(args)
    except (InputError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except SpeechLMError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as e:
        logger.exception(f"Unhandled error command={args.command}")
        print(f"internal error: {e!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
