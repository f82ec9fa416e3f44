"""
Tests for benchmark records, judges, the paralinguistic and tool-call runs,
fixtures and clip mixtures.
"""

import json
import random

import numpy as np
import pytest

from speechlm_runtime.audio.pcm import PcmClip, write_wav
from speechlm_runtime.errors import ConfigError, DatasetError, RateMismatch
from speechlm_runtime.evaluation import (
    PARALINGUISTIC_TASKS,
    EchoTranscriber,
    EvalRecord,
    ExactMatchJudge,
    JudgeVerdict,
    PromptedJudge,
    build_mixture,
    make_paralinguistic_fixture,
    make_toolcall_fixture,
    oracle_factory,
    read_manifest,
    run_paralinguistic,
    run_toolcall,
    summarize_predictions,
    summarize_verdicts,
)
from speechlm_runtime.evaluation.judges import parse_judge_reply
from speechlm_runtime.evaluation.records import load_audio, record_from_dict, turn_audio
from speechlm_runtime.session.backends import ScriptedBackend, create_backend_factory
from speechlm_runtime.tools.calls import TOOL_SCHEMAS, ToolCall

TABLE_ROW = [98, 92, 78, 64, 46, 72, 78, 70, 78, 84, 82]


def _record(record_id, task="emotion", gold="happy", label="positive", intended=None, turns=None):
    turns = turns or (({"tone": {"seconds": 0.6}},),)
    return EvalRecord(record_id, task, turns, gold, label=label, intended_tool=intended)


class FailingJudge(ExactMatchJudge):
    def __init__(self, fail_ids):
        super().__init__()
        self.fail_ids = set(fail_ids)

    def judge(self, record, transcript):
        if record.id in self.fail_ids:
            raise TimeoutError("judge did not answer")
        return super().judge(record, transcript)


class TestRecords:
    def test_paralinguistic_record(self):
        record = record_from_dict({"id": "p1", "task": "pitch", "audio": ["a.wav"], "gold": "high"})
        assert record.is_paralinguistic
        assert record.turns == (({"path": "a.wav"},),)
        assert record.gold_trigger

    def test_toolcall_record(self):
        record = record_from_dict(
            {
                "id": "w1",
                "task": "weather",
                "label": "negative",
                "intended_tool": "datetime",
                "turns": [{"audio": {"silence": 0.2}}, {"audio": [{"tone": {"seconds": 0.5}}]}],
            }
        )
        assert not record.is_paralinguistic
        assert not record.gold_trigger
        assert len(record.turns) == 2

    @pytest.mark.parametrize(
        "data",
        [
            {"task": "pitch", "audio": "a.wav"},
            {"id": "x", "task": "juggling", "audio": "a.wav"},
            {"id": "x", "task": "pitch"},
            {"id": "x", "task": "weather", "audio": "a.wav", "label": "maybe"},
        ],
    )
    def test_invalid_records(self, data):
        with pytest.raises(DatasetError):
            record_from_dict(data)

    def test_manifest_duplicate_ids(self, write_jsonl):
        row = {"id": "p1", "task": "age", "audio": {"silence": 0.1}}
        with pytest.raises(DatasetError):
            read_manifest(write_jsonl("m.jsonl", [row, row]))

    def test_manifest_missing(self, tmp_path):
        with pytest.raises(DatasetError):
            read_manifest(str(tmp_path / "none.jsonl"))

    def test_audio_references(self, tmp_path, write_jsonl):
        write_wav(str(tmp_path / "clip.wav"), PcmClip.tone(0.5, sample_rate=16000))
        path = write_jsonl(
            "m.jsonl",
            [{"id": "p1", "task": "gender", "audio": ["clip.wav", {"silence": 0.25}, {"tone": {"seconds": 0.25}}]}],
        )
        record = read_manifest(path)[0]
        clip = turn_audio(record, 0)
        assert clip.sample_rate == 24000
        assert clip.duration == pytest.approx(1.0, abs=1e-3)

    def test_mixture_reference(self):
        source, speech = {"silence": 0.5}, {"tone": {"seconds": 0.25}}
        after = load_audio({"mixture": {"source": [source], "speech": speech, "placement": "after"}})
        expected = build_mixture([load_audio(source)], load_audio(speech), "after")
        assert after == expected
        assert after.slice_seconds(0.5, 0.75) == load_audio(speech)

    def test_mixed_mixture_reference(self):
        spec = {"source": {"tone": {"seconds": 1.0}}, "speech": {"tone": {"seconds": 0.5}}, "mode": "mix"}
        ref = {"mixture": spec}
        assert load_audio(ref).duration == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "ref",
        [
            {"mixture": {"speech": {"silence": 0.1}}},
            {"mixture": {"source": [{"silence": 0.1}]}},
            {"mixture": {"source": [{"silence": 0.1}], "speech": {"silence": 0.1}, "mode": "overlay"}},
        ],
    )
    def test_bad_mixture_reference(self, ref):
        with pytest.raises((DatasetError, ConfigError)):
            load_audio(ref)

    def test_paralinguistic_fixture_uses_mixtures(self, paralinguistic_fixture):
        records, _ = paralinguistic_fixture
        placements = set()
        for record in records:
            (ref,) = record.turns[0]
            spec = ref["mixture"]
            placements.add(spec["placement"])
            (source,) = spec["source"]
            if record.task in ("scenario", "event", "vocal"):
                assert source["mixture"]["mode"] == "mix"
                background = max(source["mixture"]["source"][0]["tone"]["seconds"],
                                 source["mixture"]["speech"]["tone"]["seconds"])
                expected = background + spec["speech"]["tone"]["seconds"]
            else:
                assert "tone" in source
                expected = source["tone"]["seconds"] + spec["speech"]["tone"]["seconds"]
            assert turn_audio(record, 0).duration == pytest.approx(expected, abs=1e-3)
        assert placements == {"before", "after"}

    def test_missing_audio_file(self, tmp_path):
        with pytest.raises(DatasetError):
            load_audio({"path": "gone.wav"}, str(tmp_path))
        with pytest.raises(DatasetError):
            load_audio({"noise": 1})


class TestJudges:
    def test_exact_match_normalizes(self):
        judge = ExactMatchJudge()
        assert judge.judge(_record("r", gold="Young adult"), "young adult.").correct
        assert not judge.judge(_record("r", gold="male"), "female").correct
        assert not judge.judge(_record("r", gold=""), "").correct

    def test_prompted_judge(self):
        prompts = []

        def complete(prompt):
            prompts.append(prompt)
            return 'Verdict: {"correct": true, "rationale": "same emotion"}'

        judge = PromptedJudge(complete)
        verdict = judge.judge(_record("r7", gold="happy"), "she sounds happy")
        assert verdict == JudgeVerdict("r7", True, "same emotion")
        assert "Reference annotation: happy" in prompts[0]
        assert "Transcribed answer: she sounds happy" in prompts[0]

    @pytest.mark.parametrize("reply", ["no json here", "{not json}", '{"correct": "yes"}'])
    def test_bad_replies(self, reply):
        with pytest.raises(DatasetError):
            parse_judge_reply("r", reply)

    def test_verdict_dict(self):
        assert JudgeVerdict("a", False, "x").to_dict() == {"id": "a", "correct": False, "rationale": "x"}


@pytest.fixture
def paralinguistic_fixture(tmp_path):
    manifest, script = make_paralinguistic_fixture(str(tmp_path / "para"), per_task=2, seed=3)
    return read_manifest(manifest), script


@pytest.fixture
def toolcall_fixture(tmp_path):
    manifest, script = make_toolcall_fixture(str(tmp_path / "tools"), per_tool=4, seed=5)
    return read_manifest(manifest), script


class TestParalinguistic:
    def test_perfect_model(self, paralinguistic_fixture):
        records, script = paralinguistic_fixture
        report = run_paralinguistic(
            records, create_backend_factory(f"scripted:{script}"), EchoTranscriber(), ExactMatchJudge(), workers=2
        )
        assert list(report.per_task) == list(PARALINGUISTIC_TASKS)
        assert all(r.value == 100.0 for r in report.per_task.values())
        assert report.average == 100.0
        assert report.total_unscored == 0
        assert len(report.verdicts) == len(records)

    def test_oracle_factory(self, paralinguistic_fixture):
        records, _ = paralinguistic_fixture
        report = run_paralinguistic(records, oracle_factory(records), EchoTranscriber(), ExactMatchJudge())
        assert report.average == 100.0

    def test_half_right(self, paralinguistic_fixture):
        records, _ = paralinguistic_fixture
        gold = {r.id: r.gold for r in records}

        def factory(record_id):
            answer = gold[record_id] if record_id.endswith("0000") else "no idea"
            return ScriptedBackend([{"text": answer}])

        report = run_paralinguistic(records, factory, EchoTranscriber(), ExactMatchJudge())
        assert all(r.value == 50.0 for r in report.per_task.values())
        assert report.average == 50.0

    def test_injected_verdicts(self):
        records, verdicts = [], {}
        for task, accuracy in zip(PARALINGUISTIC_TASKS, TABLE_ROW):
            for i in range(50):
                record = _record(f"{task}-{i}", task=task)
                records.append(record)
                verdicts[record.id] = JudgeVerdict(record.id, i < accuracy // 2)
        report = summarize_verdicts(records, verdicts)
        assert [r.value for r in report.per_task.values()] == [float(v) for v in TABLE_ROW]
        assert report.average == 76.55

    def test_judge_failure_unscored(self, paralinguistic_fixture):
        records, script = paralinguistic_fixture
        failing = {"emotion-0000", "pitch-0001"}
        report = run_paralinguistic(
            records, create_backend_factory(f"scripted:{script}"), EchoTranscriber(), FailingJudge(failing)
        )
        assert report.total_unscored == 2
        assert set(report.failures) == failing
        assert "TimeoutError" in report.failures["emotion-0000"]
        emotion = report.per_task["emotion"]
        assert (emotion.numerator, emotion.denominator) == (1, 1)
        assert report.unscored["emotion"] == 1
        for task, metric in report.per_task.items():
            assert metric.denominator + report.unscored[task] == 2
        assert report.average == 100.0

    def test_worker_count_does_not_change_report(self, paralinguistic_fixture):
        records, script = paralinguistic_fixture
        factory = create_backend_factory(f"scripted:{script}")
        one = run_paralinguistic(records, factory, EchoTranscriber(), ExactMatchJudge(), workers=1)
        many = run_paralinguistic(records, factory, EchoTranscriber(), ExactMatchJudge(), workers=6)
        assert json.dumps(one.to_dict(), sort_keys=True) == json.dumps(many.to_dict(), sort_keys=True)
        assert one.format_table() == many.format_table()

    def test_rejects_tool_records(self):
        with pytest.raises(DatasetError):
            run_paralinguistic([_record("w", task="weather")], oracle_factory([]), EchoTranscriber(), ExactMatchJudge())


class TestToolcallBench:
    def test_fixture_shape(self, toolcall_fixture):
        records, _ = toolcall_fixture
        assert len(records) == len(TOOL_SCHEMAS) * 8
        assert all(3 <= len(r.turns) <= 6 for r in records)
        negatives = [r for r in records if not r.gold_trigger]
        assert sum(1 for r in negatives if r.intended_tool) == len(TOOL_SCHEMAS) * 2

    def test_perfect_model(self, toolcall_fixture):
        records, script = toolcall_fixture
        report = run_toolcall(records, create_backend_factory(f"scripted:{script}"), workers=3)
        assert list(report.per_tool) == list(TOOL_SCHEMAS)
        for tool, metrics in report.per_tool.items():
            assert metrics["precision"].value == 100.0
            assert metrics["recall"].value == 100.0
            assert metrics["type_accuracy"].value == 100.0
            if tool == "datetime":
                assert metrics["parameter_accuracy"].formatted() == "N/A"
            else:
                assert metrics["parameter_accuracy"].value == 100.0

    def test_silent_model(self, toolcall_fixture):
        records, _ = toolcall_fixture
        report = run_toolcall(records, lambda key: ScriptedBackend([{"text": "hello"}]))
        for metrics in report.per_tool.values():
            assert metrics["recall"].value == 0.0
            assert metrics["precision"].formatted() == "N/A"

    def test_injected_confusion(self):
        records, predictions = [], {}
        call = ToolCall("web_search", {"query": "news"})
        for i in range(200):
            records.append(_record(f"p{i}", task="web_search", gold={"name": "web_search", "arguments": {"query": "news"}}))
            predictions[f"p{i}"] = call if i < 195 else None
            records.append(_record(f"n{i}", task="web_search", gold=None, label="negative"))
            predictions[f"n{i}"] = call if i < 10 else None
        metrics = summarize_predictions(records, predictions).per_tool["web_search"]
        assert metrics["precision"].formatted() == "95.12"
        assert metrics["recall"].formatted() == "97.50"
        assert metrics["recall"].denominator == 200

    def test_intended_other_tool_is_not_a_trigger(self):
        records = [
            _record("p", task="weather", gold={"name": "weather", "arguments": {"location": "Oslo"}}),
            _record("n", task="weather", gold=None, label="negative", intended="datetime"),
        ]
        predictions = {"p": ToolCall("weather", {"location": "oslo"}), "n": ToolCall("datetime", {})}
        metrics = summarize_predictions(records, predictions).per_tool["weather"]
        assert metrics["precision"].value == 100.0

    def test_session_failure_unscored(self):
        turns = tuple(({"silence": 0.5},) for _ in range(3))
        spoken = tuple(({"tone": {"seconds": 0.6}},) for _ in range(3))
        records = [
            _record("p", task="datetime", gold={"name": "datetime"}, turns=turns),
            _record("n", task="datetime", gold=None, label="negative"),
            _record("q", task="datetime", gold={"name": "datetime"}, turns=spoken),
            _record("m", task="datetime", gold=None, label="negative", turns=spoken),
        ]
        report = run_toolcall(records, lambda key: ScriptedBackend([{"text": "ok"}]))
        assert "SilenceRejected" in report.failures["p"]
        assert report.unscored["datetime"] == 1

    def test_positive_without_gold(self):
        with pytest.raises(DatasetError):
            summarize_predictions(
                [_record("p", task="weather", gold=None), _record("n", task="weather", gold=None, label="negative")],
                {"p": None, "n": None},
            )

    def test_failed_sessions_leave_one_class(self):
        records = [
            _record("wp", task="weather", gold={"name": "weather", "arguments": {"location": "Oslo"}}),
            _record("wn", task="weather", gold=None, label="negative"),
            _record("dp", task="datetime", gold={"name": "datetime"}),
            _record("dn", task="datetime", gold=None, label="negative"),
        ]
        predictions = {"wp": ToolCall("weather", {"location": "Oslo"}), "dp": ToolCall("datetime", {}), "dn": None}
        report = summarize_predictions(records, predictions, {"wn": "SilenceRejected: no speech"})
        assert list(report.per_tool) == ["datetime", "weather"]
        assert all(m.formatted() == "N/A" for m in report.per_tool["weather"].values())
        assert report.unscored == {"datetime": 0, "weather": 1}
        assert report.per_tool["datetime"]["precision"].value == 100.0
        assert report.to_dict()["tools"]["weather"]["precision"]["value"] is None

    def test_tool_without_negative_records(self):
        records = [_record("p", task="weather", gold={"name": "weather", "arguments": {"location": "Oslo"}})]
        with pytest.raises(DatasetError):
            summarize_predictions(records, {"p": None})

    def test_report_table(self, toolcall_fixture):
        records, script = toolcall_fixture
        report = run_toolcall(records, create_backend_factory(f"scripted:{script}"))
        table = report.format_table().splitlines()
        assert table[0].split()[0] == "tool"
        assert len(table) == 1 + len(TOOL_SCHEMAS)
        assert set(report.to_dict()["tools"]) == set(TOOL_SCHEMAS)


class TestMixture:
    def test_concat_lengths(self):
        clip = build_mixture([PcmClip.tone(1.0)], PcmClip.tone(2.0, frequency=330))
        assert clip.duration == pytest.approx(3.0)

    def test_placement(self):
        source, speech = PcmClip.silence(0.5), PcmClip.tone(0.25)
        before = build_mixture([source], speech, "before")
        after = build_mixture([source], speech, "after")
        assert before.slice_seconds(0.0, 0.25) == speech
        assert after.slice_seconds(0.5, 0.75) == speech

    def test_random_placement_keeps_duration(self):
        rng = random.Random(2)
        for _ in range(10):
            clip = build_mixture([PcmClip.silence(0.3), PcmClip.tone(0.2)], PcmClip.tone(0.1), rng=rng)
            assert len(clip) == round(0.3 * 24000) + round(0.2 * 24000) + round(0.1 * 24000)

    def test_mix_with_silence(self):
        x = PcmClip.tone(0.5, amplitude=0.4)
        mixed = build_mixture([PcmClip.silence(0.5)], x, mode="mix")
        np.testing.assert_allclose(mixed.samples, x.samples, atol=1e-7)

    def test_mix_adds_samples(self):
        half = PcmClip(np.full(100, 0.5))
        mixed = build_mixture([half], half, mode="mix")
        assert np.all(mixed.samples == 1.0)

    def test_mix_normalizes_peak(self):
        loud = PcmClip(np.full(100, 0.8))
        mixed = build_mixture([loud], loud, mode="mix")
        assert float(np.max(np.abs(mixed.samples))) == pytest.approx(1.0)

    def test_mix_pads_to_longest(self):
        mixed = build_mixture([PcmClip.tone(1.0)], PcmClip.tone(0.5), mode="mix")
        assert mixed.duration == pytest.approx(1.0)

    def test_rate_mismatch(self):
        with pytest.raises(RateMismatch):
            build_mixture([PcmClip.tone(0.1, sample_rate=16000)], PcmClip.tone(0.1))

    def test_bad_options(self):
        with pytest.raises(ConfigError):
            build_mixture([PcmClip.tone(0.1)], PcmClip.tone(0.1), placement="middle")
        with pytest.raises(ConfigError):
            build_mixture([PcmClip.tone(0.1)], PcmClip.tone(0.1), mode="overlay")
