"""
End-to-end tests for the speechlm command line.
"""

import json
import os

import pytest

from speechlm_runtime.cli.app import EXIT_INPUT, EXIT_INTERNAL, EXIT_OK, main
from speechlm_runtime.interleave.codec import AUDIO_PAD, TEXT_PAD
from speechlm_runtime.session import ScriptedBackend, Session, TranscriptRecorder


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for key in list(os.environ):
        if key.startswith("SPEECHLM_"):
            monkeypatch.delenv(key)


class TestCodecCommands:
    def test_mux_demux_restores_files(self, tmp_path, rng, capsys):
        for trial in range(5):
            text = rng.integers(0, TEXT_PAD, size=int(rng.integers(0, 30))).tolist()
            audio = rng.integers(0, AUDIO_PAD, size=int(rng.integers(0, 90))).tolist()
            text_path = tmp_path / f"text{trial}.txt"
            audio_path = tmp_path / f"audio{trial}.txt"
            text_path.write_text("".join(f"{i}\n" for i in text))
            audio_path.write_text("".join(f"{i}\n" for i in audio))
            seq_path = tmp_path / f"seq{trial}.ilv"

            assert main(["mux", "--text", str(text_path), "--audio", str(audio_path), "--out", str(seq_path),
                         "--n-text", "2", "--n-audio", "5"]) == EXIT_OK
            text_out = tmp_path / f"text{trial}.out"
            audio_out = tmp_path / f"audio{trial}.out"
            assert main(["demux", str(seq_path), "--text-out", str(text_out), "--audio-out", str(audio_out),
                         "--strip"]) == EXIT_OK

            assert text_out.read_bytes() == text_path.read_bytes()
            assert audio_out.read_bytes() == audio_path.read_bytes()
        capsys.readouterr()

    def test_bad_token_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("1\ntwo\n")
        code = main(["mux", "--text", str(bad), "--audio", str(bad), "--out", str(tmp_path / "x.ilv")])
        assert code == EXIT_INPUT
        assert "error:" in capsys.readouterr().err

    def test_missing_input(self, tmp_path):
        assert main(["demux", str(tmp_path / "none.ilv"), "--text-out", "t", "--audio-out", "a"]) == EXIT_INPUT


class TestUsage:
    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["transmogrify"])
        assert exc.value.code == EXIT_INPUT
        assert "usage:" in capsys.readouterr().err

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == EXIT_INPUT

    def test_help(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for command in ("mux", "demux", "vad", "library", "replay", "score", "bench", "reward", "serve"):
            assert command in out


class TestScoreCommands:
    def test_table(self, capsys):
        assert main(["score", "table"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "MISMATCH" not in out
        assert "averages reproduced" in out

    def test_asr(self, write_jsonl, capsys):
        path = write_jsonl("pairs.jsonl", [{"ref": "the cat sat", "hyp": "the cat sat"}, {"ref": "a b", "hyp": "a"}])
        assert main(["score", "asr", "--pairs", path]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["numerator"] == 1
        assert report["denominator"] == 5
        assert report["value"] == pytest.approx(20.0)

    def test_bleu_identity(self, write_jsonl, capsys):
        path = write_jsonl("bleu.jsonl", [{"ref": "the quick brown fox jumps", "hyp": "the quick brown fox jumps"}])
        assert main(["score", "bleu", "--pairs", path]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["bleu"] == 100.0

    def test_toolcall(self, write_jsonl, capsys):
        rows = [
            {"gold_trigger": True, "gold_tool": "weather", "gold_params": {"location": "Paris"},
             "predicted": {"name": "weather", "arguments": {"location": "Paris"}}},
            {"gold_trigger": False, "gold_tool": None, "predicted": None},
        ]
        path = write_jsonl("outcomes.jsonl", rows)
        assert main(["score", "toolcall", "--outcomes", path]) == EXIT_OK
        metrics = json.loads(capsys.readouterr().out)
        assert metrics["precision"]["value"] == 100.0
        assert metrics["recall"]["value"] == 100.0

    def test_toolcall_id_gold_predicted_rows(self, write_jsonl, capsys):
        rows = [
            {"id": "a", "gold": {"name": "weather", "arguments": {"location": "Paris"}},
             "predicted": {"name": "weather", "arguments": {"location": "paris"}}},
            {"id": "b", "gold": {"name": "web_search", "arguments": {"query": "news"}}, "predicted": None},
            {"id": "c", "gold": None, "predicted": {"name": "datetime", "arguments": {}}},
            {"id": "d", "gold": None, "predicted": None},
        ]
        path = write_jsonl("outcomes.jsonl", rows)
        assert main(["score", "toolcall", "--outcomes", path]) == EXIT_OK
        metrics = json.loads(capsys.readouterr().out)
        assert metrics["precision"]["value"] == 50.0
        assert metrics["recall"]["value"] == 50.0
        assert metrics["parameter_accuracy"]["value"] == 100.0

    def test_toolcall_gold_without_name(self, write_jsonl):
        path = write_jsonl("outcomes.jsonl", [{"id": "a", "gold": {"arguments": {}}, "predicted": None}])
        assert main(["score", "toolcall", "--outcomes", path]) == EXIT_INPUT

    def test_toolcall_bad_row(self, write_jsonl, capsys):
        path = write_jsonl("outcomes.jsonl", [{"predicted": None}])
        assert main(["score", "toolcall", "--outcomes", path]) == EXIT_INPUT


class TestBenchCommands:
    def test_toolcall_fixture_perfect_model(self, tmp_path, capsys):
        out_dir = tmp_path / "fixture"
        assert main(["bench", "make-fixture", "toolcall", "--out", str(out_dir), "--per-group", "3",
                     "--seed", "7"]) == EXIT_OK
        manifest, script = capsys.readouterr().out.split()

        report_path = tmp_path / "report.json"
        code = main(["bench", "toolcall", "--dataset", manifest, "--model", f"scripted:{script}",
                     "--workers", "2", "--out", str(report_path)])
        assert code == EXIT_OK
        assert "trigger P" in capsys.readouterr().out
        report = json.loads(report_path.read_text())
        for tool, metrics in report["tools"].items():
            assert metrics["precision"]["value"] == 100.0
            assert metrics["recall"]["value"] == 100.0
            assert metrics["type_accuracy"]["value"] == 100.0
            assert metrics["parameter_accuracy"]["value"] == (None if tool == "datetime" else 100.0)
            assert metrics["unscored"] == 0

    def test_paralinguistic_fixture_perfect_model(self, tmp_path, capsys):
        out_dir = tmp_path / "fixture"
        assert main(["bench", "make-fixture", "paralinguistic", "--out", str(out_dir), "--per-group", "1"]) == EXIT_OK
        manifest, script = capsys.readouterr().out.split()
        report_path = tmp_path / "report.json"
        assert main(["bench", "paralinguistic", "--dataset", manifest, "--model", f"scripted:{script}",
                     "--out", str(report_path)]) == EXIT_OK
        assert json.loads(report_path.read_text())["average"] == 100.0

    def test_manifest_and_backend_aliases(self, tmp_path, capsys):
        out_dir = tmp_path / "fixture"
        main(["bench", "make-fixture", "toolcall", "--out", str(out_dir), "--per-group", "1"])
        manifest, script = capsys.readouterr().out.split()
        report_path = tmp_path / "report.json"
        assert main(["bench", "toolcall", "--manifest", manifest, "--backend", f"scripted:{script}",
                     "--out", str(report_path)]) == EXIT_OK
        assert json.loads(report_path.read_text())["tools"]["weather"]["recall"]["value"] == 100.0

    def test_dataset_required(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bench", "toolcall", "--model", "stub:"])
        assert exc.value.code == EXIT_INPUT

    def test_missing_script(self, tmp_path, capsys):
        out_dir = tmp_path / "fixture"
        main(["bench", "make-fixture", "toolcall", "--out", str(out_dir), "--per-group", "1"])
        manifest, _ = capsys.readouterr().out.split()
        code = main(["bench", "toolcall", "--dataset", manifest, "--model", "scripted:/nonexistent.json"])
        assert code == EXIT_INPUT


class TestRewardCommand:
    def test_score(self, write_jsonl, capsys):
        rows = [
            {"id": "a", "group_id": "p", "thinking_tokens": 12},
            {"id": "b", "group_id": "p", "thinking_tokens": 0},
        ]
        path = write_jsonl("traces.jsonl", rows)
        assert main(["reward", "score", "--traces", path, "--max-len", "32"]) == EXIT_OK
        lines = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert [line["length_reward"] for line in lines] == [1, 0]
        assert [line["advantage"] for line in lines] == [1.0, -1.0]

    def test_bad_limit(self, write_jsonl):
        path = write_jsonl("traces.jsonl", [{"id": "a", "thinking_tokens": 1}])
        assert main(["reward", "score", "--traces", path, "--max-len", "0"]) == EXIT_INPUT


class TestReplayCommand:
    @pytest.fixture
    def transcript(self, tmp_path, speech_clip, dispatcher):
        path = tmp_path / "s1.jsonl"
        backend = ScriptedBackend(
            [{"tool_calls": [{"name": "datetime", "arguments": {}}], "text": "noon"}, {"text": "bye", "audio": [3]}]
        )
        session = Session("s1", backend, dispatcher, recorder=TranscriptRecorder(str(path)))
        session.run_turn(speech_clip)
        session.run_turn(speech_clip)
        session.close()
        return path

    def test_identical(self, transcript, capsys):
        assert main(["replay", str(transcript)]) == EXIT_OK
        assert "2 turns replayed identically" in capsys.readouterr().out

    def test_diverged(self, transcript, capsys):
        records = [json.loads(line) for line in transcript.read_text().splitlines()]
        for record in records:
            if record["event"] == "turn_end" and record["turn"] == 1:
                record["result"]["text_str"] = "tampered"
        transcript.write_text("".join(json.dumps(r) + "\n" for r in records))
        assert main(["replay", str(transcript)]) == EXIT_INTERNAL
        assert "DIVERGED" in capsys.readouterr().out

    def test_missing(self, tmp_path):
        assert main(["replay", str(tmp_path / "none.jsonl")]) == EXIT_INPUT
