"""
Tests for the wire protocol, the session service over loopback and the
service configuration.
"""

import io
import struct
import threading
import time

import pytest

from speechlm_runtime.config import ServiceConfig, load_config, parse_key_values
from speechlm_runtime.errors import ConfigError, ProtocolError
from speechlm_runtime.interleave.text import ByteTokenizer
from speechlm_runtime.service.client import SessionClient
from speechlm_runtime.service.protocol import (
    MAX_AUDIO_CHUNK,
    FrameType,
    WireFrame,
    decode_body,
    encode_frame,
    hello_payload,
    parse_hello,
    parse_token,
    read_frame,
    token_payload,
)
from speechlm_runtime.service.server import SessionService, create_server
from speechlm_runtime.session.backends import ScriptedBackend


def _wait_until(predicate, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if predicate():
            return True
        time.sleep(0.01)
    return predicate()


class TestProtocol:
    def test_frame_layout(self):
        data = encode_frame(WireFrame(FrameType.TEXT_PARTIAL, "ab", 7, token_payload(104)))
        header = bytes([2]) + struct.pack("<IH", 7, 2)
        assert data == struct.pack("<I", 13) + header + b"ab" + struct.pack("<I", 104)

    def test_read_stream(self):
        frames = [
            WireFrame(FrameType.HELLO, "s", 0, hello_payload(16000)),
            WireFrame(FrameType.AUDIO_IN, "s", 1, b"\x01\x00" * 10),
            WireFrame(FrameType.AUDIO_IN, "s", 2, b""),
        ]
        stream = io.BytesIO(b"".join(encode_frame(f) for f in frames))
        assert [read_frame(stream) for _ in frames] == frames
        assert read_frame(stream) is None

    def test_hello_payload(self):
        assert parse_hello(hello_payload(24000)) == (1, 24000)
        with pytest.raises(ProtocolError):
            parse_hello(b"\x01")

    def test_token_payload(self):
        assert parse_token(token_payload(6599)) == 6599
        with pytest.raises(ProtocolError):
            parse_token(b"\x00\x00")

    def test_oversized_audio(self):
        with pytest.raises(ProtocolError):
            encode_frame(WireFrame(FrameType.AUDIO_IN, "s", 0, b"\x00" * (MAX_AUDIO_CHUNK + 2)))

    @pytest.mark.parametrize(
        "body",
        [
            b"\x02\x00",
            bytes([42]) + struct.pack("<IH", 0, 0),
            bytes([2]) + struct.pack("<IH", 0, 9) + b"abc",
            bytes([2]) + struct.pack("<IH", 0, 2) + b"\xff\xfe",
            bytes([1]) + struct.pack("<IH", 0, 0) + b"\x00\x00\x00",
        ],
    )
    def test_malformed_bodies(self, body):
        with pytest.raises(ProtocolError):
            decode_body(body)

    def test_truncated_stream(self):
        data = encode_frame(WireFrame(FrameType.TEXT_PARTIAL, "s", 0, token_payload(1)))
        with pytest.raises(ProtocolError):
            read_frame(io.BytesIO(data[:-1]))
        with pytest.raises(ProtocolError):
            read_frame(io.BytesIO(data[:2]))

    def test_frame_too_large(self):
        with pytest.raises(ProtocolError):
            read_frame(io.BytesIO(struct.pack("<I", 0xFFFFFFF0)))


def _script_factory(scripts, made=None):
    """Backend factory handing each session its own scripted turns."""

    def create(session_id):
        backend = ScriptedBackend(scripts.get(session_id, scripts.get("*", [{"text": "ok"}])))
        if made is not None:
            made[session_id] = backend
        return backend

    return create


@pytest.fixture
def start_server(dispatcher):
    servers = []

    def start(scripts, made=None, **cfg_values):
        cfg = ServiceConfig(port=0, **cfg_values)
        server = create_server(cfg, _script_factory(scripts, made), dispatcher)
        server.start()
        servers.append(server)
        return server

    yield start
    for server in servers:
        server.stop()


def _client(server, session_id):
    host, port = server.address
    client = SessionClient(host, port, session_id)
    client.hello()
    return client


class TestSessionService:
    def test_hello_reply(self, start_server):
        server = start_server({})
        with _client(server, "s1") as client:
            assert client.server_sample_rate == 24000
            assert _wait_until(lambda: "s1" in server.service.registry)

    def test_silence_emits_nothing(self, start_server, silent_clip):
        server = start_server({})
        with _client(server, "quiet") as client:
            client.send_audio(silent_clip)
            client.end_utterance()
            assert client.finish() == []

    def test_scripted_event_order(self, start_server, speech_clip):
        server = start_server({"s1": [{"text": "hi", "audio": [5, 6, 7]}]})
        with _client(server, "s1") as client:
            events = client.speak(speech_clip)
        assert [f.type for f in events.frames] == [
            FrameType.TEXT_PARTIAL,
            FrameType.AUDIO_OUT,
            FrameType.AUDIO_OUT,
            FrameType.AUDIO_OUT,
            FrameType.TEXT_PARTIAL,
            FrameType.TURN_END,
        ]
        assert events.text_tokens == [104, 105]
        assert events.audio_tokens == [5, 6, 7]
        assert [f.seq_no for f in events.frames] == list(range(1, 7))
        assert all(f.session_id == "s1" for f in events.frames)
        assert events.summary["text_str"] == "hi"
        assert events.summary["audio_tokens"] == [5, 6, 7]

    def test_tool_events(self, start_server, speech_clip):
        call = {"name": "weather", "arguments": {"location": "Paris"}}
        server = start_server({"s1": [{"tool_calls": [call], "text": "sun"}]})
        with _client(server, "s1") as client:
            events = client.speak(speech_clip)
        types = [f.type for f in events.frames]
        assert types[:2] == [FrameType.TOOL_CALL_EVENT, FrameType.TOOL_RESULT_EVENT]
        assert events.tool_calls[0].name == "weather"
        assert events.summary["tool_results"][0]["text"] == "sunny, 21C"
        assert bytes(events.text_tokens).decode("utf-8") == "sun"

    def test_sessions_isolated(self, start_server, speech_clip):
        ids = [f"user-{i}" for i in range(8)]
        scripts = {sid: [{"text": sid, "audio": list(range(i + 1))}] for i, sid in enumerate(ids)}
        server = start_server(scripts)
        results = {}
        errors = []

        def talk(sid):
            try:
                with _client(server, sid) as client:
                    results[sid] = [client.speak(speech_clip) for _ in range(2)]
            except Exception as e:
                errors.append(e)

        threads = [threading.Thread(target=talk, args=(sid,)) for sid in ids]
        for t in threads:
            t.start()
        for t in threads:
            t.join(timeout=30)

        assert errors == []
        for i, sid in enumerate(ids):
            frames = [f for turn in results[sid] for f in turn.frames]
            assert all(f.session_id == sid for f in frames)
            assert [f.seq_no for f in frames] == list(range(1, len(frames) + 1))
            for turn in results[sid]:
                assert turn.text_tokens == ByteTokenizer().encode(sid)
                assert turn.audio_tokens == list(range(i + 1))
        assert _wait_until(lambda: len(server.service.registry) == 0)
        assert server.service.registry.total_sessions == 8
        assert server.service.registry.total_turns == 16

    def test_backend_error_keeps_session(self, start_server, speech_clip):
        made = {}
        scripts = {"s1": [{"events": [["audio", 5]]}, {"text": "back"}]}
        server = start_server(scripts, made)
        with _client(server, "s1") as client:
            failed = client.speak(speech_clip)
            assert failed.error["error"] == "BackendProtocolError"
            recovered = client.speak(speech_clip)
        assert recovered.summary["text_str"] == "back"
        assert made["s1"].turns_started == 2

    def test_malformed_frame_closes(self, start_server):
        server = start_server({})
        with _client(server, "s1") as client:
            body = bytes([42]) + struct.pack("<IH", 1, 2) + b"s1"
            client._sock.sendall(struct.pack("<I", len(body)) + body)
            frame = client.receive()
            assert frame.type == FrameType.ERROR
            assert client.receive() is None
        assert _wait_until(lambda: "s1" not in server.service.registry)

    def test_audio_before_hello(self, start_server):
        server = start_server({})
        host, port = server.address
        with SessionClient(host, port, "s1") as client:
            client.send(FrameType.AUDIO_IN, b"\x00\x00")
            assert client.receive().type == FrameType.ERROR
            assert client.receive() is None

    def test_duplicate_session_id(self, start_server):
        server = start_server({})
        with _client(server, "same"):
            host, port = server.address
            with SessionClient(host, port, "same") as second:
                with pytest.raises(ProtocolError):
                    second.hello()

    def test_drop_mid_session(self, start_server, speech_clip):
        server = start_server({"*": [{"text": "fine"}]})
        dropped = _client(server, "gone")
        dropped.send_audio(speech_clip)
        dropped.close()
        with _client(server, "kept") as client:
            assert client.speak(speech_clip).summary["text_str"] == "fine"
        assert _wait_until(lambda: "gone" not in server.service.registry)

    def test_transcripts_written(self, start_server, speech_clip, tmp_path):
        server = start_server({"s1": [{"text": "hi"}]}, transcript_dir=str(tmp_path))
        with _client(server, "s1") as client:
            client.speak(speech_clip)
        assert _wait_until(lambda: "s1" not in server.service.registry)
        path = tmp_path / "s1.jsonl"
        assert _wait_until(lambda: len(path.read_text().splitlines()) >= 2)


class TestStatusEndpoint:
    @pytest.fixture
    def app_client(self, dispatcher):
        pytest.importorskip("flask")
        pytest.importorskip("flask_cors")
        from speechlm_runtime.service.status import create_status_app

        service = SessionService(ServiceConfig(), _script_factory({}), dispatcher)
        service.open_session("s1")
        return create_status_app(service).test_client()

    def test_status(self, app_client):
        data = app_client.get("/api/status").get_json()
        assert data["status"] == "running"
        assert data["live_sessions"] == ["s1"]
        assert data["total_sessions"] == 1

    def test_session_lookup(self, app_client):
        assert app_client.get("/api/sessions/s1").get_json()["turns"] == 0
        assert app_client.get("/api/sessions/nobody").status_code == 404


class TestConfig:
    def test_key_values(self):
        text = "# service\nport = 9000\n\nbackend=scripted:/tmp/x.json  # inline\n"
        assert parse_key_values(text) == {"port": "9000", "backend": "scripted:/tmp/x.json"}

    def test_bad_line(self):
        with pytest.raises(ConfigError):
            parse_key_values("port 9000")

    def test_precedence(self, tmp_path):
        path = tmp_path / "service.conf"
        path.write_text("port=9000\nvad_threshold_dbfs=-35\nsearch_k=5\nflavour=mild\n")
        env = {"SPEECHLM_PORT": "9100", "SPEECHLM_SEARCH_K": "4", "OTHER": "x"}
        cfg = load_config(str(path), environ=env, overrides={"search_k": 2, "backend": None})
        assert cfg.port == 9100
        assert cfg.search_k == 2
        assert cfg.vad_threshold_dbfs == -35.0
        assert cfg.backend == "stub:"
        assert cfg.extra == {"flavour": "mild"}

    def test_bad_value(self):
        with pytest.raises(ConfigError):
            load_config(environ={"SPEECHLM_PORT": "many"})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "nope.conf"), environ={})
