"""
Streaming session service over the framed socket protocol.

One thread per connection, one session per connection. The registry is the
only state shared between connections.
"""

import socketserver
import threading
import time
from dataclasses import dataclass, field
from typing import BinaryIO, Dict, List, Optional, Tuple

from speechlm_runtime.audio.pcm import PcmClip, resample
from speechlm_runtime.audio.vad import UtteranceDetector
from speechlm_runtime.config import ServiceConfig
from speechlm_runtime.errors import ProtocolError, SilenceRejected, SpeechLMError
from speechlm_runtime.log import get_logger
from speechlm_runtime.service.protocol import (
    PROTOCOL_VERSION,
    FrameType,
    WireFrame,
    encode_frame,
    error_payload,
    hello_payload,
    json_payload,
    parse_hello,
    read_frame,
    token_payload,
)
from speechlm_runtime.session.backends import AudioToken, BackendFactory, TextToken, create_backend_factory
from speechlm_runtime.session.conversation import Session
from speechlm_runtime.session.runtime import TurnOptions
from speechlm_runtime.tools.calls import ToolCall
from speechlm_runtime.tools.dispatcher import ToolDispatcher, ToolResult, dispatcher_from_config

logger = get_logger("service.server")


@dataclass
class SessionStats:
    started: float = field(default_factory=time.time)
    turns: int = 0
    errors: int = 0
    first_output_ms: List[float] = field(default_factory=list)
    turn_ms: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        def mean(values):
            return round(sum(values) / len(values), 3) if values else None

        return {
            "started": self.started,
            "turns": self.turns,
            "errors": self.errors,
            "mean_first_output_ms": mean(self.first_output_ms),
            "mean_turn_ms": mean(self.turn_ms),
        }


class SessionRegistry:
    """Live sessions keyed by id, with per-session latency counters."""

    def __init__(self):
        self._lock = threading.Lock()
        self._sessions: Dict[str, Session] = {}
        self._stats: Dict[str, SessionStats] = {}
        self.total_sessions = 0
        self.total_turns = 0

    def __len__(self):
        with self._lock:
            return len(self._sessions)

    def __contains__(self, session_id: str):
        with self._lock:
            return session_id in self._sessions

    def open(self, session_id: str, session: Session):
        with self._lock:
            if session_id in self._sessions:
                raise ProtocolError(f"session {session_id!r} is already live")
            self._sessions[session_id] = session
            self._stats[session_id] = SessionStats()
            self.total_sessions += 1

    def close(self, session_id: str) -> Optional[Session]:
        with self._lock:
            session = self._sessions.pop(session_id, None)
            self._stats.pop(session_id, None)
        if session is not None:
            session.close()
        return session

    def record_turn(self, session_id: str, first_output_s: Optional[float], duration_s: float, ok: bool):
        with self._lock:
            stats = self._stats.get(session_id)
            if stats is None:
                return
            if ok:
                stats.turns += 1
                self.total_turns += 1
            else:
                stats.errors += 1
            if first_output_s is not None:
                stats.first_output_ms.append(first_output_s * 1000.0)
            stats.turn_ms.append(duration_s * 1000.0)

    def snapshot(self) -> Dict[str, object]:
        with self._lock:
            return {
                "live_sessions": sorted(self._sessions),
                "sessions": {sid: stats.to_dict() for sid, stats in self._stats.items()},
                "total_sessions": self.total_sessions,
                "total_turns": self.total_turns,
            }


class SessionService:
    """
    Everything connections share: configuration, backend factory, tool
    dispatcher and the session registry.
    """

    def __init__(
        self,
        cfg: ServiceConfig,
        backend_factory: Optional[BackendFactory] = None,
        tools: Optional[ToolDispatcher] = None,
    ):
        self.cfg = cfg
        self.options = TurnOptions.from_config(cfg)
        self.backend_factory = backend_factory or create_backend_factory(cfg.backend, self.options.interleave)
        self.tools = tools or dispatcher_from_config(cfg)
        self.registry = SessionRegistry()

    def open_session(self, session_id: str) -> Session:
        if session_id in self.registry:
            raise ProtocolError(f"session {session_id!r} is already live")
        backend = self.backend_factory(session_id)
        session = Session.from_config(session_id, self.cfg, backend, self.tools)
        try:
            self.registry.open(session_id, session)
        except ProtocolError:
            session.close()
            raise
        logger.info(f"Session opened session={session_id} live={len(self.registry)}")
        return session

    def close_session(self, session_id: str):
        if self.registry.close(session_id) is not None:
            logger.info(f"Session closed session={session_id} live={len(self.registry)}")

    def status(self) -> Dict[str, object]:
        return dict(self.registry.snapshot(), status="running", backend=self.cfg.backend)


class Connection:
    """
    Frame loop for one client stream.

    A malformed or out-of-order frame gets an Error frame and ends the
    connection; a failed turn gets an Error frame and the session carries on.
    """

    def __init__(self, service: SessionService, rfile: BinaryIO, wfile: BinaryIO):
        self.service = service
        self.rfile = rfile
        self.wfile = wfile
        self.session: Optional[Session] = None
        self.session_id = ""
        self.sample_rate = service.cfg.sample_rate
        self.detector: Optional[UtteranceDetector] = None
        self._last_in_seq = -1
        self._out_seq = 0
        self._first_output: Optional[float] = None

    def send(self, frame_type: FrameType, payload: bytes = b""):
        frame = WireFrame(frame_type, self.session_id, self._out_seq, payload)
        self._out_seq += 1
        self.wfile.write(encode_frame(frame))
        self.wfile.flush()

    def run(self):
        try:
            while True:
                try:
                    frame = read_frame(self.rfile)
                    if frame is None:
                        break
                    self.handle(frame)
                except SpeechLMError as e:
                    logger.warning(f"Closing connection session={self.session_id or '-'} error={e}")
                    self.send(FrameType.ERROR, error_payload(e))
                    break
        except (ConnectionError, OSError) as e:
            logger.info(f"Connection dropped session={self.session_id or '-'} error={e}")
        finally:
            if self.session is not None:
                self.service.close_session(self.session_id)
                self.session = None

    def handle(self, frame: WireFrame):
        if frame.seq_no <= self._last_in_seq:
            raise ProtocolError(f"sequence number {frame.seq_no} after {self._last_in_seq}")
        self._last_in_seq = frame.seq_no
        if self.session is None:
            if frame.type != FrameType.HELLO:
                raise ProtocolError(f"expected hello, got {frame.type.name}")
            self._hello(frame)
            return
        if frame.session_id != self.session_id:
            raise ProtocolError(f"frame for session {frame.session_id!r} on {self.session_id!r}")
        if frame.type != FrameType.AUDIO_IN:
            raise ProtocolError(f"unexpected {frame.type.name} frame from client")
        if frame.payload:
            utterance = self.detector.feed(PcmClip.from_pcm16(frame.payload, self.sample_rate))
        else:
            utterance = self.detector.flush()
        if utterance is not None:
            self._run_turn(utterance)

    def _hello(self, frame: WireFrame):
        version, sample_rate = parse_hello(frame.payload)
        if version != PROTOCOL_VERSION:
            raise ProtocolError(f"unsupported protocol version {version}")
        if sample_rate <= 0:
            raise ProtocolError(f"invalid sample rate {sample_rate}")
        if not frame.session_id:
            raise ProtocolError("hello needs a session id")
        self.session_id = frame.session_id
        self.sample_rate = sample_rate
        cfg = self.service.cfg
        self.detector = UtteranceDetector(sample_rate, self.service.options.vad, cfg.end_of_utterance_ms)
        self.session = self.service.open_session(frame.session_id)
        self.send(FrameType.HELLO, hello_payload(cfg.sample_rate))

    def _listener(self, item: object):
        if self._first_output is None:
            self._first_output = time.monotonic()
        if isinstance(item, TextToken):
            self.send(FrameType.TEXT_PARTIAL, token_payload(item.id))
        elif isinstance(item, AudioToken):
            self.send(FrameType.AUDIO_OUT, token_payload(item.id))
        elif isinstance(item, ToolCall):
            self.send(FrameType.TOOL_CALL_EVENT, item.to_wire().encode("utf-8"))
        elif isinstance(item, ToolResult):
            self.send(FrameType.TOOL_RESULT_EVENT, json_payload(item.to_dict()))

    def _run_turn(self, utterance: PcmClip):
        if utterance.sample_rate != self.service.cfg.sample_rate:
            utterance = resample(utterance, self.service.cfg.sample_rate)
        start = time.monotonic()
        self._first_output = None
        ok = False
        try:
            result = self.session.run_turn(utterance, self._listener)
            self.send(FrameType.TURN_END, json_payload(result.to_dict()))
            ok = True
        except SilenceRejected as e:
            logger.debug(f"Utterance rejected session={self.session_id} reason={e}")
            self.send(FrameType.ERROR, error_payload(e))
        except SpeechLMError as e:
            self.send(FrameType.ERROR, error_payload(e))
        except (ConnectionError, OSError):
            raise
        except Exception as e:
            logger.error(f"Turn crashed session={self.session_id} error={e!r}")
            self.send(FrameType.ERROR, error_payload(e))
        finally:
            first = None if self._first_output is None else self._first_output - start
            self.service.registry.record_turn(self.session_id, first, time.monotonic() - start, ok)


class _ConnectionHandler(socketserver.StreamRequestHandler):
    def handle(self):
        logger.info(f"Client connected: {self.client_address}")
        Connection(self.server.service, self.rfile, self.wfile).run()
        logger.info(f"Client disconnected: {self.client_address}")


class SessionServer(socketserver.ThreadingTCPServer):
    """Threaded TCP server; call start() for a background thread or serve_forever()."""

    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, service: SessionService, address: Tuple[str, int]):
        super().__init__(address, _ConnectionHandler)
        self.service = service
        self._thread: Optional[threading.Thread] = None

    @property
    def address(self) -> Tuple[str, int]:
        return self.server_address[:2]

    def start(self) -> threading.Thread:
        self._thread = threading.Thread(target=self.serve_forever, name="speechlm-server", daemon=True)
        self._thread.start()
        logger.info(f"Session server listening address={self.address}")
        return self._thread

    def stop(self):
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
        logger.info("Session server stopped")


def create_server(
    cfg: ServiceConfig,
    backend_factory: Optional[BackendFactory] = None,
    tools: Optional[ToolDispatcher] = None,
) -> SessionServer:
    return SessionServer(SessionService(cfg, backend_factory, tools), (cfg.host, cfg.port))


def serve(cfg: ServiceConfig):
    """Run the service until interrupted; starts the status endpoint when a status port is set."""
    server = create_server(cfg)
    if cfg.status_port:
        from speechlm_runtime.service.status import start_status_server

        start_status_server(server.service, cfg.host, cfg.status_port)
    logger.info(f"Serving host={cfg.host} port={server.address[1]} backend={cfg.backend}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        logger.info("Interrupted, shutting down")
    finally:
        server.server_close()
