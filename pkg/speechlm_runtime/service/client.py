"""
Blocking client for the session service, used by tests and scripts.
"""

import socket
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from speechlm_runtime.audio.pcm import PcmClip
from speechlm_runtime.errors import ProtocolError
from speechlm_runtime.service.protocol import (
    MAX_AUDIO_CHUNK,
    FrameType,
    WireFrame,
    encode_frame,
    hello_payload,
    parse_hello,
    parse_json,
    parse_token,
    read_frame,
)
from speechlm_runtime.tools.calls import ToolCall, parse_tool_call_lenient


@dataclass
class TurnEvents:
    """Server frames of one turn, decoded."""

    frames: List[WireFrame] = field(default_factory=list)

    @property
    def text_tokens(self) -> List[int]:
        return [parse_token(f.payload) for f in self.frames if f.type == FrameType.TEXT_PARTIAL]

    @property
    def audio_tokens(self) -> List[int]:
        return [parse_token(f.payload) for f in self.frames if f.type == FrameType.AUDIO_OUT]

    @property
    def tool_calls(self) -> List[ToolCall]:
        return [
            parse_tool_call_lenient(f.payload.decode("utf-8"))
            for f in self.frames
            if f.type == FrameType.TOOL_CALL_EVENT
        ]

    @property
    def summary(self) -> Optional[Dict[str, object]]:
        last = self.frames[-1] if self.frames else None
        if last is not None and last.type == FrameType.TURN_END:
            return parse_json(last.payload)
        return None

    @property
    def error(self) -> Optional[Dict[str, object]]:
        last = self.frames[-1] if self.frames else None
        if last is not None and last.type == FrameType.ERROR:
            return parse_json(last.payload)
        return None


class SessionClient:
    def __init__(self, host: str, port: int, session_id: str, sample_rate: int = 24000, timeout: float = 10.0):
        self.session_id = session_id
        self.sample_rate = sample_rate
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._rfile = self._sock.makefile("rb")
        self._seq = 0
        self.server_sample_rate: Optional[int] = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def send(self, frame_type: FrameType, payload: bytes = b""):
        self._sock.sendall(encode_frame(WireFrame(frame_type, self.session_id, self._seq, payload)))
        self._seq += 1

    def receive(self) -> Optional[WireFrame]:
        return read_frame(self._rfile)

    def hello(self) -> WireFrame:
        self.send(FrameType.HELLO, hello_payload(self.sample_rate))
        reply = self.receive()
        if reply is None or reply.type != FrameType.HELLO:
            raise ProtocolError(f"expected hello reply, got {reply}")
        _, self.server_sample_rate = parse_hello(reply.payload)
        return reply

    def send_audio(self, clip: PcmClip, chunk_bytes: int = MAX_AUDIO_CHUNK):
        data = clip.to_pcm16()
        chunk_bytes -= chunk_bytes % 2
        for start in range(0, len(data), chunk_bytes):
            self.send(FrameType.AUDIO_IN, data[start : start + chunk_bytes])

    def end_utterance(self):
        self.send(FrameType.AUDIO_IN, b"")

    def read_turn(self) -> TurnEvents:
        """Collect frames up to and including the next TurnEnd or Error."""
        events = TurnEvents()
        while True:
            frame = self.receive()
            if frame is None:
                return events
            events.frames.append(frame)
            if frame.type in (FrameType.TURN_END, FrameType.ERROR):
                return events

    def speak(self, clip: PcmClip) -> TurnEvents:
        """Send one utterance, mark its end and wait for the turn."""
        self.send_audio(clip)
        self.end_utterance()
        return self.read_turn()

    def finish(self) -> List[WireFrame]:
        """Half-close and drain everything the server still sends."""
        self._sock.shutdown(socket.SHUT_WR)
        frames = []
        while True:
            frame = self.receive()
            if frame is None:
                return frames
            frames.append(frame)

    def close(self):
        try:
            self._rfile.close()
        finally:
            self._sock.close()
