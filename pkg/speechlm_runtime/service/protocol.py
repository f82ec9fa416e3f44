"""
Length-prefixed binary framing for the session service.

Every frame on the wire is

    u32 LE  length of everything after this field
    u8      frame type
    u32 LE  sequence number
    u16 LE  session id length
    bytes   session id (UTF-8)
    bytes   payload

Payloads by type:

    HELLO              u8 protocol version (1), u32 LE sample rate
    AUDIO_IN           PCM16 LE mono, at most 64 KiB; empty ends the utterance
    TEXT_PARTIAL       u32 LE text token id
    AUDIO_OUT          u32 LE audio token id
    TOOL_CALL_EVENT    tool call in wire form (UTF-8)
    TOOL_RESULT_EVENT  JSON tool result
    TURN_END           JSON turn summary
    ERROR              JSON {"error": class name, "message": text}
"""

import json
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import BinaryIO, Dict, Optional, Tuple

from speechlm_runtime.errors import ProtocolError

PROTOCOL_VERSION = 1
MAX_AUDIO_CHUNK = 64 * 1024
MAX_FRAME_SIZE = 4 * 1024 * 1024

_LENGTH = struct.Struct("<I")
_HEADER = struct.Struct("<BIH")
_HELLO = struct.Struct("<BI")
_TOKEN = struct.Struct("<I")


class FrameType(IntEnum):
    HELLO = 0
    AUDIO_IN = 1
    TEXT_PARTIAL = 2
    AUDIO_OUT = 3
    TOOL_CALL_EVENT = 4
    TOOL_RESULT_EVENT = 5
    TURN_END = 6
    ERROR = 7


@dataclass(frozen=True)
class WireFrame:
    type: FrameType
    session_id: str
    seq_no: int
    payload: bytes = b""


def encode_frame(frame: WireFrame) -> bytes:
    sid = frame.session_id.encode("utf-8")
    if len(sid) > 0xFFFF:
        raise ProtocolError(f"session id too long: {len(sid)} bytes")
    if frame.type == FrameType.AUDIO_IN and len(frame.payload) > MAX_AUDIO_CHUNK:
        raise ProtocolError(f"audio chunk of {len(frame.payload)} bytes exceeds {MAX_AUDIO_CHUNK}")
    body = _HEADER.pack(int(frame.type), frame.seq_no, len(sid)) + sid + frame.payload
    return _LENGTH.pack(len(body)) + body


def decode_body(body: bytes) -> WireFrame:
    """Decode everything after the length prefix."""
    if len(body) < _HEADER.size:
        raise ProtocolError(f"frame of {len(body)} bytes is shorter than its header")
    type_byte, seq_no, sid_len = _HEADER.unpack_from(body)
    try:
        frame_type = FrameType(type_byte)
    except ValueError:
        raise ProtocolError(f"unknown frame type {type_byte}")
    end = _HEADER.size + sid_len
    if end > len(body):
        raise ProtocolError("session id runs past the end of the frame")
    try:
        session_id = body[_HEADER.size : end].decode("utf-8")
    except UnicodeDecodeError:
        raise ProtocolError("session id is not valid UTF-8")
    payload = bytes(body[end:])
    if frame_type == FrameType.AUDIO_IN:
        if len(payload) > MAX_AUDIO_CHUNK:
            raise ProtocolError(f"audio chunk of {len(payload)} bytes exceeds {MAX_AUDIO_CHUNK}")
        if len(payload) % 2:
            raise ProtocolError("audio chunk has an odd number of bytes")
    return WireFrame(frame_type, session_id, seq_no, payload)


def _read_exact(stream: BinaryIO, size: int) -> bytes:
    data = bytearray()
    while len(data) < size:
        chunk = stream.read(size - len(data))
        if not chunk:
            break
        data.extend(chunk)
    return bytes(data)


def read_frame(stream: BinaryIO) -> Optional[WireFrame]:
    """
    Read one frame from a binary stream.

    Returns:
        The frame, or None on a clean end of stream

    Raises:
        ProtocolError: truncated, oversized or undecodable frame
    """
    prefix = _read_exact(stream, _LENGTH.size)
    if not prefix:
        return None
    if len(prefix) < _LENGTH.size:
        raise ProtocolError("stream ended inside a length prefix")
    (length,) = _LENGTH.unpack(prefix)
    if length > MAX_FRAME_SIZE:
        raise ProtocolError(f"frame of {length} bytes is too large")
    body = _read_exact(stream, length)
    if len(body) < length:
        raise ProtocolError(f"stream ended after {len(body)} of {length} frame bytes")
    return decode_body(body)


def hello_payload(sample_rate: int, version: int = PROTOCOL_VERSION) -> bytes:
    return _HELLO.pack(version, sample_rate)


def parse_hello(payload: bytes) -> Tuple[int, int]:
    """Returns (version, sample_rate)."""
    if len(payload) != _HELLO.size:
        raise ProtocolError(f"hello payload must be {_HELLO.size} bytes, got {len(payload)}")
    return _HELLO.unpack(payload)


def token_payload(token_id: int) -> bytes:
    return _TOKEN.pack(token_id)


def parse_token(payload: bytes) -> int:
    if len(payload) != _TOKEN.size:
        raise ProtocolError(f"token payload must be {_TOKEN.size} bytes, got {len(payload)}")
    return _TOKEN.unpack(payload)[0]


def json_payload(value: object) -> bytes:
    return json.dumps(value, sort_keys=True, ensure_ascii=False).encode("utf-8")


def parse_json(payload: bytes) -> Dict[str, object]:
    try:
        return json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ProtocolError(f"invalid JSON payload: {e}")


def error_payload(error: Exception) -> bytes:
    return json_payload({"error": type(error).__name__, "message": str(error)})
