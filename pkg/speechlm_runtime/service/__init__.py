from speechlm_runtime.service.client import SessionClient, TurnEvents
from speechlm_runtime.service.protocol import FrameType, WireFrame, decode_body, encode_frame, read_frame
from speechlm_runtime.service.server import (
    Connection,
    SessionRegistry,
    SessionServer,
    SessionService,
    create_server,
    serve,
)

__all__ = [
    "Connection",
    "FrameType",
    "SessionClient",
    "SessionRegistry",
    "SessionServer",
    "SessionService",
    "TurnEvents",
    "WireFrame",
    "create_server",
    "decode_body",
    "encode_frame",
    "read_frame",
    "serve",
]
