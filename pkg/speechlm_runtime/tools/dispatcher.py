"""
Route validated tool calls to their clients and package the outcome as the
information the model sees after the current audio.
"""

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from speechlm_runtime.config import ServiceConfig
from speechlm_runtime.interleave.codec import Token
from speechlm_runtime.interleave.text import ByteTokenizer
from speechlm_runtime.log import get_logger
from speechlm_runtime.tools.calls import ToolCall, validate_call
from speechlm_runtime.tools.clients import (
    AudioSearchClient,
    Clock,
    HttpWeatherClient,
    HttpWebSearchClient,
    WeatherClient,
    WebSearchClient,
    format_timestamp,
    system_clock,
)
from speechlm_runtime.tools.voice_library import load_library

logger = get_logger("tools.dispatcher")

STATUS_OK = "ok"
STATUS_ERROR = "error"

_text_tokenizer = ByteTokenizer()


@dataclass(frozen=True)
class ToolResult:
    """
    Outcome of one tool call.

    `text` is the textual payload; `audio_tokens` is filled only by
    audio_search, with the retrieved entries' speech tokens in rank order.
    """

    call: ToolCall
    status: str
    text: str = ""
    audio_tokens: Tuple[int, ...] = ()
    entry_ids: Tuple[str, ...] = ()
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    def payload_tokens(self) -> Tuple[Token, ...]:
        """Retrieved-information tokens: the text payload, then any audio tokens."""
        text = self.text if self.ok else f"error: {self.reason}"
        tokens = [Token.text(t) for t in _text_tokenizer.encode(text)]
        tokens.extend(Token.audio(t) for t in self.audio_tokens)
        return tuple(tokens)

    def to_dict(self) -> Dict[str, object]:
        return {
            "call": self.call.to_dict(),
            "status": self.status,
            "text": self.text,
            "audio_tokens": list(self.audio_tokens),
            "entry_ids": list(self.entry_ids),
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "ToolResult":
        call = data["call"]
        return cls(
            ToolCall(call["name"], dict(call.get("arguments", {}))),
            data["status"],
            data.get("text", ""),
            tuple(int(t) for t in data.get("audio_tokens", [])),
            tuple(data.get("entry_ids", [])),
            data.get("reason", ""),
        )

    @classmethod
    def error(cls, call: ToolCall, reason: str) -> "ToolResult":
        return cls(call, STATUS_ERROR, reason=reason or "tool failed")


@dataclass
class ToolClients:
    clock: Clock = system_clock
    weather: Optional[WeatherClient] = None
    web_search: Optional[WebSearchClient] = None
    audio_search: Optional[AudioSearchClient] = None


def _run_datetime(call: ToolCall, clients: ToolClients) -> ToolResult:
    return ToolResult(call, STATUS_OK, text=format_timestamp(clients.clock()))


def _run_weather(call: ToolCall, clients: ToolClients) -> ToolResult:
    if clients.weather is None:
        return ToolResult.error(call, "weather client not configured")
    return ToolResult(call, STATUS_OK, text=clients.weather.forecast(call.arguments["location"]))


def _run_web_search(call: ToolCall, clients: ToolClients) -> ToolResult:
    if clients.web_search is None:
        return ToolResult.error(call, "web search client not configured")
    return ToolResult(call, STATUS_OK, text=clients.web_search.search(call.arguments["query"]))


def _run_audio_search(call: ToolCall, clients: ToolClients) -> ToolResult:
    if clients.audio_search is None:
        return ToolResult.error(call, "voice library not configured")
    k = None
    if call.arguments.get("k"):
        try:
            k = int(call.arguments["k"])
        except ValueError:
            return ToolResult.error(call, f"k must be an integer, got {call.arguments['k']!r}")
    entries = clients.audio_search.search(call.arguments["query"], k)
    if not entries:
        return ToolResult.error(call, "no voice library entries matched")
    text = json.dumps(
        [
            {"id": e.id, "transcription": e.transcription, "description": e.description}
            for e in entries
        ],
        ensure_ascii=False,
    )
    audio: List[int] = []
    for entry in entries:
        audio.extend(entry.audio_tokens)
    return ToolResult(
        call,
        STATUS_OK,
        text=text,
        audio_tokens=tuple(audio),
        entry_ids=tuple(e.id for e in entries),
    )


_HANDLERS = {
    "audio_search": _run_audio_search,
    "datetime": _run_datetime,
    "weather": _run_weather,
    "web_search": _run_web_search,
}


def dispatch(call: ToolCall, clients: ToolClients) -> ToolResult:
    """
    Run a tool call against its client.

    Never raises: validation or client failures come back as an error result
    carrying the reason.
    """
    try:
        validate_call(call.name, call.arguments)
        result = _HANDLERS[call.name](call, clients)
    except Exception as e:
        reason = str(e) or type(e).__name__
        logger.warning(f"Tool call failed tool={call.name} reason={reason}")
        return ToolResult.error(call, reason)
    if result.ok:
        logger.debug(f"Tool call ok tool={call.name} chars={len(result.text)}")
    return result


@dataclass
class ToolDispatcher:
    """Dispatcher bound to a client set, shared by the sessions of a service."""

    clients: ToolClients = field(default_factory=ToolClients)

    def dispatch(self, call: ToolCall) -> ToolResult:
        return dispatch(call, self.clients)


def dispatcher_from_config(cfg: ServiceConfig) -> ToolDispatcher:
    """
    Build the dispatcher a service or benchmark run shares between sessions.

    The voice library is loaded from `library_path`; weather and web search
    use their HTTP adapters when `weather_url` / `web_search_url` are set.
    Unconfigured tools answer with an error result.
    """
    clients = ToolClients()
    if cfg.library_path:
        clients.audio_search = AudioSearchClient(load_library(cfg.library_path), cfg.search_k)
    if cfg.weather_url:
        clients.weather = HttpWeatherClient(cfg.weather_url)
    if cfg.web_search_url:
        clients.web_search = HttpWebSearchClient(cfg.web_search_url)
    logger.info(
        f"Tool clients ready audio_search={clients.audio_search is not None} "
        f"weather={clients.weather is not None} web_search={clients.web_search is not None}"
    )
    return ToolDispatcher(clients)
