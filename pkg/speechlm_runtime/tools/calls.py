"""
Tool-call wire grammar and validation.

A call travels in the text channel as a sentinel-delimited JSON object:

    <tool_call>{"name":"weather","arguments":{"location":"Beijing"}}</tool_call>
"""

import json
import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from speechlm_runtime.errors import (
    MissingParameter,
    ParseError,
    UnexpectedParameter,
    UnknownTool,
)

OPEN_TAG = "<tool_call>"
CLOSE_TAG = "</tool_call>"

# name -> (required parameters, optional parameters)
TOOL_SCHEMAS: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    "audio_search": (("query",), ("k",)),
    "datetime": ((), ()),
    "weather": (("location",), ()),
    "web_search": (("query",), ()),
}

TOOL_DESCRIPTIONS = {
    "audio_search": "Retrieve speeches from the voice library to mimic a speaking style or switch timbre.",
    "datetime": "Return the current date and time.",
    "weather": "Return the weather forecast for a location.",
    "web_search": "Search the web and return relevant content.",
}

INVALID_TOOL = "invalid"

_SPAN_RE = re.compile(re.escape(OPEN_TAG) + r"(.*?)" + re.escape(CLOSE_TAG), re.DOTALL)


@dataclass(frozen=True)
class ToolCall:
    """A validated tool invocation."""

    name: str
    arguments: Dict[str, str] = field(default_factory=dict)

    @classmethod
    def create(cls, name: str, arguments: Optional[Mapping[str, object]] = None) -> "ToolCall":
        """Normalize and validate; raises ToolCallError subclasses."""
        name = str(name).strip()
        args = normalize_arguments(arguments or {})
        validate_call(name, args)
        return cls(name, args)

    @classmethod
    def unchecked(cls, name: str, arguments: Optional[Mapping[str, object]] = None) -> "ToolCall":
        """Build without validation, for recording what a model actually emitted."""
        try:
            args = normalize_arguments(arguments or {})
        except ParseError:
            args = {}
        return cls(str(name).strip() or INVALID_TOOL, args)

    def to_wire(self) -> str:
        return serialize_tool_call(self)

    def to_dict(self) -> Dict[str, object]:
        return {"name": self.name, "arguments": dict(self.arguments)}


def normalize_arguments(arguments: Mapping[str, object]) -> Dict[str, str]:
    """Trim keys and values, lowercase keys; scalar values become strings."""
    if not isinstance(arguments, Mapping):
        raise ParseError(0, "arguments must be an object")
    normalized = {}
    for key, value in arguments.items():
        if isinstance(value, (dict, list)):
            raise ParseError(0, f"argument {key!r} must be a scalar")
        text = "" if value is None else str(value)
        normalized[str(key).strip().lower()] = text.strip()
    return dict(sorted(normalized.items()))


def validate_call(name: str, arguments: Mapping[str, str]):
    if name not in TOOL_SCHEMAS:
        raise UnknownTool(name)
    required, optional = TOOL_SCHEMAS[name]
    for parameter in required:
        if not arguments.get(parameter):
            raise MissingParameter(name, parameter)
    for parameter in arguments:
        if parameter not in required and parameter not in optional:
            raise UnexpectedParameter(name, parameter)


def serialize_tool_call(call: ToolCall) -> str:
    body = json.dumps(
        {"name": call.name, "arguments": dict(sorted(call.arguments.items()))},
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return f"{OPEN_TAG}{body}{CLOSE_TAG}"


def _parse_body(text_span: str) -> Tuple[str, Mapping[str, object]]:
    stripped = text_span.strip()
    lead = len(text_span) - len(text_span.lstrip())
    if not stripped.startswith(OPEN_TAG):
        raise ParseError(lead, f"expected {OPEN_TAG}")
    if not stripped.endswith(CLOSE_TAG):
        raise ParseError(lead + len(stripped), f"expected {CLOSE_TAG}")
    body_offset = lead + len(OPEN_TAG)
    body = stripped[len(OPEN_TAG) : len(stripped) - len(CLOSE_TAG)]
    try:
        payload = json.loads(body)
    except json.JSONDecodeError as e:
        raise ParseError(body_offset + e.pos, e.msg)
    if not isinstance(payload, dict) or "name" not in payload:
        raise ParseError(body_offset, "body must be an object with a name")
    arguments = payload.get("arguments", {})
    if arguments is None:
        arguments = {}
    if not isinstance(arguments, dict):
        raise ParseError(body_offset, "arguments must be an object")
    return str(payload["name"]), arguments


def parse_tool_call(text_span: str) -> ToolCall:
    """
    Parse and validate one sentinel-delimited tool call.

    Args:
        text_span: Text beginning with <tool_call> and ending with </tool_call>

    Returns:
        Validated ToolCall with normalized arguments

    Raises:
        ParseError: malformed span or body (with character offset)
        UnknownTool: name outside the tool set
        MissingParameter / UnexpectedParameter: argument validation
    """
    name, arguments = _parse_body(text_span)
    return ToolCall.create(name, arguments)


def parse_tool_call_lenient(text_span: str) -> ToolCall:
    """Best-effort parse that never raises; used to record invalid model output."""
    try:
        name, arguments = _parse_body(text_span)
    except ParseError:
        return ToolCall(INVALID_TOOL, {})
    return ToolCall.unchecked(name, arguments)


def extract_tool_calls(text: str) -> List[str]:
    """Return every <tool_call>...</tool_call> span found in free text."""
    return [m.group(0) for m in _SPAN_RE.finditer(text)]


def tool_schema_prompt() -> str:
    """JSON listing of the tools, suitable for a system prompt."""
    tools = []
    for name, (required, optional) in TOOL_SCHEMAS.items():
        tools.append(
            {
                "name": name,
                "description": TOOL_DESCRIPTIONS[name],
                "required": list(required),
                "optional": list(optional),
            }
        )
    return json.dumps(tools, ensure_ascii=False)
