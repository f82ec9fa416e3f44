"""
Exception hierarchy for the speechlm runtime.

Everything raised on purpose derives from SpeechLMError. InputError marks
problems with what the caller handed in (the CLI maps these to exit code 1);
anything else is treated as an internal fault.
"""

from typing import Optional


class SpeechLMError(RuntimeError):
    """Base class for all runtime errors."""


class InputError(SpeechLMError):
    """Invalid input supplied by a caller, a file or a client."""


class ConfigError(InputError):
    """Configuration value missing or of the wrong type."""


class InvalidToken(InputError):
    """A token id lies outside its vocabulary or collides with the channel pad."""

    def __init__(self, index: int, token_id: int, reason: str, channel: str = "audio"):
        self.index = index
        self.token_id = token_id
        self.channel = channel
        super().__init__(f"{channel} token {token_id} at index {index} {reason}")


class MalformedSequence(InputError):
    """An interleaved sequence violates the block/tag/padding layout."""

    def __init__(self, position: int, reason: str):
        self.position = position
        super().__init__(f"malformed interleaved sequence at position {position}: {reason}")


class EmptyAudio(InputError):
    """An operation that needs samples received an empty clip."""


class RateMismatch(InputError):
    """Clips that must share a sample rate do not."""


class ContextOverflow(InputError):
    """The context budget cannot hold the mandatory segments."""


class SilenceRejected(InputError):
    """The VAD gate found no speech in the input clip."""


class ToolCallError(InputError):
    """Base class for tool-call grammar and validation failures."""


class UnknownTool(ToolCallError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown tool: {name!r}")


class MissingParameter(ToolCallError):
    def __init__(self, tool: str, parameter: str):
        self.tool = tool
        self.parameter = parameter
        super().__init__(f"tool {tool!r} requires parameter {parameter!r}")


class UnexpectedParameter(ToolCallError):
    def __init__(self, tool: str, parameter: str):
        self.tool = tool
        self.parameter = parameter
        super().__init__(f"tool {tool!r} does not accept parameter {parameter!r}")


class ParseError(ToolCallError):
    def __init__(self, offset: int, reason: str):
        self.offset = offset
        super().__init__(f"cannot parse tool call at offset {offset}: {reason}")


class EmptyLibrary(InputError):
    """Audio search over a library without entries."""


class NoFeatures(InputError):
    """Text produced no embedding features (empty after normalization)."""


class EmptyReference(InputError):
    """Reference transcript is empty after normalization."""


class GroupTooSmall(InputError):
    """Group-relative normalization needs at least two rewards."""

    def __init__(self, size: int):
        self.size = size
        super().__init__(f"reward group of size {size} is too small, need at least 2")


class DatasetError(InputError):
    """Benchmark manifest or record is inconsistent."""


class ProtocolError(InputError):
    """A wire frame is malformed or out of sequence."""


class BackendProtocolError(SpeechLMError):
    """A generator backend emitted a stream that breaks the runtime contract."""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        super().__init__(message)
