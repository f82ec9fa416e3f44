from speechlm_runtime.tools.calls import (
    TOOL_SCHEMAS,
    ToolCall,
    extract_tool_calls,
    parse_tool_call,
    parse_tool_call_lenient,
    serialize_tool_call,
    tool_schema_prompt,
)
from speechlm_runtime.tools.clients import (
    AudioSearchClient,
    FailingClient,
    FixtureWeatherClient,
    FixtureWebSearchClient,
    HttpWeatherClient,
    HttpWebSearchClient,
    frozen_clock,
)
from speechlm_runtime.tools.dispatcher import (
    ToolClients,
    ToolDispatcher,
    ToolResult,
    dispatch,
    dispatcher_from_config,
)
from speechlm_runtime.tools.embedding import EMBEDDING_DIM, cosine, embed_text
from speechlm_runtime.tools.voice_library import (
    VoiceLibraryEntry,
    VoiceLibraryIndex,
    audio_search,
    build_library,
    entry_text,
    load_library,
)

__all__ = [
    "EMBEDDING_DIM",
    "TOOL_SCHEMAS",
    "AudioSearchClient",
    "FailingClient",
    "FixtureWeatherClient",
    "FixtureWebSearchClient",
    "HttpWeatherClient",
    "HttpWebSearchClient",
    "ToolCall",
    "ToolClients",
    "ToolDispatcher",
    "ToolResult",
    "VoiceLibraryEntry",
    "VoiceLibraryIndex",
    "audio_search",
    "build_library",
    "cosine",
    "dispatch",
    "dispatcher_from_config",
    "embed_text",
    "entry_text",
    "extract_tool_calls",
    "frozen_clock",
    "load_library",
    "parse_tool_call",
    "parse_tool_call_lenient",
    "serialize_tool_call",
    "tool_schema_prompt",
]
