"""
Service configuration: defaults, key=value files and environment overrides.
"""

import dataclasses
import os
from dataclasses import dataclass, field, fields
from typing import Dict, Mapping, Optional

from speechlm_runtime.errors import ConfigError
from speechlm_runtime.log import get_logger

logger = get_logger("config")

ENV_PREFIX = "SPEECHLM_"


@dataclass
class ServiceConfig:
    """
    Settings for the session service and the CLI commands that build sessions.
    """

    host: str = "127.0.0.1"
    port: int = 7860
    backend: str = "stub:"
    library_path: str = ""
    sample_rate: int = 24000
    # VAD
    vad_window_ms: float = 20.0
    vad_threshold_dbfs: float = -40.0
    vad_hangover_ms: float = 200.0
    vad_min_segment_ms: float = 100.0
    end_of_utterance_ms: float = 600.0
    # Interleaving
    n_text: int = 1
    n_audio: int = 3
    text_pad: int = 256
    audio_pad: int = 6599
    audio_vocab_size: int = 6600
    # Session
    system_prompt: str = "You are a helpful voice assistant."
    context_budget: int = 8192
    max_tool_rounds: int = 8
    search_k: int = 3
    weather_url: str = ""
    web_search_url: str = ""
    transcript_dir: str = ""
    status_port: int = 0
    workers: int = 4
    extra: Dict[str, str] = field(default_factory=dict)

    def update(self, values: Mapping[str, object], source: str = "override"):
        """
        Apply string or typed values onto the config, coercing to field types.

        Args:
            values: Mapping of field name to value
            source: Label used in error messages
        """
        types = {f.name: f.type for f in fields(self) if f.name != "extra"}
        for key, raw in values.items():
            if raw is None:
                continue
            name = key.strip().lower().replace("-", "_")
            if name not in types:
                self.extra[name] = str(raw)
                logger.debug(f"Unknown config key kept in extra: {name}")
                continue
            setattr(self, name, _coerce(name, types[name], raw, source))
        return self

    def to_dict(self) -> Dict[str, object]:
        return dataclasses.asdict(self)


def _coerce(name, type_name, raw, source):
    # dataclass annotations are strings under postponed evaluation
    type_name = getattr(type_name, "__name__", type_name)
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if type_name == "int":
            return int(text)
        if type_name == "float":
            return float(text)
    except ValueError:
        raise ConfigError(f"{source}: {name} expects {type_name}, got {raw!r}")
    return text


def parse_key_values(text: str, source: str = "<string>") -> Dict[str, str]:
    """Parse `key=value` lines, ignoring blank lines and `#` comments."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def load_config(
    path: Optional[str] = None,
    environ: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, object]] = None,
) -> ServiceConfig:
    """
    Build a ServiceConfig from defaults, a config file, the environment and
    explicit overrides, in that order of precedence (last wins).

    Args:
        path: Optional key=value config file
        environ: Environment mapping (defaults to os.environ)
        overrides: Values from the command line; None entries are skipped

    Returns:
        The merged configuration
    """
    config = ServiceConfig()
    if path:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path, encoding="utf-8") as f:
            config.update(parse_key_values(f.read(), source=path), source=path)
        logger.info(f"Loaded config file: {path}")

    environ = os.environ if environ is None else environ
    env_values = {
        key[len(ENV_PREFIX) :]: value
        for key, value in environ.items()
        if key.startswith(ENV_PREFIX)
    }
    if env_values:
        config.update(env_values, source="environment")

    if overrides:
        config.update(overrides, source="command line")
    return config
