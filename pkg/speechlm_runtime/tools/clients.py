"""
Clients behind the four tools.

Weather and web search are interfaces with recorded-fixture implementations
for tests and optional HTTP adapters for live use. Date and time comes from an
injected clock.
"""

from datetime import datetime, timezone
from typing import Callable, List, Mapping, Optional

import requests

from speechlm_runtime.log import get_logger
from speechlm_runtime.tools.voice_library import VoiceLibraryEntry, VoiceLibraryIndex, audio_search

logger = get_logger("tools.clients")

Clock = Callable[[], datetime]


def system_clock() -> datetime:
    return datetime.now(timezone.utc)


def frozen_clock(moment: datetime) -> Clock:
    """Clock that always returns the same moment (naive values are taken as UTC)."""
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return lambda: moment


def format_timestamp(moment: datetime) -> str:
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class WeatherClient:
    def forecast(self, location: str) -> str:
        raise NotImplementedError


class WebSearchClient:
    def search(self, query: str) -> str:
        raise NotImplementedError


class FixtureWeatherClient(WeatherClient):
    """Recorded forecasts keyed by case-insensitive location."""

    def __init__(self, forecasts: Mapping[str, str], default: Optional[str] = None):
        self._forecasts = {k.casefold(): v for k, v in forecasts.items()}
        self._default = default

    def forecast(self, location: str) -> str:
        payload = self._forecasts.get(location.casefold(), self._default)
        if payload is None:
            raise LookupError(f"no recorded forecast for {location!r}")
        return payload


class FixtureWebSearchClient(WebSearchClient):
    """Recorded search results keyed by case-insensitive query."""

    def __init__(self, results: Mapping[str, str], default: Optional[str] = None):
        self._results = {k.casefold(): v for k, v in results.items()}
        self._default = default

    def search(self, query: str) -> str:
        payload = self._results.get(query.casefold(), self._default)
        if payload is None:
            raise LookupError(f"no recorded results for {query!r}")
        return payload


class FailingClient(WeatherClient, WebSearchClient):
    """Client that always fails; exercises the error path."""

    def __init__(self, reason: str = "service unavailable"):
        self.reason = reason

    def forecast(self, location: str) -> str:
        raise ConnectionError(self.reason)

    def search(self, query: str) -> str:
        raise ConnectionError(self.reason)


class HttpWeatherClient(WeatherClient):
    """
    Live adapter: GET `url` with `location` as a query parameter and return
    the response body.
    """

    def __init__(self, url: str, timeout: float = 5.0, session: Optional[requests.Session] = None):
        self.url = url
        self.timeout = timeout
        self.session = session or requests.Session()

    def forecast(self, location: str) -> str:
        response = self.session.get(self.url, params={"location": location}, timeout=self.timeout)
        response.raise_for_status()
        return response.text


class HttpWebSearchClient(WebSearchClient):
    """Live adapter: GET `url` with `q` as a query parameter."""

    def __init__(self, url: str, timeout: float = 5.0, session: Optional[requests.Session] = None):
        self.url = url
        self.timeout = timeout
        self.session = session or requests.Session()

    def search(self, query: str) -> str:
        response = self.session.get(self.url, params={"q": query}, timeout=self.timeout)
        response.raise_for_status()
        return response.text


class AudioSearchClient:
    def __init__(self, library: VoiceLibraryIndex, default_k: int = 3):
        self.library = library
        self.default_k = default_k

    def search(self, query: str, k: Optional[int] = None) -> List[VoiceLibraryEntry]:
        return audio_search(query, k or self.default_k, self.library)
