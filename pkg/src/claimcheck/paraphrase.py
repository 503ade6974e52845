"""Backtranslation paraphrase providers.

A paraphrase is produced by translating a sentence to a pivot language
and back to English. Three provider flavors exist: an online machine
translation HTTP client with a disk cache, an offline lookup table,
and an explicit "unavailable" provider.
"""

from __future__ import annotations

import enum
import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import requests


class ProviderUnavailableError(RuntimeError):
    """No paraphrase can be produced for this request."""


class TransportError(RuntimeError):
    """The translation service could not be reached (retries exhausted)."""


class CacheCorruptError(RuntimeError):
    """A cache entry exists but cannot be parsed."""


class Pivot(str, enum.Enum):
    FR = "fr"
    DE = "de"
    ZH = "zh"
    ES = "es"
    RU = "ru"


ALL_PIVOTS = tuple(Pivot)


@dataclass(frozen=True)
class ParaphraseRequest:
    text: str
    pivot: Pivot


@dataclass(frozen=True)
class ParaphraseResult:
    text: str
    cached: bool

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("empty paraphrase result")


class UnavailableProvider:
    """Provider stand-in when no paraphrase source is configured."""

    def paraphrase(self, request: ParaphraseRequest) -> ParaphraseResult:
        raise ProviderUnavailableError("no paraphrase provider configured")


class OfflineTableProvider:
    """Lookup table of precomputed backtranslations.

    File format: JSONL {"text", "pivot", "paraphrase"}.
    """

    def __init__(self, table: dict[tuple[str, Pivot], str]):
        self._table = dict(table)

    @classmethod
    def from_file(cls, path: str) -> "OfflineTableProvider":
        table: dict[tuple[str, Pivot], str] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    table[(obj["text"], Pivot(obj["pivot"]))] = obj["paraphrase"]
                except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                    raise ValueError(f"{path}:{lineno}: malformed paraphrase row: {exc}") from exc
        return cls(table)

    def paraphrase(self, request: ParaphraseRequest) -> ParaphraseResult:
        key = (request.text, request.pivot)
        if key not in self._table:
            raise ProviderUnavailableError(
                f"no offline paraphrase for pivot {request.pivot.value}")
        return ParaphraseResult(text=self._table[key], cached=False)


def _default_transport(url: str, payload: dict, headers: dict, timeout: float) -> dict:
    resp = requests.post(url, json=payload, headers=headers, timeout=timeout)
    resp.raise_for_status()
    return resp.json()


class OnlineProvider:
    """HTTP backtranslation client with a per-key disk cache.

    The transport is injectable so tests can record calls; the request
    and response bodies are {"text", "source_lang", "target_lang"} and
    {"text"} respectively.
    """

    def __init__(self, endpoint: str, api_key: str | None, cache_dir: str,
                 transport: Callable[..., dict] | None = None,
                 retries: int = 3, timeout: float = 30.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self._transport = transport or _default_transport
        self.retries = retries
        self.timeout = timeout
        self._key_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _cache_key(self, request: ParaphraseRequest) -> str:
        digest = hashlib.sha256(
            f"{request.pivot.value}\n{request.text}".encode("utf-8")).hexdigest()
        return digest

    def _cache_path(self, key: str) -> Path:
        return self.cache_dir / f"{key}.json"

    def _lock_for(self, key: str) -> threading.Lock:
        with self._locks_guard:
            return self._key_locks.setdefault(key, threading.Lock())

    def _translate(self, text: str, source: str, target: str) -> str:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {"text": text, "source_lang": source, "target_lang": target}
        last_exc: Exception | None = None
        for _ in range(self.retries):
            try:
                body = self._transport(self.endpoint, payload, headers, self.timeout)
                return body["text"]
            except Exception as exc:  # noqa: BLE001 - retried, re-raised below
                last_exc = exc
        raise TransportError(f"translation failed after {self.retries} attempts: {last_exc}")

    def paraphrase(self, request: ParaphraseRequest) -> ParaphraseResult:
        key = self._cache_key(request)
        path = self._cache_path(key)
        with self._lock_for(key):
            if path.exists():
                try:
                    entry = json.loads(path.read_text(encoding="utf-8"))
                    return ParaphraseResult(text=entry["paraphrase"], cached=True)
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise CacheCorruptError(f"corrupt cache entry {path}") from exc
            intermediate = self._translate(request.text, "en", request.pivot.value)
            back = self._translate(intermediate, request.pivot.value, "en")
            entry = {"text": request.text, "pivot": request.pivot.value, "paraphrase": back}
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(entry, ensure_ascii=False), encoding="utf-8")
            tmp.replace(path)
            return ParaphraseResult(text=back, cached=False)


def paraphrase(request: ParaphraseRequest, provider) -> ParaphraseResult:
    """Dispatch a paraphrase request to the given provider."""
    return provider.paraphrase(request)
