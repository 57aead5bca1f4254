"""Transport-agnostic chat client for the vision and reasoning models.

The live transport speaks the de-facto chat-completions wire format (role and
content messages, images as base64 data URLs); a deterministic mock transport
replays transcript files for offline runs and tests. Image bytes never reach
log output.
"""

from __future__ import annotations

import base64
import logging
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import httpx
import numpy as np

from .rendering import encode_png

logger = logging.getLogger(__name__)

TRANSCRIPT_DELIMITER = re.compile(r"^-{5,}$", re.MULTILINE)
MAX_PAYLOAD_BYTES = 20 * 1024 * 1024
RETRYABLE_STATUS = {408, 409, 429, 500, 502, 503, 504}


class TransportError(RuntimeError):
    pass


class TranscriptExhausted(TransportError):
    pass


class PayloadTooLarge(TransportError):
    pass


@dataclass(frozen=True)
class ClientConfig:
    vlm_model: str = "gpt-4o"
    reasoning_model: str = "o3-mini"
    api_base_url: str = "https://api.openai.com/v1"
    api_key_env_var: str = "OPENAI_API_KEY"
    timeout_s: float = 120.0
    retry_limit: int = 3
    temperature: float = 0.0


@dataclass
class Turn:
    role: str
    text: str
    image_payloads: tuple[bytes, ...] = ()


class Transport(Protocol):
    def complete(self, model_id: str, messages: list[dict]) -> str:
        """Send the full message history and return the assistant text."""
        ...


def _image_part(png_bytes: bytes) -> dict:
    encoded = base64.b64encode(png_bytes).decode("ascii")
    return {"type": "image_url", "image_url": {"url": f"data:image/png;base64,{encoded}"}}


def _turn_to_message(turn: Turn) -> dict:
    if turn.role != "user" or not turn.image_payloads:
        return {"role": turn.role, "content": turn.text}
    content: list[dict] = [{"type": "text", "text": turn.text}]
    content.extend(_image_part(png) for png in turn.image_payloads)
    return {"role": turn.role, "content": content}


class ChatSession:
    """A single cumulative conversation against one model. History is
    append-only; each send transmits the entire history."""

    def __init__(self, model_id: str, transport: Transport):
        self.model_id = model_id
        self.transport = transport
        self._history: list[Turn] = []

    @property
    def history(self) -> tuple[Turn, ...]:
        return tuple(self._history)

    def send_turn(self, text: str, images: Sequence[np.ndarray] = ()) -> str:
        payloads = tuple(encode_png(img) for img in images)
        total = sum(len(p) for p in payloads) + len(text.encode("utf-8"))
        if total > MAX_PAYLOAD_BYTES:
            raise PayloadTooLarge(f"turn payload {total} bytes exceeds {MAX_PAYLOAD_BYTES}")
        self._history.append(Turn(role="user", text=text, image_payloads=payloads))
        messages = [_turn_to_message(t) for t in self._history]
        logger.debug(
            "sending turn to %s: %d chars, %d image(s), history length %d",
            self.model_id, len(text), len(payloads), len(self._history),
        )
        response = self.transport.complete(self.model_id, messages)
        self._history.append(Turn(role="assistant", text=response))
        return response


class HttpTransport:
    """Chat-completions endpoint client with exponential backoff on transient
    failures."""

    def __init__(self, config: ClientConfig, sleep=time.sleep):
        self.config = config
        self._sleep = sleep
        api_key = os.environ.get(config.api_key_env_var, "")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(
            base_url=config.api_base_url, headers=headers, timeout=config.timeout_s
        )

    def complete(self, model_id: str, messages: list[dict]) -> str:
        body = {"model": model_id, "messages": messages, "temperature": self.config.temperature}
        delay = 0.5
        last_error: Exception | None = None
        for attempt in range(self.config.retry_limit):
            try:
                response = self._client.post("/chat/completions", json=body)
                if response.status_code in RETRYABLE_STATUS:
                    raise TransportError(f"retryable status {response.status_code}")
                response.raise_for_status()
                return response.json()["choices"][0]["message"]["content"]
            except (httpx.TransportError, TransportError) as exc:
                last_error = exc
                logger.warning("transport attempt %d failed: %s", attempt + 1, exc)
                if attempt + 1 < self.config.retry_limit:
                    self._sleep(delay)
                    delay *= 2
        raise TransportError(f"exhausted {self.config.retry_limit} attempts: {last_error}")


class MockTransport:
    """Replays canned responses in order; records every outgoing request so
    tests can inspect the serialized payloads."""

    def __init__(self, responses: Sequence[str]):
        self._responses = list(responses)
        self._cursor = 0
        self.requests: list[tuple[str, list[dict]]] = []

    @classmethod
    def from_file(cls, path: str | Path) -> "MockTransport":
        text = Path(path).read_text(encoding="utf-8")
        blocks = [block.strip("\n") for block in TRANSCRIPT_DELIMITER.split(text)]
        return cls([b for b in blocks if b.strip()])

    @property
    def remaining(self) -> int:
        return len(self._responses) - self._cursor

    def complete(self, model_id: str, messages: list[dict]) -> str:
        self.requests.append((model_id, messages))
        if self._cursor >= len(self._responses):
            raise TranscriptExhausted(
                f"mock transcript exhausted after {len(self._responses)} responses"
            )
        response = self._responses[self._cursor]
        self._cursor += 1
        return response


@dataclass
class ScriptedTransport:
    """Mock whose responses may be callables of the request, for fault
    injection in tests."""

    script: list
    requests: list = field(default_factory=list)

    def complete(self, model_id: str, messages: list[dict]) -> str:
        self.requests.append((model_id, messages))
        if not self.script:
            raise TranscriptExhausted("scripted transport exhausted")
        entry = self.script.pop(0)
        return entry(model_id, messages) if callable(entry) else entry
