"""Minimal client for OpenAI-compatible chat-completion endpoints with
retry, backoff, and a process-wide in-flight limit."""

from __future__ import annotations

import logging
import os
import random
import threading
import time
import uuid
from dataclasses import dataclass
from urllib.parse import urlparse

import httpx

logger = logging.getLogger(__name__)

BACKOFF_BASE_SECONDS = 1.0
BACKOFF_JITTER_FRACTION = 0.1
DEFAULT_CONCURRENCY = 4

_limiter = threading.BoundedSemaphore(DEFAULT_CONCURRENCY)


def set_concurrency_limit(limit: int) -> None:
    """Cap concurrent in-flight requests process-wide."""
    global _limiter
    if limit < 1:
        raise ValueError("concurrency limit must be >= 1")
    _limiter = threading.BoundedSemaphore(limit)


class ClientError(Exception):
    pass


class TransportFailure(ClientError):
    """Retries exhausted; carries the request id for correlation."""

    def __init__(self, message: str, request_id: str, attempts: int):
        super().__init__(f"{message} (request {request_id}, {attempts} attempts)")
        self.request_id = request_id
        self.attempts = attempts


class ProtocolError(ClientError):
    """Non-retryable endpoint response (4xx, malformed payload)."""

    def __init__(self, message: str, status_code: int | None = None):
        super().__init__(message)
        self.status_code = status_code


@dataclass(frozen=True, slots=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown role {self.role!r}")


@dataclass(frozen=True, slots=True)
class EndpointConfig:
    base_url: str
    model_name: str
    api_key: str | None = None
    timeout_seconds: int = 60
    max_retries: int = 3
    temperature: float = 0.0

    def __post_init__(self) -> None:
        parsed = urlparse(self.base_url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise ValueError(f"base_url is not a well-formed URL: {self.base_url!r}")
        if self.timeout_seconds <= 0:
            raise ValueError("timeout_seconds must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    @classmethod
    def from_env(cls, **overrides) -> "EndpointConfig":
        """Build from FORGE_API_BASE / FORGE_API_KEY / FORGE_MODEL."""
        base_url = overrides.pop("base_url", os.environ.get("FORGE_API_BASE", ""))
        model = overrides.pop("model_name", os.environ.get("FORGE_MODEL", ""))
        api_key = overrides.pop("api_key", os.environ.get("FORGE_API_KEY") or None)
        if not base_url or not model:
            raise ValueError("FORGE_API_BASE and FORGE_MODEL must be set (or passed)")
        return cls(base_url=base_url, model_name=model, api_key=api_key, **overrides)


@dataclass(slots=True)
class ChatExchange:
    request_messages: list[ChatMessage]
    response_text: str
    latency_ms: int
    attempt_count: int


def _backoff_delay(attempt: int) -> float:
    base = BACKOFF_BASE_SECONDS * (2 ** (attempt - 1))
    return base + random.uniform(0, BACKOFF_JITTER_FRACTION * base)


def chat_complete(
    config: EndpointConfig,
    messages: list[ChatMessage],
    transport: httpx.BaseTransport | None = None,
    sleep=time.sleep,
) -> ChatExchange:
    """POST one chat-completion request, retrying transport errors and
    HTTP 429/5xx with exponential backoff. Other 4xx fail immediately.

    Neither the api_key nor request headers are ever logged.
    """
    if not messages:
        raise ValueError("messages must be non-empty")
    if messages[-1].role != "user":
        raise ValueError("last message must have role 'user'")

    request_id = uuid.uuid4().hex
    url = config.base_url.rstrip("/") + "/chat/completions"
    body = {
        "model": config.model_name,
        "messages": [{"role": m.role, "content": m.content} for m in messages],
        "temperature": config.temperature,
    }
    headers = {"X-Request-ID": request_id}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"

    started = time.perf_counter()
    last_error = "no attempt made"
    attempts = config.max_retries + 1
    with _limiter:
        with httpx.Client(transport=transport, timeout=config.timeout_seconds) as client:
            for attempt in range(1, attempts + 1):
                logger.debug(
                    "chat request %s attempt %d/%d model=%s",
                    request_id, attempt, attempts, config.model_name,
                )
                try:
                    response = client.post(url, json=body, headers=headers)
                except httpx.HTTPError as exc:
                    last_error = f"transport error: {exc.__class__.__name__}: {exc}"
                else:
                    if response.status_code == 200:
                        text = _extract_choice(response)
                        latency = int((time.perf_counter() - started) * 1000)
                        return ChatExchange(list(messages), text, latency, attempt)
                    if response.status_code == 429 or response.status_code >= 500:
                        last_error = f"HTTP {response.status_code}"
                    else:
                        raise ProtocolError(
                            f"endpoint rejected request: HTTP {response.status_code}: "
                            f"{response.text[:200]}",
                            status_code=response.status_code,
                        )
                if attempt < attempts:
                    delay = _backoff_delay(attempt)
                    logger.debug(
                        "chat request %s retrying in %.2fs after %s",
                        request_id, delay, last_error,
                    )
                    sleep(delay)
    raise TransportFailure(last_error, request_id, attempts)


def _extract_choice(response: httpx.Response) -> str:
    try:
        payload = response.json()
        choices = payload["choices"]
        if not choices:
            raise KeyError("choices")
        content = choices[0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise ProtocolError(f"malformed chat-completion response: {exc}") from exc
    if not isinstance(content, str):
        raise ProtocolError("chat-completion content is not a string")
    return content
