"""Chat-completion gateway shared by all reasoning stages.

One provider interface, three implementations: a remote HTTP service
with retries, a scripted mock that answers from a (stage, sample) table
and a rule-based mock for offline end-to-end runs. Responses are cached
by request digest when a cache directory is configured, so a warm cache
replays an entire evaluation without a single network call.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

import requests

from .errors import ProviderExhausted, ProviderUnavailable, ScriptMissing
from .rule_mock import rule_response

DEFAULT_TEMPERATURE = 0.6
DEFAULT_MAX_TOKENS = 4096


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_messages: tuple[str, ...]
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    image_refs: tuple[str, ...] = ()
    metadata: tuple[tuple[str, str], ...] = ()  # e.g. (("stage", "analyst"), ("sample", "s1"))

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")

    @property
    def meta(self) -> dict[str, str]:
        return dict(self.metadata)

    def full_text(self) -> str:
        return "\n".join((self.system_prompt, *self.user_messages))


@dataclass(frozen=True)
class ChatResponse:
    text: str
    provider_meta: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RemoteLlm:
    endpoint: str
    model: str
    credential_env: str = ""


@dataclass(frozen=True)
class ScriptedMock:
    script_path: str


@dataclass(frozen=True)
class RuleMock:
    """Answers derived from the prompt text alone; see rule_mock."""


@dataclass(frozen=True)
class GatewayConfig:
    provider: RemoteLlm | ScriptedMock | RuleMock = RuleMock()
    max_attempts: int = 3
    backoff_base: float = 0.5
    cache_dir: str | None = None
    rate_limit: int = 4

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.rate_limit < 1:
            raise ValueError("rate_limit must be >= 1")


def request_digest(req: ChatRequest) -> str:
    """Stable hex digest over every request field."""
    canonical = json.dumps(
        {
            "system_prompt": req.system_prompt,
            "user_messages": list(req.user_messages),
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
            "image_refs": list(req.image_refs),
            "metadata": [list(pair) for pair in req.metadata],
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class LlmGateway:
    """Thread-safe gateway; share one instance across concurrent runs."""

    def __init__(
        self,
        cfg: GatewayConfig,
        session: Any | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.cfg = cfg
        self._session = session
        self._sleep = sleep
        self._semaphore = threading.Semaphore(cfg.rate_limit)
        self._script: dict[str, dict[str, str]] | None = None
        self.provider_calls = 0  # actual provider invocations, cache hits excluded

    # -- cache --

    def _cache_path(self, digest: str) -> Path | None:
        if self.cfg.cache_dir is None:
            return None
        return Path(self.cfg.cache_dir) / f"{digest}.txt"

    def _cache_read(self, digest: str) -> str | None:
        path = self._cache_path(digest)
        if path is None or not path.is_file():
            return None
        return path.read_text(encoding="utf-8")

    def _cache_write(self, digest: str, text: str) -> None:
        path = self._cache_path(digest)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".tmp.{os.getpid()}.{threading.get_ident()}")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)

    # -- providers --

    def _scripted(self, provider: ScriptedMock, req: ChatRequest) -> str:
        if self._script is None:
            self._script = json.loads(Path(provider.script_path).read_text(encoding="utf-8"))
        meta = req.meta
        stage = meta.get("stage", "")
        sample = meta.get("sample", "")
        try:
            return self._script[stage][sample]
        except KeyError:
            raise ScriptMissing(f"{stage}/{sample}") from None

    def _remote(self, provider: RemoteLlm, req: ChatRequest) -> str:
        headers = {}
        if provider.credential_env:
            credential = os.environ.get(provider.credential_env)
            if not credential:
                raise ProviderUnavailable(
                    f"credential env var {provider.credential_env!r} is not set"
                )
            headers["Authorization"] = f"Bearer {credential}"
        messages: list[dict[str, Any]] = []
        if req.system_prompt:
            messages.append({"role": "system", "content": req.system_prompt})
        for i, content in enumerate(req.user_messages):
            message: dict[str, Any] = {"role": "user", "content": content}
            if i == 0 and req.image_refs:
                message["image_refs"] = list(req.image_refs)
            messages.append(message)
        payload = {
            "model": provider.model,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        session = self._session if self._session is not None else requests
        last_error: Exception | None = None
        for attempt in range(self.cfg.max_attempts):
            if attempt:
                self._sleep(self.cfg.backoff_base * 2 ** (attempt - 1))
            try:
                with self._semaphore:
                    response = session.post(provider.endpoint, json=payload, headers=headers, timeout=120)
                status = getattr(response, "status_code", 200)
                if not 200 <= status < 300:
                    raise ProviderUnavailable(f"provider returned status {status}")
                body = response.json()
                return _response_text(body)
            except Exception as exc:
                last_error = exc
        raise ProviderExhausted(
            f"provider failed after {self.cfg.max_attempts} attempts: {last_error}"
        ) from last_error

    # -- entry point --

    def complete(self, req: ChatRequest) -> ChatResponse:
        digest = request_digest(req)
        cached = self._cache_read(digest)
        if cached is not None:
            return ChatResponse(text=cached, provider_meta={"cache": "hit", "digest": digest})
        provider = self.cfg.provider
        self.provider_calls += 1
        if isinstance(provider, ScriptedMock):
            text = self._scripted(provider, req)
        elif isinstance(provider, RuleMock):
            text = rule_response(req.full_text())
        elif isinstance(provider, RemoteLlm):
            text = self._remote(provider, req)
        else:
            raise ProviderUnavailable(f"unsupported provider {provider!r}")
        self._cache_write(digest, text)
        return ChatResponse(text=text, provider_meta={"cache": "miss", "digest": digest})


def _response_text(body: Any) -> str:
    if isinstance(body, dict):
        choices = body.get("choices")
        if isinstance(choices, list) and choices:
            message = choices[0].get("message", {})
            if isinstance(message, dict) and isinstance(message.get("content"), str):
                return message["content"]
        if isinstance(body.get("text"), str):
            return body["text"]
    raise ProviderUnavailable(f"unrecognized completion response: {body!r}")


def complete(req: ChatRequest, cfg: GatewayConfig) -> ChatResponse:
    """One-shot convenience over a throwaway gateway."""
    return LlmGateway(cfg).complete(req)
