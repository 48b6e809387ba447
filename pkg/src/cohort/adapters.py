"""Completion adapters: a deterministic scripted backend and a JSON-over-HTTP client.

One adapter contract serves planning, response scoring, and scene description;
every call is purpose-tagged and reports exactly one latency observation
through the optional ``on_latency`` hook.
"""

from __future__ import annotations

import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Protocol

import requests

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT_MS = 20_000
DEFAULT_RETRIES = 1
REGEX_RULE_PREFIX = "re:"
MATCH_ALL = "*"


class Purpose(Enum):
    PLAN = "plan"
    SCORE = "score"
    SCENE = "scene"


@dataclass(frozen=True)
class CompletionRequest:
    system: str
    user: str
    purpose: Purpose
    max_output_chars: int = 2000
    deterministic: bool = True


LatencyHook = Callable[[Purpose, int, str], None]


class CompletionAdapter(Protocol):
    """Minimal surface the planner, scorer, and perception consume."""

    name: str
    max_concurrency: int

    def complete(self, request: CompletionRequest) -> str: ...


class TransportError(RuntimeError):
    """Terminal transport failure after retries; ``kind`` is one of
    timeout | status | malformed-body."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class ScriptConfigError(ValueError):
    """The rule table is unusable (e.g. a purpose lacks its default rule)."""


@dataclass
class ScriptRule:
    purpose: Purpose
    match: str  # substring, "re:<pattern>", or "*" for the default
    response: str
    once: bool = False
    consumed: bool = False

    def matches(self, user_text: str) -> bool:
        if self.match == MATCH_ALL:
            return True
        if self.match.startswith(REGEX_RULE_PREFIX):
            return re.search(self.match[len(REGEX_RULE_PREFIX):], user_text) is not None
        return self.match in user_text

    def to_dict(self) -> dict:
        return {
            "purpose": self.purpose.value,
            "match": self.match,
            "response": self.response,
            "once": self.once,
        }


def validate_rules(rules: list[ScriptRule]) -> list[ScriptRule]:
    """Every purpose that is ever consulted needs a ``*`` fallthrough rule.

    Plan and score run on every turn, so their defaults are mandatory; a
    scene default is required only when scene rules exist at all.
    """
    purposes_present = {r.purpose for r in rules}
    required = {Purpose.PLAN, Purpose.SCORE} | purposes_present
    missing = [
        p.value
        for p in sorted(required, key=lambda p: p.value)
        if not any(r.purpose is p and r.match == MATCH_ALL for r in rules)
    ]
    if missing:
        raise ScriptConfigError(f"no-default-rule: purposes missing a '*' rule: {', '.join(missing)}")
    return rules


class ScriptedBackend:
    """Deterministic rule-table completion: first matching rule wins, in file
    order; ``once`` rules are consumed. Rule consumption is serialized so the
    replayed response order is identical for identical request order."""

    name = "scripted"
    max_concurrency = 8

    def __init__(self, rules: list[ScriptRule], on_latency: LatencyHook | None = None):
        self.rules = validate_rules([ScriptRule(r.purpose, r.match, r.response, r.once) for r in rules])
        self.on_latency = on_latency
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> str:
        with self._lock:
            response = None
            for rule in self.rules:
                if rule.purpose is not request.purpose or (rule.once and rule.consumed):
                    continue
                if rule.matches(request.user):
                    rule.consumed = True
                    response = rule.response
                    break
        if response is None:  # unreachable once validate_rules passed
            raise ScriptConfigError(f"no rule matched purpose {request.purpose.value}")
        if self.on_latency is not None:
            # Scripted completions are instantaneous in logical time; report 0
            # so event logs stay byte-identical across runs.
            self.on_latency(request.purpose, 0, self.name)
        return response


@dataclass(frozen=True)
class HttpEndpoint:
    base_url: str
    model_name: str
    auth_token_env_var: str | None = None
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    retries: int = DEFAULT_RETRIES

    def to_dict(self) -> dict:
        return {
            "base_url": self.base_url,
            "model_name": self.model_name,
            "auth_token_env_var": self.auth_token_env_var,
            "timeout_ms": self.timeout_ms,
            "retries": self.retries,
        }


class HttpBackend:
    """Chat-completion-style client: system+user messages in, assistant text out.

    Transport failures (timeout, 5xx, malformed body) are retried up to
    ``retries`` extra attempts, then surfaced as :class:`TransportError`.
    """

    name = "http"
    max_concurrency = 4

    def __init__(self, endpoint: HttpEndpoint, on_latency: LatencyHook | None = None):
        self.endpoint = endpoint
        self.on_latency = on_latency

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.endpoint.auth_token_env_var:
            token = os.environ.get(self.endpoint.auth_token_env_var, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(self, request: CompletionRequest) -> str:
        url = self.endpoint.base_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": self.endpoint.model_name,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "max_tokens": request.max_output_chars,
        }
        if request.deterministic:
            payload["temperature"] = 0.0
        started = time.perf_counter()
        failure: tuple[str, str] | None = None
        try:
            for attempt in range(self.endpoint.retries + 1):
                try:
                    resp = requests.post(
                        url,
                        json=payload,
                        headers=self._headers(),
                        timeout=self.endpoint.timeout_ms / 1000.0,
                    )
                except requests.Timeout as exc:
                    failure = ("timeout", str(exc))
                    continue
                except requests.RequestException as exc:
                    failure = ("status", str(exc))
                    continue
                if resp.status_code != 200:
                    failure = ("status", f"HTTP {resp.status_code}: {resp.text[:200]}")
                    continue
                try:
                    text = resp.json()["choices"][0]["message"]["content"]
                except (ValueError, KeyError, IndexError, TypeError) as exc:
                    failure = ("malformed-body", f"unexpected response body: {exc}")
                    continue
                if not isinstance(text, str):
                    failure = ("malformed-body", "assistant content is not text")
                    continue
                return text[: request.max_output_chars]
            kind, message = failure if failure else ("status", "no attempt made")
            raise TransportError(kind, f"{kind} after {self.endpoint.retries + 1} attempts: {message}")
        finally:
            if self.on_latency is not None:
                elapsed_ms = int(round((time.perf_counter() - started) * 1000))
                self.on_latency(request.purpose, elapsed_ms, self.name)
