"""Single boundary for all model calls.

Everything that talks to a language model goes through an :class:`Oracle`.
Three implementations exist: a live HTTP chat-completion client, a strict
fixture-map mock, and a keyword-rule mock. The gateway owns retry with
exponential backoff and a response cache for the deterministic purposes
(summarize, classify). No other module performs network traffic.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "PURPOSES",
    "OracleRequest",
    "OracleError",
    "OracleRefusal",
    "NoFixtureError",
    "Oracle",
    "LiveOracle",
    "MockOracle",
    "load_fixtures",
]

PURPOSES = ("gm_turn", "player_turn", "rule_check", "summarize", "induce", "classify")

# Purposes whose responses are cached by prompt content hash.
_CACHED_PURPOSES = frozenset({"summarize", "classify"})

# Purposes that want deterministic output by default.
_ZERO_TEMPERATURE_PURPOSES = frozenset({"rule_check", "classify"})


@dataclass(frozen=True)
class Sampling:
    temperature: float = 0.7
    max_tokens: int = 1024
    seed: int | None = None


@dataclass(frozen=True)
class OracleRequest:
    template_id: str
    filled_prompt: str
    purpose: str
    sampling: Sampling = Sampling()

    def __post_init__(self):
        if not self.filled_prompt:
            raise ValueError("filled_prompt must be nonempty")
        if self.purpose not in PURPOSES:
            raise ValueError(f"unknown purpose {self.purpose!r}")

    @staticmethod
    def make(
        template_id: str,
        filled_prompt: str,
        purpose: str,
        seed: int | None = None,
        temperature: float | None = None,
    ) -> "OracleRequest":
        if temperature is None:
            temperature = 0.0 if purpose in _ZERO_TEMPERATURE_PURPOSES else 0.7
        return OracleRequest(
            template_id=template_id,
            filled_prompt=filled_prompt,
            purpose=purpose,
            sampling=Sampling(temperature=temperature, seed=seed),
        )

    def content_hash(self) -> str:
        return hashlib.sha256(self.filled_prompt.encode("utf-8")).hexdigest()


class OracleError(RuntimeError):
    """A backend call failed after exhausting the retry budget."""


class OracleRefusal(OracleError):
    """The backend refused to produce content (e.g. safety guard).

    Surfaced distinctly so playthrough simulation can skip a profile instead
    of failing a whole batch.
    """


class NoFixtureError(OracleError):
    """Strict mock got a prompt with no matching fixture: an untested path."""


class Oracle:
    """Base oracle: retry/backoff and response caching around ``_complete``."""

    def __init__(self, max_attempts: int = 3, backoff: float = 0.5):
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.call_count = 0  # backend calls actually made (cache hits excluded)
        self._cache: dict[str, str] = {}
        self._lock = threading.Lock()

    def complete(self, req: OracleRequest) -> str:
        cache_key = None
        if req.purpose in _CACHED_PURPOSES:
            cache_key = f"{req.purpose}:{req.content_hash()}"
            with self._lock:
                if cache_key in self._cache:
                    return self._cache[cache_key]
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            try:
                with self._lock:
                    self.call_count += 1
                text = self._complete(req)
                if cache_key is not None:
                    with self._lock:
                        self._cache.setdefault(cache_key, text)
                return text
            except (OracleRefusal, NoFixtureError):
                raise  # not transient; never retried
            except OracleError as e:
                last_error = e
                if attempt + 1 < self.max_attempts:
                    time.sleep(self.backoff * (2**attempt))
        raise OracleError(f"backend failed after {self.max_attempts} attempts: {last_error}")

    def _complete(self, req: OracleRequest) -> str:
        raise NotImplementedError


class LiveOracle(Oracle):
    """Client for an HTTP chat-completion endpoint, configured via environment.

    Environment variables: STORYBUNDLE_ENDPOINT (full chat-completions URL),
    STORYBUNDLE_API_KEY, STORYBUNDLE_MODEL, STORYBUNDLE_CONCURRENCY.
    """

    def __init__(
        self,
        endpoint: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        concurrency: int | None = None,
        **kwargs,
    ):
        super().__init__(**kwargs)
        self.endpoint = endpoint or os.environ.get("STORYBUNDLE_ENDPOINT", "")
        self.api_key = api_key or os.environ.get("STORYBUNDLE_API_KEY", "")
        self.model = model or os.environ.get("STORYBUNDLE_MODEL", "")
        if not self.endpoint:
            raise OracleError("no backend configured: set STORYBUNDLE_ENDPOINT")
        limit = concurrency or int(os.environ.get("STORYBUNDLE_CONCURRENCY", "4"))
        self._semaphore = threading.Semaphore(limit)

    def _complete(self, req: OracleRequest) -> str:
        import httpx

        payload: dict = {
            "model": self.model,
            "messages": [{"role": "user", "content": req.filled_prompt}],
            "temperature": req.sampling.temperature,
            "max_tokens": req.sampling.max_tokens,
        }
        if req.sampling.seed is not None:
            payload["seed"] = req.sampling.seed
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        with self._semaphore:
            try:
                resp = httpx.post(self.endpoint, json=payload, headers=headers, timeout=120.0)
            except httpx.HTTPError as e:
                raise OracleError(f"transport error: {e}") from e
        if resp.status_code in (401, 403):
            raise OracleRefusal(f"authentication failure: HTTP {resp.status_code}")
        if resp.status_code != 200:
            raise OracleError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        body = resp.json()
        try:
            message = body["choices"][0]["message"]
        except (KeyError, IndexError) as e:
            raise OracleError(f"malformed response body: {e}") from e
        if body["choices"][0].get("finish_reason") == "content_filter":
            raise OracleRefusal("backend refused the request")
        return message["content"]


@dataclass
class Fixture:
    """One scripted response.

    match_type ``exact_hash`` fires when the prompt's sha256 equals ``pattern``;
    ``keyword`` fires when every string in ``pattern`` (a list, or a single
    string) occurs in the prompt. ``purpose`` of None matches any purpose.
    """

    match_type: str  # exact_hash | keyword
    pattern: list[str] | str
    response: str
    purpose: str | None = None
    refusal: bool = False

    def matches(self, req: OracleRequest) -> bool:
        if self.purpose is not None and self.purpose != req.purpose:
            return False
        if self.match_type == "exact_hash":
            return req.content_hash() == self.pattern
        needles = [self.pattern] if isinstance(self.pattern, str) else self.pattern
        return all(n in req.filled_prompt for n in needles)


class MockOracle(Oracle):
    """Deterministic oracle backed by a fixture list.

    First matching fixture wins. In strict mode an unmatched prompt raises
    :class:`NoFixtureError`, which makes the entire system's behavior a pure
    function of inputs plus fixtures and catches untested prompt paths.
    """

    def __init__(self, fixtures: list[Fixture], strict: bool = True, **kwargs):
        super().__init__(**kwargs)
        self.fixtures = list(fixtures)
        self.strict = strict
        self.requests: list[OracleRequest] = []  # every backend call, for assertions

    def _complete(self, req: OracleRequest) -> str:
        self.requests.append(req)
        for fixture in self.fixtures:
            if fixture.matches(req):
                if fixture.refusal:
                    raise OracleRefusal("scripted refusal")
                return fixture.response
        if self.strict:
            raise NoFixtureError(
                f"no fixture for purpose={req.purpose} "
                f"hash={req.content_hash()[:12]} prompt={req.filled_prompt[:120]!r}"
            )
        return ""


def load_fixtures(path: str | Path) -> list[Fixture]:
    """Load fixture files from a directory (every ``*.json`` file) or one file.

    Each file holds ``{"fixtures": [{match, purpose?, pattern, response,
    refusal?}]}`` where ``match`` is ``exact_hash`` or ``keyword``.
    """
    path = Path(path)
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    fixtures: list[Fixture] = []
    for f in files:
        doc = json.loads(f.read_text())
        for entry in doc.get("fixtures", []):
            fixtures.append(
                Fixture(
                    match_type=entry["match"],
                    pattern=entry["pattern"],
                    response=entry.get("response", ""),
                    purpose=entry.get("purpose"),
                    refusal=bool(entry.get("refusal", False)),
                )
            )
    return fixtures
