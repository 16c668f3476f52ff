"""LLM backends behind one completion contract, plus strict envelope parsing.

The replay provider answers from canned ``<prompt_hash>.txt`` files and makes
the whole pipeline hermetic; the HTTP provider POSTs a generic JSON request.
Model output must be a single JSON object with exactly the six envelope keys
and nothing else — prose around the object is rejected, not salvaged.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from . import gherkin
from .errors import DomainError

ENVELOPE_KEYS = (
    "rule_identifier",
    "rule_name",
    "description",
    "trigger",
    "rule_parameters",
    "gherkin",
)

DEFAULT_MAX_OUTPUT_CHARS = 16_000
DEFAULT_TEMPERATURE = 0.0
DEFAULT_TIMEOUT_MS = 60_000


class ProviderError(DomainError):
    """Base for completion failures."""


class Transport(ProviderError):
    def __init__(self, reason: str) -> None:
        super().__init__(f"transport failure: {reason}")
        self.reason = reason


class Timeout(ProviderError):
    def __init__(self, elapsed_ms: int) -> None:
        super().__init__(f"provider timed out after {elapsed_ms} ms")
        self.elapsed_ms = elapsed_ms


class ReplayMiss(ProviderError):
    def __init__(self, prompt_hash: str) -> None:
        super().__init__(f"no replay fixture for prompt hash {prompt_hash}")
        self.prompt_hash = prompt_hash


class BudgetExceeded(ProviderError):
    def __init__(self, length: int, limit: int) -> None:
        super().__init__(f"provider returned {length} chars; budget is {limit}")
        self.length = length
        self.limit = limit


class EnvelopeError(DomainError):
    """Base for envelope validation failures."""


class NotJson(EnvelopeError):
    def __init__(self, reason: str = "output is not a single JSON object") -> None:
        super().__init__(reason)


class ProseContamination(EnvelopeError):
    def __init__(self) -> None:
        super().__init__("non-whitespace text found outside the JSON object")


class MissingKey(EnvelopeError):
    def __init__(self, name: str) -> None:
        super().__init__(f"envelope is missing key {name!r}")
        self.name = name


class ExtraKey(EnvelopeError):
    def __init__(self, name: str) -> None:
        super().__init__(f"envelope has unexpected key {name!r}")
        self.name = name


class EnvelopeFieldInvalid(EnvelopeError):
    def __init__(self, name: str, reason: str) -> None:
        super().__init__(f"envelope field {name!r} invalid: {reason}")
        self.name = name
        self.reason = reason


class GherkinInvalid(EnvelopeError):
    def __init__(self, inner: gherkin.GherkinError) -> None:
        super().__init__(f"embedded gherkin invalid: {type(inner).__name__}: {inner}")
        self.inner = inner


@dataclass(frozen=True)
class ProviderRequest:
    prompt: str
    prompt_hash: str
    max_output_chars: int = DEFAULT_MAX_OUTPUT_CHARS
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        expected = hashlib.sha256(self.prompt.encode("utf-8")).hexdigest()
        if self.prompt_hash != expected:
            raise ValueError("prompt_hash does not match SHA-256 of prompt")
        if self.max_output_chars <= 0:
            raise ValueError("max_output_chars must be positive")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must be within [0, 1]")


def make_request(
    prompt: str,
    *,
    max_output_chars: int = DEFAULT_MAX_OUTPUT_CHARS,
    temperature: float = DEFAULT_TEMPERATURE,
) -> ProviderRequest:
    return ProviderRequest(
        prompt=prompt,
        prompt_hash=hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
        max_output_chars=max_output_chars,
        temperature=temperature,
    )


@dataclass(frozen=True)
class ProviderResponse:
    raw: str
    provider_name: str
    latency_ms: int


class LlmProvider(ABC):
    name: str = "provider"

    @abstractmethod
    def complete(self, request: ProviderRequest) -> ProviderResponse:
        """Run one completion; implementations must be safe to call concurrently."""


class ReplayProvider(LlmProvider):
    """Deterministic provider: responses keyed by prompt hash on disk."""

    name = "replay"

    def __init__(self, fixtures_dir: str | Path) -> None:
        self.fixtures_dir = Path(fixtures_dir)
        self.calls = 0

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls += 1
        started = time.perf_counter()
        path = self.fixtures_dir / f"{request.prompt_hash}.txt"
        if not path.is_file():
            raise ReplayMiss(request.prompt_hash)
        raw = path.read_text(encoding="utf-8")
        if len(raw) > request.max_output_chars:
            raise BudgetExceeded(len(raw), request.max_output_chars)
        elapsed = int((time.perf_counter() - started) * 1000)
        return ProviderResponse(raw=raw, provider_name=self.name, latency_ms=elapsed)


class HttpProvider(LlmProvider):
    """Generic JSON-over-HTTP provider: POST {prompt, temperature, max_output_chars}."""

    name = "http"

    def __init__(
        self,
        endpoint: str,
        *,
        auth_header: str | None = None,
        auth_value: str | None = None,
        timeout_ms: int = DEFAULT_TIMEOUT_MS,
        retry: bool = False,
    ) -> None:
        self.endpoint = endpoint
        self.auth_header = auth_header
        self.auth_value = auth_value
        self.timeout_ms = timeout_ms
        self.retry = retry

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "HttpProvider":
        env = dict(os.environ) if env is None else env
        endpoint = env.get("CONTROLS_HTTP_ENDPOINT")
        if not endpoint:
            raise Transport("CONTROLS_HTTP_ENDPOINT is not configured")
        return cls(
            endpoint,
            auth_header=env.get("CONTROLS_HTTP_AUTH_HEADER"),
            auth_value=env.get("CONTROLS_HTTP_AUTH_VALUE"),
            timeout_ms=int(env.get("CONTROLS_HTTP_TIMEOUT_MS", DEFAULT_TIMEOUT_MS)),
        )

    def _attempt(self, request: ProviderRequest) -> ProviderResponse:
        headers = {}
        if self.auth_header and self.auth_value:
            headers[self.auth_header] = self.auth_value
        started = time.perf_counter()
        try:
            response = httpx.post(
                self.endpoint,
                json={
                    "prompt": request.prompt,
                    "temperature": request.temperature,
                    "max_output_chars": request.max_output_chars,
                },
                headers=headers,
                timeout=self.timeout_ms / 1000.0,
            )
        except httpx.TimeoutException:
            raise Timeout(int((time.perf_counter() - started) * 1000)) from None
        except httpx.HTTPError as exc:
            raise Transport(str(exc)) from exc
        elapsed = int((time.perf_counter() - started) * 1000)
        if response.status_code != 200:
            raise Transport(f"endpoint returned HTTP {response.status_code}")
        raw = response.text
        if len(raw) > request.max_output_chars:
            raise BudgetExceeded(len(raw), request.max_output_chars)
        return ProviderResponse(raw=raw, provider_name=self.name, latency_ms=elapsed)

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        try:
            return self._attempt(request)
        except (Transport, Timeout):
            if not self.retry:
                raise
            return self._attempt(request)


@dataclass(frozen=True)
class Envelope:
    rule_identifier: str
    rule_name: str
    description: str
    trigger: str
    rule_parameters: dict[str, str]
    gherkin: str | list = field(default="")


def strict_json_value(raw: str, opener: str) -> object:
    """Decode raw as exactly one JSON value starting with ``opener`` ('{' or '[').

    Whitespace is the only content permitted around the value; anything else is
    prose contamination when a candidate value is present, NotJson otherwise.
    """
    stripped = raw.strip()
    if not stripped:
        raise NotJson("output is empty")
    if stripped[0] == opener:
        try:
            value, end = json.JSONDecoder().raw_decode(stripped)
        except json.JSONDecodeError as exc:
            raise NotJson(f"output is not valid JSON: {exc}") from exc
        if stripped[end:].strip():
            raise ProseContamination()
        return value
    # Wrong leading character: either a different JSON value (NotJson) or
    # prose surrounding an embedded value (ProseContamination).
    try:
        json.loads(stripped)
    except json.JSONDecodeError:
        idx = stripped.find(opener)
        if idx == -1:
            raise NotJson("no JSON value found in output") from None
        try:
            json.JSONDecoder().raw_decode(stripped[idx:])
        except json.JSONDecodeError:
            raise NotJson("no valid JSON value found in output") from None
        raise ProseContamination() from None
    raise NotJson("output is valid JSON but not the expected kind of value")


def _validate_gherkin_field(env: Envelope) -> None:
    """Ensure the envelope converts cleanly; conversion errors become typed."""
    convert_envelope(env)


def parse_envelope(raw: str) -> Envelope:
    """Strictly parse model output into a validated envelope."""
    value = strict_json_value(raw, "{")
    assert isinstance(value, dict)
    for key in ENVELOPE_KEYS:
        if key not in value:
            raise MissingKey(key)
    for key in value:
        if key not in ENVELOPE_KEYS:
            raise ExtraKey(key)
    for key in ("rule_identifier", "rule_name", "description"):
        if not isinstance(value[key], str) or not value[key].strip():
            raise EnvelopeFieldInvalid(key, "must be a non-empty string")
    if not isinstance(value["trigger"], str):
        raise EnvelopeFieldInvalid("trigger", "must be a string")
    try:
        gherkin.Trigger(value["trigger"])
    except ValueError:
        raise gherkin.InvalidTrigger(value["trigger"]) from None
    params = value["rule_parameters"]
    if not isinstance(params, dict) or not all(
        isinstance(k, str) and isinstance(v, str) and v.strip() for k, v in params.items()
    ):
        raise EnvelopeFieldInvalid(
            "rule_parameters", "must be an object mapping names to type strings"
        )
    identifier = value["rule_identifier"].strip()
    if not gherkin.IDENTIFIER_RE.match(identifier):
        raise EnvelopeFieldInvalid("rule_identifier", "must match [A-Z0-9_.]+")
    body = value["gherkin"]
    if not isinstance(body, (str, list)):
        raise EnvelopeFieldInvalid("gherkin", "must be dialect text or a list of scenarios")
    env = Envelope(
        rule_identifier=identifier,
        rule_name=" ".join(value["rule_name"].split()),
        description=" ".join(value["description"].split()),
        trigger=value["trigger"],
        rule_parameters=dict(params),
        gherkin=body,
    )
    _validate_gherkin_field(env)
    return env


def _scenarios_from_structured(items: list) -> list[gherkin.Scenario]:
    scenarios: list[gherkin.Scenario] = []
    for item in items:
        if (
            not isinstance(item, dict)
            or not isinstance(item.get("title"), str)
            or "steps" not in item
        ):
            raise EnvelopeFieldInvalid(
                "gherkin", "structured scenarios need a string 'title' and 'steps'"
            )
        steps_raw = item["steps"]
        if not isinstance(steps_raw, list):
            raise EnvelopeFieldInvalid("gherkin", "scenario steps must be a list")
        pairs: list[tuple[str, str]] = []
        for step in steps_raw:
            if (
                not isinstance(step, dict)
                or not isinstance(step.get("keyword"), str)
                or not isinstance(step.get("text"), str)
            ):
                raise EnvelopeFieldInvalid("gherkin", "steps need 'keyword' and 'text' strings")
            pairs.append((step["keyword"], step["text"]))
        scenarios.append(gherkin.scenario_from_steps(item["title"], pairs))
    if not scenarios:
        raise GherkinInvalid(gherkin.NoScenarios())
    return scenarios


def convert_envelope(env: Envelope) -> tuple[gherkin.GherkinControl, list[str]]:
    """Build the control from an envelope; envelope header fields win.

    Returns the control plus warnings for any header mismatch between the
    envelope and a header embedded in the gherkin text.
    """
    warnings: list[str] = []
    if isinstance(env.gherkin, str):
        try:
            if gherkin.has_header(env.gherkin):
                inner = gherkin.parse(env.gherkin)
                scenarios = list(inner.scenarios)
                for field_name in ("rule_identifier", "rule_name", "description"):
                    inner_value = getattr(inner, field_name)
                    outer_value = getattr(env, field_name)
                    if inner_value != outer_value:
                        warnings.append(
                            f"{field_name} differs between envelope ({outer_value!r}) and "
                            f"gherkin header ({inner_value!r}); envelope wins"
                        )
                if inner.trigger.value != env.trigger:
                    warnings.append(
                        f"trigger differs between envelope ({env.trigger!r}) and gherkin "
                        f"header ({inner.trigger.value!r}); envelope wins"
                    )
            else:
                scenarios = gherkin.parse_scenario_blocks(env.gherkin)
        except gherkin.GherkinError as exc:
            raise GherkinInvalid(exc) from exc
    else:
        scenarios = _scenarios_from_structured(env.gherkin)
    try:
        control = gherkin.build_control(
            rule_identifier=env.rule_identifier,
            rule_name=env.rule_name,
            description=env.description,
            trigger=env.trigger,
            rule_parameters=env.rule_parameters,
            scenarios=scenarios,
        )
    except gherkin.GherkinError as exc:
        raise GherkinInvalid(exc) from exc
    return control, warnings


def envelope_to_control(env: Envelope) -> tuple[gherkin.GherkinControl, list[str]]:
    """Public alias of convert_envelope; valid envelopes never fail here."""
    return convert_envelope(env)
