"""Generation backends: deterministic mocks for tests and offline runs,
and the HTTP client for a real model server.

Mock backends expose per-step token distributions and are sampled
client-side. The HTTP backend posts the whole request to /v1/generate and
lets the server sample (parameters and seed forwarded verbatim).
"""

import hashlib
import time
from dataclasses import dataclass

import requests

from .decode import FinishReason, GeneratedQuestion, TokenDistribution
from .errors import BackendProtocolError, BackendTransportError, ConfigError

GENERATE_PATH = "/v1/generate"
DEFAULT_RETRY_ATTEMPTS = 3
DEFAULT_RETRY_BACKOFF = 0.25  # seconds, doubles per attempt


@dataclass
class BackendDescriptor:
    kind: str                      # "MOCK" or "HTTP"
    endpoint: str | None = None    # HTTP only
    sampling_locus: str = "CLIENT"  # "CLIENT" or "SERVER"

    def __post_init__(self):
        if self.kind not in ("MOCK", "HTTP"):
            raise ConfigError(f"unknown backend kind {self.kind!r}")
        if self.sampling_locus not in ("CLIENT", "SERVER"):
            raise ConfigError(f"unknown sampling locus {self.sampling_locus!r}")
        if self.kind == "MOCK" and self.sampling_locus != "CLIENT":
            raise ConfigError("mock backends always sample client-side")
        if self.kind == "HTTP" and not self.endpoint:
            raise ConfigError("HTTP backends need an endpoint")

    def as_dict(self):
        return {"kind": self.kind, "endpoint": self.endpoint,
                "sampling_locus": self.sampling_locus}


class ScriptedBackend:
    """Plays back a fixed token script; after the script runs out it emits
    `after` forever (the stop text by default, so sessions terminate).
    With cycle=True the script repeats instead, which is how runaway
    repetition loops are simulated."""

    sampling_locus = "CLIENT"

    def __init__(self, script, after="\n", cycle=False):
        self.script = list(script)
        self.after = after
        self.cycle = cycle
        self.descriptor = BackendDescriptor(kind="MOCK")

    def next_distribution(self, prompt, generated):
        step = len(generated)
        if step < len(self.script):
            token = self.script[step]
        elif self.cycle and self.script:
            token = self.script[step % len(self.script)]
        else:
            token = self.after
        return TokenDistribution(entries=[(token, 1.0)], kind="probs")


def words_as_tokens(text):
    """Split text into word tokens that concatenate back to the original:
    every word after the first carries its leading space."""
    words = text.split(" ")
    return [w if i == 0 else " " + w for i, w in enumerate(words)]


def echo_backend(text, stop="\n"):
    """Backend that reproduces `text` verbatim and then stops, whatever the
    prompt says. Used to pin down harness behavior."""
    return ScriptedBackend(words_as_tokens(text), after=stop)


def _unit_hash(*parts):
    digest = hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


class HashMockBackend:
    """Offline stand-in for a finetuned model: emits question-shaped text
    built from words lifted out of the prompt.

    Logits are a pure function of (prompt, step, token), so runs are fully
    deterministic and safe to parallelize. The newline weight grows with
    the step count so sessions usually terminate on their own.
    """

    sampling_locus = "CLIENT"
    _STARTERS = ("What", "Which", "Who", "Where", "When", "How")
    _MAX_PROMPT_WORDS = 24

    def __init__(self, never_stop=False):
        self.never_stop = never_stop
        self.descriptor = BackendDescriptor(kind="MOCK")

    def next_distribution(self, prompt, generated):
        step = len(generated)
        candidates = {}
        if step == 0:
            for word in self._STARTERS:
                candidates[word] = 3.0
        else:
            seen = []
            for word in prompt.split():
                if word not in seen and word.isalnum():
                    seen.append(word)
                if len(seen) >= self._MAX_PROMPT_WORDS:
                    break
            for word in seen:
                candidates.setdefault(" " + word, 0.0)
            if not self.never_stop:
                candidates["?"] = 0.15 * step
                candidates["\n"] = 0.35 * step
        entries = [
            (tok, base + 4.0 * _unit_hash(prompt, str(step), tok))
            for tok, base in sorted(candidates.items())
        ]
        return TokenDistribution(entries=entries, kind="logits")


class HttpBackend:
    """Client for the /v1/generate wire protocol. Transport failures are
    retried with exponential backoff; protocol violations are not."""

    sampling_locus = "SERVER"

    def __init__(self, endpoint, timeout=60.0,
                 retry_attempts=DEFAULT_RETRY_ATTEMPTS,
                 retry_backoff=DEFAULT_RETRY_BACKOFF,
                 session=None):
        self.url = endpoint.rstrip("/")
        if not self.url.endswith(GENERATE_PATH):
            self.url += GENERATE_PATH
        self.timeout = timeout
        self.retry_attempts = retry_attempts
        self.retry_backoff = retry_backoff
        self.session = session or requests.Session()
        self.descriptor = BackendDescriptor(
            kind="HTTP", endpoint=endpoint, sampling_locus="SERVER")

    def complete(self, prompt, params, paragraph_id=""):
        body = {
            "prompt": prompt,
            "temperature": params.temperature,
            "top_p": params.top_p,
            "max_new_tokens": params.max_new_tokens,
            "stop": [params.stop_text],
            "seed": params.rng_seed,
        }
        reply = self._post_with_retries(body)
        return self._parse_reply(reply, params, paragraph_id)

    def _post_with_retries(self, body):
        last_error = None
        for attempt in range(1, self.retry_attempts + 1):
            try:
                response = self.session.post(self.url, json=body,
                                             timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
            else:
                if response.status_code >= 500:
                    last_error = RuntimeError(
                        f"server error {response.status_code}")
                elif response.status_code >= 400:
                    raise BackendProtocolError(
                        f"request rejected ({response.status_code}): "
                        f"{_error_text(response)}")
                else:
                    return response
            if attempt < self.retry_attempts:
                time.sleep(self.retry_backoff * 2 ** (attempt - 1))
        raise BackendTransportError(
            f"backend unreachable after {self.retry_attempts} attempts: "
            f"{last_error}", attempts=self.retry_attempts)

    def _parse_reply(self, response, params, paragraph_id):
        try:
            doc = response.json()
        except ValueError as exc:
            raise BackendProtocolError(f"reply is not JSON: {exc}") from exc
        completion = doc.get("completion")
        tokens = doc.get("tokens")
        finish = doc.get("finish_reason")
        if not isinstance(completion, str) or not isinstance(tokens, list) \
                or any(not isinstance(t, str) for t in tokens):
            raise BackendProtocolError(f"malformed reply fields: {doc}")
        if finish == "stop":
            reason = FinishReason.STOP_SEQUENCE
        elif finish == "length":
            reason = FinishReason.LENGTH_CAP
        else:
            raise BackendProtocolError(f"unknown finish_reason {finish!r}")
        if params.stop_text and params.stop_text in completion:
            completion = completion.split(params.stop_text, 1)[0]
        return GeneratedQuestion(
            text=completion.strip(),
            finish_reason=reason,
            tokens_emitted=len(tokens),
            paragraph_id=paragraph_id,
            raw_tokens=list(tokens),
        )


def _error_text(response):
    try:
        return response.json().get("error", response.text[:200])
    except ValueError:
        return response.text[:200]
