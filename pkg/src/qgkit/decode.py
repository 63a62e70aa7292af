"""Constrained sampling: temperature scaling, top-p nucleus filtering,
seeded sampling, and the generation loop with its two stopping conditions.

Sampling runs client-side against backends that expose per-step token
distributions (the mock family); HTTP backends sample server-side with the
parameters forwarded verbatim, because streaming per-step logits over the
wire would be prohibitively chatty.
"""

import hashlib
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import ConfigError

DEFAULT_TEMPERATURE = 0.6
DEFAULT_TOP_P = 0.9
DEFAULT_MAX_NEW_TOKENS = 32
DEFAULT_STOP_TEXT = "\n"

_MASS_TOLERANCE = 1e-9


class FinishReason(str, Enum):
    STOP_SEQUENCE = "STOP_SEQUENCE"
    LENGTH_CAP = "LENGTH_CAP"


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = DEFAULT_TEMPERATURE
    top_p: float = DEFAULT_TOP_P
    max_new_tokens: int = DEFAULT_MAX_NEW_TOKENS
    stop_text: str = DEFAULT_STOP_TEXT
    rng_seed: int = 0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ConfigError(f"temperature must be > 0, got {self.temperature}")
        if not 0 < self.top_p <= 1:
            raise ConfigError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.max_new_tokens < 1:
            raise ConfigError(
                f"max_new_tokens must be >= 1, got {self.max_new_tokens}")

    def with_seed(self, seed: int) -> "GenerationParams":
        return replace(self, rng_seed=seed)

    def as_dict(self):
        return {"temperature": self.temperature, "top_p": self.top_p,
                "max_new_tokens": self.max_new_tokens,
                "stop_text": self.stop_text, "rng_seed": self.rng_seed}


@dataclass
class TokenDistribution:
    """Per-step token weights, tagged as raw logits or probabilities."""

    entries: list[tuple[str, float]]
    kind: str = "probs"  # "logits" or "probs"

    def __post_init__(self):
        if self.kind not in ("logits", "probs"):
            raise ConfigError(f"unknown distribution kind {self.kind!r}")
        tokens = [t for t, _ in self.entries]
        if len(set(tokens)) != len(tokens):
            raise ConfigError("token texts in a distribution must be unique")
        if self.kind == "probs":
            if any(w < 0 for _, w in self.entries):
                raise ConfigError("probabilities must be non-negative")
            mass = sum(w for _, w in self.entries)
            if self.entries and abs(mass - 1.0) > _MASS_TOLERANCE:
                raise ConfigError(f"probabilities sum to {mass}, expected 1")
        else:
            if any(not math.isfinite(w) for _, w in self.entries):
                raise ConfigError("logits must be finite")


def apply_temperature(dist: TokenDistribution, temperature: float) -> TokenDistribution:
    """Softmax of logit/temperature. Order-preserving: the argmax token is
    the argmax for every temperature."""
    if temperature <= 0:
        raise ConfigError(f"temperature must be > 0, got {temperature}")
    if dist.kind != "logits":
        raise ConfigError("apply_temperature expects a logits distribution")
    if not dist.entries:
        return TokenDistribution(entries=[], kind="probs")
    scaled = [(tok, w / temperature) for tok, w in dist.entries]
    peak = max(w for _, w in scaled)
    exps = [(tok, math.exp(w - peak)) for tok, w in scaled]
    total = sum(w for _, w in exps)
    return TokenDistribution(
        entries=[(tok, w / total) for tok, w in exps], kind="probs")


def nucleus_filter(dist: TokenDistribution, top_p: float) -> TokenDistribution:
    """Keep the smallest probability-descending prefix with cumulative mass
    >= top_p, renormalized. Ties at equal probability break by token text
    ascending so the kept set is deterministic."""
    if not 0 < top_p <= 1:
        raise ConfigError(f"top_p must be in (0, 1], got {top_p}")
    if dist.kind != "probs":
        raise ConfigError("nucleus_filter expects a probability distribution")
    ordered = sorted(dist.entries, key=lambda e: (-e[1], e[0]))
    kept = []
    cumulative = 0.0
    for tok, p in ordered:
        kept.append((tok, p))
        cumulative += p
        if cumulative >= top_p - _MASS_TOLERANCE:
            break
    total = sum(p for _, p in kept)
    return TokenDistribution(
        entries=[(tok, p / total) for tok, p in kept], kind="probs")


def sample_token(dist: TokenDistribution, rng: random.Random) -> str:
    """Draw one token with probability equal to its weight."""
    if dist.kind != "probs":
        raise ConfigError("sample_token expects a probability distribution")
    if not dist.entries:
        raise ConfigError("cannot sample from an empty distribution")
    r = rng.random()
    cumulative = 0.0
    for tok, p in dist.entries:
        cumulative += p
        if r < cumulative:
            return tok
    return dist.entries[-1][0]  # guard against rounding shortfall


def session_seed(base_seed: int, session_key: str) -> int:
    """Stable per-session seed: base seed XORed with a digest of the
    session key, so concurrent sessions never share RNG state and output
    is independent of scheduling order."""
    digest = hashlib.sha256(session_key.encode("utf-8")).digest()
    return base_seed ^ int.from_bytes(digest[:8], "big")


@dataclass
class GeneratedQuestion:
    text: str
    finish_reason: FinishReason
    tokens_emitted: int
    paragraph_id: str = ""
    raw_tokens: list[str] = field(default_factory=list)


def generate_question(backend, context_prompt: str, params: GenerationParams,
                      paragraph_id: str = "") -> GeneratedQuestion:
    """Run one generation session against a backend.

    Client-locus backends are stepped token by token: temperature, then
    nucleus filter, then a seeded draw. Generation stops when the backend
    emits the stop text (excluded from the output) or at the token cap.
    Server-locus backends receive the parameters and the session seed and
    return a finished completion.
    """
    if getattr(backend, "sampling_locus", "CLIENT") == "SERVER":
        return backend.complete(context_prompt, params, paragraph_id=paragraph_id)

    rng = random.Random(params.rng_seed)
    generated: list[str] = []
    pieces: list[str] = []
    finish = None
    while len(generated) < params.max_new_tokens:
        dist = backend.next_distribution(context_prompt, tuple(generated))
        if dist.kind == "logits":
            dist = apply_temperature(dist, params.temperature)
        dist = nucleus_filter(dist, params.top_p)
        token = sample_token(dist, rng)
        if token == params.stop_text:
            finish = FinishReason.STOP_SEQUENCE
            break
        if params.stop_text and params.stop_text in token:
            # Token carries text past the stop marker; keep only the prefix.
            pieces.append(token.split(params.stop_text, 1)[0])
            generated.append(token)
            finish = FinishReason.STOP_SEQUENCE
            break
        generated.append(token)
        pieces.append(token)
    if finish is None:
        finish = FinishReason.LENGTH_CAP
    return GeneratedQuestion(
        text="".join(pieces).strip(),
        finish_reason=finish,
        tokens_emitted=len(generated),
        paragraph_id=paragraph_id,
        raw_tokens=generated,
    )
