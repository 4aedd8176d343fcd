"""Teacher-forced gold scoring, confidence analysis, and scoring clients.

The quality reward needs the mean log-probability of the canonical gold
answer under two contexts: the full reasoning trace and the bare question.
This module builds those two texts from a response, scores them through a
pluggable scorer (a deterministic mock or an HTTP service), and aggregates
per-sample deltas into answer-flip buckets.
"""

from __future__ import annotations

import hashlib
import math
import re
import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from statistics import fmean
from typing import Protocol

import requests

from .dataset import Instance
from .grading import grade_response
from .surface import canonical_answer_list, render_prompt

TokenScore = tuple[str, float]


class Scorer(Protocol):
    def score_continuation(self, context: str,
                           continuation: str) -> list[TokenScore]:
        """Tokenize the continuation and return (token, logprob) pairs.

        The concatenated tokens must equal the continuation exactly and
        every logprob must be <= 0.
        """


_CHUNKS = re.compile(r"\s+|\S+")


class MockScorer:
    """Deterministic stand-in scorer for tests and offline runs.

    Base log-probabilities come from a hash of the local context and token,
    mapped into [-3, -1). When a marker substring occurs in the context its
    bonus shrinks the magnitude (dividing by one plus the total bonus), so
    contexts that contain configured markers score strictly higher while
    staying negative.
    """

    def __init__(self, marker_bonuses: Mapping[str, float] | None = None):
        self.marker_bonuses = dict(marker_bonuses or {})
        for marker, bonus in self.marker_bonuses.items():
            if bonus < 0:
                raise ValueError(f"bonus for {marker!r} must be non-negative")

    def _base(self, context_tail: str, token: str) -> float:
        digest = hashlib.sha256(
            f"{context_tail}\x1f{token}".encode("utf-8")).digest()
        unit = int.from_bytes(digest[:4], "big") / 2 ** 32
        return -3.0 + 2.0 * unit

    def score_continuation(self, context: str,
                           continuation: str) -> list[TokenScore]:
        bonus = sum(b for marker, b in self.marker_bonuses.items()
                    if marker in context)
        scale = 1.0 + bonus
        out: list[TokenScore] = []
        tail = context[-32:]
        for token in _CHUNKS.findall(continuation):
            lp = self._base(tail, token) / scale
            out.append((token, lp))
            tail = (tail + token)[-32:]
        return out


def mean_gold_logprob(scorer: Scorer, context: str, continuation: str) -> float:
    """Arithmetic mean of per-token logprobs for a continuation."""

    scored = scorer.score_continuation(context, continuation)
    if not scored:
        raise ValueError("empty continuation")
    if "".join(tok for tok, _ in scored) != continuation:
        raise ContractViolationError("scorer tokens do not join to continuation")
    if any(lp > 0 for _, lp in scored):
        raise ContractViolationError("scorer returned a positive logprob")
    return fmean(lp for _, lp in scored)


@dataclass(frozen=True)
class TeacherForcedPair:
    """Two contexts that should be followed by the identical gold answer."""

    cot_context: str
    nocot_context: str
    gold_text: str
    fallback_used: bool


_ANSWER_TAG = re.compile(r"<answer>", re.IGNORECASE)
_THINK_CLOSE = re.compile(r"</think>", re.IGNORECASE)


def build_teacher_forced_pair(instance: Instance,
                              cot_response: str) -> TeacherForcedPair:
    """Assemble the with-trace and without-trace gold scoring contexts.

    The with-trace context keeps the model's own reasoning and re-anchors
    at its final answer tag, so the gold list is scored where the model
    committed to an answer. Responses that never opened an answer block get
    a synthetic anchor after their reasoning (flagged as fallback).
    """

    questions = [q.text for q in instance.questions]
    gold_text = canonical_answer_list(instance.gold_labels())

    cot_prompt = render_prompt(instance.paragraph, questions, mode="cot").text
    tag = None
    for tag in _ANSWER_TAG.finditer(cot_response):
        pass
    fallback = tag is None
    if tag is not None:
        cot_context = cot_prompt + cot_response[:tag.end()] + " "
    else:
        close = None
        for close in _THINK_CLOSE.finditer(cot_response):
            pass
        if close is not None:
            cot_context = (cot_prompt + cot_response[:close.end()]
                           + "\n<answer> ")
        else:
            cot_context = cot_prompt + cot_response + " </think>\n<answer> "

    nocot_prompt = render_prompt(instance.paragraph, questions, mode="nocot").text
    nocot_context = nocot_prompt + " "

    return TeacherForcedPair(cot_context=cot_context,
                             nocot_context=nocot_context,
                             gold_text=gold_text,
                             fallback_used=fallback)


def bucket_name(nocot_correct: bool, cot_correct: bool) -> str:
    """Two-letter flip bucket, no-trace outcome first: W wrong, R right."""

    return (("R" if nocot_correct else "W")
            + ("R" if cot_correct else "W"))


BUCKET_NAMES = ("WR", "RR", "WW", "RW")


@dataclass(frozen=True)
class ConfidenceRecord:
    """One sample's gold-evidence shift between the two contexts."""

    instance_id: str
    nocot_correct: bool
    cot_correct: bool
    bucket: str
    l_cot: float
    l_nocot: float
    delta: float
    r_q: float
    fallback_used: bool

    def to_record(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "nocot_correct": self.nocot_correct,
            "cot_correct": self.cot_correct,
            "bucket": self.bucket,
            "l_cot": self.l_cot,
            "l_nocot": self.l_nocot,
            "delta": self.delta,
            "r_q": self.r_q,
            "fallback_used": self.fallback_used,
        }


@dataclass(frozen=True)
class BucketStats:
    n: int
    mean_delta: float
    mean_r_q: float

    def to_record(self) -> dict:
        return {"n": self.n, "mean_delta": self.mean_delta,
                "mean_r_q": self.mean_r_q}


@dataclass
class ConfidenceAnalysis:
    records: list[ConfidenceRecord] = field(default_factory=list)
    buckets: dict[str, BucketStats] = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "samples": len(self.records),
            "buckets": {name: stats.to_record()
                        for name, stats in self.buckets.items()},
        }


def confidence_analysis(
    scorer: Scorer,
    samples: Sequence[tuple[Instance, str, str]],
) -> ConfidenceAnalysis:
    """Score (instance, cot_response, nocot_response) triples into buckets.

    A sample counts as correct under a mode only if its parsed labels match
    the gold list exactly. Every sample lands in exactly one of the four
    flip buckets, so the bucket sizes partition the sample count.
    """

    analysis = ConfidenceAnalysis()
    for instance, cot_response, nocot_response in samples:
        cot_correct = all(
            r.correct for r in grade_response(instance, cot_response,
                                              mode="cot").records)
        nocot_correct = all(
            r.correct for r in grade_response(instance, nocot_response,
                                              mode="nocot").records)
        pair = build_teacher_forced_pair(instance, cot_response)
        l_cot = mean_gold_logprob(scorer, pair.cot_context, pair.gold_text)
        l_nocot = mean_gold_logprob(scorer, pair.nocot_context, pair.gold_text)
        delta = l_cot - l_nocot
        analysis.records.append(ConfidenceRecord(
            instance_id=instance.instance_id,
            nocot_correct=nocot_correct,
            cot_correct=cot_correct,
            bucket=bucket_name(nocot_correct, cot_correct),
            l_cot=l_cot,
            l_nocot=l_nocot,
            delta=delta,
            r_q=math.tanh(delta),
            fallback_used=pair.fallback_used,
        ))

    for name in BUCKET_NAMES:
        members = [r for r in analysis.records if r.bucket == name]
        if members:
            analysis.buckets[name] = BucketStats(
                n=len(members),
                mean_delta=fmean(r.delta for r in members),
                mean_r_q=fmean(r.r_q for r in members),
            )
    return analysis


class TransportError(RuntimeError):
    """The scoring service could not be reached or answered unusably."""

    def __init__(self, kind: str, attempts: int, detail: str = ""):
        self.kind = kind
        self.attempts = attempts
        super().__init__(
            f"transport failure ({kind}) after {attempts} attempt(s)"
            + (f": {detail}" if detail else ""))


class ContractViolationError(ValueError):
    """The service answered, but the payload breaks the scoring contract."""


_RETRY_STATUSES = frozenset({500, 502, 503, 504})


def _post_json(session: requests.Session, url: str, payload: Mapping,
               timeout: float, max_retries: int, backoff: float) -> dict:
    """POST with bounded exponential-backoff retries on transient failures.

    Retries cover timeouts, connection errors, and 5xx statuses; other
    statuses and malformed bodies fail immediately with the attempt count.
    """

    attempts = 0
    while True:
        attempts += 1
        kind = None
        detail = ""
        try:
            response = session.post(url, json=payload, timeout=timeout)
        except requests.Timeout:
            kind, detail = "timeout", url
        except requests.ConnectionError as exc:
            kind, detail = "connect", str(exc)
        else:
            if response.status_code == 200:
                try:
                    body = response.json()
                except ValueError:
                    raise TransportError("malformed", attempts,
                                         "response body is not JSON") from None
                if not isinstance(body, dict):
                    raise TransportError("malformed", attempts,
                                         "response body is not an object")
                return body
            kind = "status"
            detail = f"{url} -> HTTP {response.status_code}"
            if response.status_code not in _RETRY_STATUSES:
                raise TransportError(kind, attempts, detail)
        if attempts > max_retries:
            raise TransportError(kind, attempts, detail)
        if backoff > 0:
            time.sleep(backoff * (2 ** (attempts - 1)))


class HttpScorerClient:
    """Scorer backed by a POST /v1/score endpoint.

    The service receives {"context", "continuation"} and must answer
    {"tokens": [...], "logprobs": [...]} satisfying the Scorer contract;
    violations raise instead of being papered over.
    """

    def __init__(self, base_url: str, timeout: float = 30.0,
                 max_retries: int = 3, backoff: float = 0.5,
                 session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.session = session or requests.Session()

    def score_continuation(self, context: str,
                           continuation: str) -> list[TokenScore]:
        body = _post_json(
            self.session, f"{self.base_url}/v1/score",
            {"context": context, "continuation": continuation},
            self.timeout, self.max_retries, self.backoff)
        tokens = body.get("tokens")
        logprobs = body.get("logprobs")
        if (not isinstance(tokens, list) or not isinstance(logprobs, list)
                or len(tokens) != len(logprobs)):
            raise ContractViolationError(
                "expected parallel 'tokens' and 'logprobs' lists")
        if "".join(tokens) != continuation:
            raise ContractViolationError(
                "returned tokens do not concatenate to the continuation")
        scored = []
        for token, lp in zip(tokens, logprobs):
            lp = float(lp)
            if lp > 0:
                raise ContractViolationError(f"positive logprob {lp} for "
                                             f"token {token!r}")
            scored.append((str(token), lp))
        return scored


class CompletionClient:
    """Minimal text-completion client for driving evaluations.

    Two wire profiles: "simple" posts {"prompt"} to /v1/complete and reads
    {"text"}; "openai" posts {"model", "prompt", "max_tokens"} to
    /v1/completions and reads choices[0].text.
    """

    def __init__(self, base_url: str, profile: str = "simple",
                 model: str = "default", max_tokens: int = 2048,
                 timeout: float = 60.0, max_retries: int = 3,
                 backoff: float = 0.5,
                 session: requests.Session | None = None):
        if profile not in ("simple", "openai"):
            raise ValueError(f"unknown profile {profile!r}")
        self.base_url = base_url.rstrip("/")
        self.profile = profile
        self.model = model
        self.max_tokens = max_tokens
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.session = session or requests.Session()

    def complete(self, prompt: str) -> str:
        if self.profile == "simple":
            body = _post_json(self.session, f"{self.base_url}/v1/complete",
                              {"prompt": prompt}, self.timeout,
                              self.max_retries, self.backoff)
            text = body.get("text")
            if not isinstance(text, str):
                raise ContractViolationError("expected a 'text' string")
            return text
        body = _post_json(self.session, f"{self.base_url}/v1/completions",
                          {"model": self.model, "prompt": prompt,
                           "max_tokens": self.max_tokens},
                          self.timeout, self.max_retries, self.backoff)
        choices = body.get("choices")
        if (not isinstance(choices, list) or not choices
                or not isinstance(choices[0], dict)
                or not isinstance(choices[0].get("text"), str)):
            raise ContractViolationError("expected choices[0].text")
        return choices[0]["text"]
