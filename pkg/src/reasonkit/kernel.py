"""Composite rewards, group-relative advantages, and length attenuation.

Rollouts are scored against their siblings for the same prompt: a quality
term compares evidence for the gold answer with and without the reasoning
trace, rewards are normalized within the group, and a soft length window
attenuates the result. Every step is pure arithmetic on plain records so
training loops can consume it without pulling in the generation stack.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, replace
from statistics import fmean, pstdev

DEFAULT_EPSILON = 1e-6
DEFAULT_TAU = 8.0
DEFAULT_MIN_BUCKET_SAMPLES = 20
PERCENTILE_LOW = 5
PERCENTILE_HIGH = 95


@dataclass(frozen=True)
class Rollout:
    """One sampled response with the measurements the kernel needs.

    length is the full response token count; l_cot and l_nocot are the mean
    gold-answer log-probabilities with and without the reasoning trace in
    context.
    """

    prompt_id: str
    bucket: str | int
    length: int
    r_task: float
    l_cot: float
    l_nocot: float
    correct: bool
    format_ok: bool = True

    def to_record(self) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "bucket": self.bucket,
            "length": self.length,
            "r_task": self.r_task,
            "l_cot": self.l_cot,
            "l_nocot": self.l_nocot,
            "correct": self.correct,
            "format_ok": self.format_ok,
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "Rollout":
        # l_cot/l_nocot may be absent in histories recorded without
        # teacher-forced scoring; zero margin means zero quality reward,
        # so omission and "no signal" coincide
        return cls(
            prompt_id=str(record["prompt_id"]),
            bucket=record["bucket"],
            length=int(record["length"]),
            r_task=float(record["r_task"]),
            l_cot=float(record.get("l_cot", 0.0)),
            l_nocot=float(record.get("l_nocot", 0.0)),
            correct=bool(record["correct"]),
            format_ok=bool(record.get("format_ok", True)),
        )


@dataclass(frozen=True)
class KernelConfig:
    """Tunable constants for advantage computation.

    tau is the soft-window temperature (values between 5 and 10 behave
    sensibly; the default is 8). length_definition is carried as metadata so
    downstream consumers know what the length field was measured in.
    """

    lambda_q: float = 1.0
    tau: float = DEFAULT_TAU
    epsilon: float = DEFAULT_EPSILON
    skip_uniform_groups: bool = False
    min_bucket_samples: int = DEFAULT_MIN_BUCKET_SAMPLES
    length_definition: str = "response_tokens"

    def __post_init__(self) -> None:
        if self.lambda_q < 0:
            raise ValueError("lambda_q must be non-negative")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.min_bucket_samples < 1:
            raise ValueError("min_bucket_samples must be at least 1")

    def to_record(self) -> dict:
        return {
            "lambda_q": self.lambda_q,
            "tau": self.tau,
            "epsilon": self.epsilon,
            "skip_uniform_groups": self.skip_uniform_groups,
            "min_bucket_samples": self.min_bucket_samples,
            "length_definition": self.length_definition,
        }


def reasoning_quality_reward(l_cot: float, l_nocot: float) -> float:
    """Bounded gain in gold-answer evidence attributable to the trace.

    tanh keeps the value in (-1, 1) no matter how large the log-probability
    gap gets, so one extreme sample cannot dominate the composite reward.
    """

    if not (math.isfinite(l_cot) and math.isfinite(l_nocot)):
        raise ValueError("log-probabilities must be finite")
    return math.tanh(l_cot - l_nocot)


def composite_reward(r_task: float, quality: float, lambda_q: float) -> float:
    return r_task + lambda_q * quality


def group_advantages(rewards: Sequence[float],
                     epsilon: float = DEFAULT_EPSILON) -> list[float]:
    """Normalize rewards against the group mean and population deviation.

    The epsilon in the denominator keeps zero-variance groups finite: they
    come out as exact zeros.
    """

    if not rewards:
        raise ValueError("rewards must be non-empty")
    mean = fmean(rewards)
    sigma = pstdev(rewards)
    return [(r - mean) / (sigma + epsilon) for r in rewards]


@dataclass(frozen=True)
class LengthBounds:
    """Soft length window for one bucket.

    step records which estimation round produced the numbers; carried marks
    a bucket that reused the previous round because this one was
    under-sampled. disabled means no attenuation is applied at all.
    """

    bucket: str | int
    l_min: float
    l_max: float
    n: int
    step: int = 0
    disabled: bool = False
    carried: bool = False

    def to_record(self) -> dict:
        return {
            "bucket": self.bucket,
            "l_min": self.l_min,
            "l_max": self.l_max,
            "n": self.n,
            "step": self.step,
            "disabled": self.disabled,
            "carried": self.carried,
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "LengthBounds":
        return cls(
            bucket=record["bucket"],
            l_min=float(record["l_min"]),
            l_max=float(record["l_max"]),
            n=int(record["n"]),
            step=int(record.get("step", 0)),
            disabled=bool(record.get("disabled", False)),
            carried=bool(record.get("carried", False)),
        )


def nearest_rank(sorted_values: Sequence[float], percentile: float) -> float:
    """1-based nearest-rank percentile over pre-sorted values."""

    if not sorted_values:
        raise ValueError("no values")
    rank = max(1, math.ceil(percentile / 100 * len(sorted_values)))
    return sorted_values[min(rank, len(sorted_values)) - 1]


def estimate_bounds(
    rollouts: Iterable[Rollout],
    min_samples: int = DEFAULT_MIN_BUCKET_SAMPLES,
    previous: Mapping[object, LengthBounds] | None = None,
    step: int = 0,
) -> dict[object, LengthBounds]:
    """Per-bucket length windows from the well-formed correct rollouts.

    Buckets with fewer than min_samples qualifying rollouts carry the
    previous round's window forward when one exists and are otherwise
    disabled, so early training steps never clip on noise.
    """

    lengths: dict[object, list[int]] = {}
    for rollout in rollouts:
        lengths.setdefault(rollout.bucket, [])
        if rollout.correct and rollout.format_ok:
            lengths[rollout.bucket].append(rollout.length)

    table: dict[object, LengthBounds] = {}
    buckets = set(lengths)
    if previous:
        buckets |= set(previous)
    for bucket in buckets:
        values = sorted(lengths.get(bucket, []))
        if len(values) >= min_samples:
            table[bucket] = LengthBounds(
                bucket=bucket,
                l_min=float(nearest_rank(values, PERCENTILE_LOW)),
                l_max=float(nearest_rank(values, PERCENTILE_HIGH)),
                n=len(values),
                step=step,
            )
        elif previous and bucket in previous:
            table[bucket] = replace(previous[bucket], carried=True)
        else:
            table[bucket] = LengthBounds(bucket=bucket, l_min=0.0, l_max=math.inf,
                                         n=len(values), step=step, disabled=True)
    return table


def length_attenuation(length: float, bounds: LengthBounds | None,
                       tau: float = DEFAULT_TAU) -> float:
    """Multiplier in (0, 1] that decays outside the bucket's length window.

    Inside the window (or with no usable window) the multiplier is exactly
    1; outside it decays exponentially in the overshoot with temperature
    tau.
    """

    if bounds is None or bounds.disabled:
        return 1.0
    overshoot = max(0.0, bounds.l_min - length, length - bounds.l_max)
    if overshoot == 0.0:
        return 1.0
    return math.exp(-overshoot / tau)


@dataclass(frozen=True)
class AdvantageResult:
    """Per-rollout outputs of one group's advantage computation."""

    prompt_id: str
    member_idx: int
    r_q: float
    r: float
    a_tilde: float
    g: float
    a_hat: float
    skipped: bool

    def to_record(self) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "member_idx": self.member_idx,
            "r_q": self.r_q,
            "r": self.r,
            "a_tilde": self.a_tilde,
            "g": self.g,
            "a_hat": self.a_hat,
            "skipped": self.skipped,
        }


def compute_advantages(
    group: Sequence[Rollout],
    bounds: Mapping[object, LengthBounds] | None = None,
    config: KernelConfig = KernelConfig(),
) -> list[AdvantageResult]:
    """Advantages for all rollouts of one prompt group.

    With lambda_q = 0 and no applicable bounds this reduces exactly to
    plain group normalization of the task rewards: the quality term adds
    0.0 and the attenuation multiplies by 1.0, neither of which perturbs
    IEEE doubles.
    """

    if not group:
        raise ValueError("group must be non-empty")
    prompt_ids = {r.prompt_id for r in group}
    if len(prompt_ids) != 1:
        raise ValueError(f"group mixes prompts: {sorted(prompt_ids)}")

    quality = [reasoning_quality_reward(r.l_cot, r.l_nocot) for r in group]
    composite = [composite_reward(r.r_task, q, config.lambda_q)
                 for r, q in zip(group, quality)]

    skipped = (config.skip_uniform_groups
               and len({r.correct for r in group}) == 1)
    a_tilde = group_advantages(composite, config.epsilon)

    results = []
    for idx, rollout in enumerate(group):
        bucket_bounds = bounds.get(rollout.bucket) if bounds else None
        g = length_attenuation(rollout.length, bucket_bounds, config.tau)
        a_hat = 0.0 if skipped else g * a_tilde[idx]
        results.append(AdvantageResult(
            prompt_id=rollout.prompt_id,
            member_idx=idx,
            r_q=quality[idx],
            r=composite[idx],
            a_tilde=a_tilde[idx],
            g=g,
            a_hat=a_hat,
            skipped=skipped,
        ))
    return results


def group_rollouts(rollouts: Iterable[Rollout]) -> dict[str, list[Rollout]]:
    """Bucket rollouts by prompt_id, preserving encounter order."""

    groups: dict[str, list[Rollout]] = {}
    for rollout in rollouts:
        groups.setdefault(rollout.prompt_id, []).append(rollout)
    return groups
