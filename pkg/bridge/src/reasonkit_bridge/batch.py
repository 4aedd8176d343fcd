"""Array-facing wrappers over the reasonkit reward kernel.

Everything here is a stateless adapter: inputs are converted to the core
objects, the core functions do the arithmetic, and the results come back
as NumPy arrays. No numeric logic is duplicated on this side of the
boundary, so bridge outputs are bitwise products of the core kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from reasonkit import (
    DatasetPlan,
    FactPool,
    KernelConfig,
    LengthBounds,
    PlanRow,
    Rollout,
    TemplatePool,
    Verdict,
    compute_advantages,
    estimate_bounds,
    generate_dataset,
    group_rollouts,
    parse_response,
    task_reward,
)

DEFAULT_LAMBDA_Q = 1.0
DEFAULT_TAU = 8.0
DEFAULT_EPSILON = 1e-6


class BridgeShapeError(ValueError):
    """Batch arrays disagree on shape or group structure."""


def _as_float(name: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise BridgeShapeError(f"{name} must be one-dimensional, "
                               f"got shape {arr.shape}")
    return arr


def _as_bool(name: str, values, n: int | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=bool)
    if arr.ndim != 1:
        raise BridgeShapeError(f"{name} must be one-dimensional, "
                               f"got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise BridgeShapeError(f"{name} has {arr.shape[0]} entries, "
                               f"expected {n}")
    return arr


def _py_bucket(value):
    item = value.item() if hasattr(value, "item") else value
    return item if isinstance(item, int) else str(item)


@dataclass
class BridgeBatch:
    """Contiguous-group batch of rollouts plus the kernel scalars.

    Member i of the flat arrays belongs to the group whose slice covers i;
    group_sizes gives the contiguous slice lengths in order and prompt_ids
    names one prompt per group.
    """

    r_task: np.ndarray
    l_cot: np.ndarray
    l_nocot: np.ndarray
    lengths: np.ndarray
    bucket_ids: np.ndarray
    correct: np.ndarray
    group_sizes: np.ndarray
    prompt_ids: tuple[str, ...] = ()
    format_ok: np.ndarray | None = None
    lambda_q: float = DEFAULT_LAMBDA_Q
    tau: float = DEFAULT_TAU
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        self.r_task = _as_float("r_task", self.r_task)
        n = self.r_task.shape[0]
        self.l_cot = _as_float("l_cot", self.l_cot)
        self.l_nocot = _as_float("l_nocot", self.l_nocot)
        self.lengths = _as_float("lengths", self.lengths)
        for name in ("l_cot", "l_nocot", "lengths"):
            arr = getattr(self, name)
            if arr.shape[0] != n:
                raise BridgeShapeError(f"{name} has {arr.shape[0]} entries, "
                                       f"expected {n}")
        self.bucket_ids = np.asarray(self.bucket_ids)
        if self.bucket_ids.ndim != 1 or self.bucket_ids.shape[0] != n:
            raise BridgeShapeError(
                f"bucket_ids has shape {self.bucket_ids.shape}, "
                f"expected ({n},)")
        self.correct = _as_bool("correct", self.correct, n)
        if self.format_ok is None:
            self.format_ok = np.ones(n, dtype=bool)
        else:
            self.format_ok = _as_bool("format_ok", self.format_ok, n)

        self.group_sizes = np.asarray(self.group_sizes, dtype=np.int64)
        if self.group_sizes.ndim != 1:
            raise BridgeShapeError("group_sizes must be one-dimensional")
        if self.group_sizes.size and int(self.group_sizes.min()) < 1:
            raise BridgeShapeError("group_sizes entries must be positive")
        if int(self.group_sizes.sum()) != n:
            raise BridgeShapeError(
                f"group_sizes sum to {int(self.group_sizes.sum())}, "
                f"but arrays hold {n} members")
        if not self.prompt_ids:
            self.prompt_ids = tuple(f"g{i:04d}"
                                    for i in range(self.group_sizes.shape[0]))
        if len(self.prompt_ids) != self.group_sizes.shape[0]:
            raise BridgeShapeError(
                f"{len(self.prompt_ids)} prompt_ids for "
                f"{self.group_sizes.shape[0]} groups")

    @property
    def n(self) -> int:
        return self.r_task.shape[0]

    @property
    def num_groups(self) -> int:
        return self.group_sizes.shape[0]

    def group_slices(self) -> Iterable[tuple[str, slice]]:
        start = 0
        for gid, size in zip(self.prompt_ids, self.group_sizes):
            yield gid, slice(start, start + int(size))
            start += int(size)

    def config(self, skip_uniform_groups: bool = False) -> KernelConfig:
        return KernelConfig(lambda_q=self.lambda_q, tau=self.tau,
                            epsilon=self.epsilon,
                            skip_uniform_groups=skip_uniform_groups)

    @classmethod
    def from_rollouts(cls, rollouts: Sequence[Rollout],
                      lambda_q: float = DEFAULT_LAMBDA_Q,
                      tau: float = DEFAULT_TAU,
                      epsilon: float = DEFAULT_EPSILON) -> "BridgeBatch":
        """Pack core rollouts into contiguous-group arrays."""

        groups = group_rollouts(rollouts)
        ordered = [r for members in groups.values() for r in members]
        return cls(
            r_task=[r.r_task for r in ordered],
            l_cot=[r.l_cot for r in ordered],
            l_nocot=[r.l_nocot for r in ordered],
            lengths=[r.length for r in ordered],
            bucket_ids=np.asarray([r.bucket for r in ordered]),
            correct=[r.correct for r in ordered],
            format_ok=[r.format_ok for r in ordered],
            group_sizes=[len(members) for members in groups.values()],
            prompt_ids=tuple(groups.keys()),
            lambda_q=lambda_q, tau=tau, epsilon=epsilon,
        )

    def to_rollouts(self) -> list[Rollout]:
        """Rebuild the core rollout objects, group by group."""

        out = []
        for gid, span in self.group_slices():
            for i in range(span.start, span.stop):
                out.append(Rollout(
                    prompt_id=gid,
                    bucket=_py_bucket(self.bucket_ids[i]),
                    length=float(self.lengths[i]),
                    r_task=float(self.r_task[i]),
                    l_cot=float(self.l_cot[i]),
                    l_nocot=float(self.l_nocot[i]),
                    correct=bool(self.correct[i]),
                    format_ok=bool(self.format_ok[i]),
                ))
        return out


@dataclass
class BatchAdvantages:
    """Per-member kernel outputs, aligned with the input batch arrays."""

    r_q: np.ndarray
    r: np.ndarray
    a_tilde: np.ndarray
    g: np.ndarray
    a_hat: np.ndarray
    skipped: np.ndarray


def compute_advantages_batch(
    batch: BridgeBatch,
    bounds: Mapping[object, LengthBounds] | None = None,
    skip_uniform_groups: bool = False,
) -> BatchAdvantages:
    """Run the core advantage kernel over every group in the batch."""

    n = batch.n
    out = BatchAdvantages(
        r_q=np.empty(n), r=np.empty(n), a_tilde=np.empty(n),
        g=np.empty(n), a_hat=np.empty(n), skipped=np.empty(n, dtype=bool))
    config = batch.config(skip_uniform_groups)
    rollouts = batch.to_rollouts()
    start = 0
    for _, span in batch.group_slices():
        group = rollouts[span]
        for res in compute_advantages(group, bounds, config):
            i = start + res.member_idx
            out.r_q[i] = res.r_q
            out.r[i] = res.r
            out.a_tilde[i] = res.a_tilde
            out.g[i] = res.g
            out.a_hat[i] = res.a_hat
            out.skipped[i] = res.skipped
        start = span.stop
    return out


def estimate_bounds_batch(
    lengths, bucket_ids, correct, format_ok=None, *,
    min_samples: int = 20,
    previous: Mapping[object, LengthBounds] | None = None,
    step: int = 0,
) -> dict[object, LengthBounds]:
    """Array-facing wrapper over the core percentile band estimator."""

    lengths = _as_float("lengths", lengths)
    n = lengths.shape[0]
    buckets = np.asarray(bucket_ids)
    if buckets.ndim != 1 or buckets.shape[0] != n:
        raise BridgeShapeError(f"bucket_ids has shape {buckets.shape}, "
                               f"expected ({n},)")
    correct = _as_bool("correct", correct, n)
    format_arr = (np.ones(n, dtype=bool) if format_ok is None
                  else _as_bool("format_ok", format_ok, n))
    rollouts = [
        Rollout(prompt_id="", bucket=_py_bucket(buckets[i]),
                length=float(lengths[i]), r_task=0.0, l_cot=0.0,
                l_nocot=0.0, correct=bool(correct[i]),
                format_ok=bool(format_arr[i]))
        for i in range(n)
    ]
    return estimate_bounds(rollouts, min_samples=min_samples,
                           previous=previous, step=step)


@dataclass
class BatchRewards:
    """Per-response task-reward components."""

    total: np.ndarray
    format_score: np.ndarray
    answer_score: np.ndarray
    format_ok: np.ndarray
    parseable: np.ndarray


def _as_verdicts(labels: Sequence) -> list[Verdict]:
    return [lab if isinstance(lab, Verdict) else Verdict.from_label(str(lab))
            for lab in labels]


def task_reward_batch(texts: Sequence[str], golds: Sequence[Sequence],
                      mode: str = "cot") -> BatchRewards:
    """Parse and score many responses against their gold label lists."""

    if len(texts) != len(golds):
        raise BridgeShapeError(f"{len(texts)} texts but {len(golds)} "
                               f"gold label lists")
    n = len(texts)
    out = BatchRewards(
        total=np.empty(n), format_score=np.empty(n), answer_score=np.empty(n),
        format_ok=np.empty(n, dtype=bool), parseable=np.empty(n, dtype=bool))
    for i, (text, gold) in enumerate(zip(texts, golds)):
        parsed = parse_response(text, mode=mode)
        reward = task_reward(parsed, _as_verdicts(gold))
        out.total[i] = reward.total
        out.format_score[i] = reward.format_score
        out.answer_score[i] = reward.answer_score
        out.format_ok[i] = parsed.format_ok
        out.parseable[i] = parsed.parseable
    return out


@dataclass
class BatchParses:
    """Parsed answer lists plus flags, aligned with the input texts."""

    labels: list[tuple[str, ...]]
    format_ok: np.ndarray
    parseable: np.ndarray
    used_continuation: np.ndarray


def parse_response_batch(texts: Sequence[str],
                         mode: str = "cot") -> BatchParses:
    n = len(texts)
    out = BatchParses(labels=[], format_ok=np.empty(n, dtype=bool),
                      parseable=np.empty(n, dtype=bool),
                      used_continuation=np.empty(n, dtype=bool))
    for i, text in enumerate(texts):
        parsed = parse_response(text, mode=mode)
        out.labels.append(tuple(lab.value for lab in parsed.labels))
        out.format_ok[i] = parsed.format_ok
        out.parseable[i] = parsed.parseable
        out.used_continuation[i] = parsed.used_continuation
    return out


def generate_records(
    tiers: Sequence[Mapping | Sequence[int]],
    master_seed: int,
    *,
    variants: int = 5,
    plan_name: str = "bridge",
    facts_path: str | None = None,
    templates_path: str | None = None,
) -> list[dict]:
    """Generate instances through the core pipeline as plain records.

    Each tier is either a mapping with PlanRow field names or a
    (depth, width, groups[, num_subquestions[, distractor_chains]]) tuple.
    """

    rows = []
    for tier in tiers:
        if isinstance(tier, Mapping):
            rows.append(PlanRow(**tier))
        else:
            values = list(tier)
            depth, width, groups = values[:3]
            subq = values[3] if len(values) > 3 else max(0, depth - 1)
            chains = values[4] if len(values) > 4 else 1
            rows.append(PlanRow(depth=depth, width=width, groups=groups,
                                num_subquestions=subq,
                                distractor_chains=chains))
    plan = DatasetPlan(name=plan_name, rows=tuple(rows), variants=variants)
    pool = FactPool.load(facts_path) if facts_path else FactPool.bundled()
    templates = (TemplatePool.load(templates_path) if templates_path
                 else TemplatePool.default())
    return [inst.to_record()
            for inst in generate_dataset(plan, pool, templates, master_seed)]
