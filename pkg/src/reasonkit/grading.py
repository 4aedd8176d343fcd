"""Response parsing, per-question task rewards, and aggregate metrics.

Parsing is deliberately forgiving about label formatting (case, stray
punctuation, missing brackets) but strict about structure: the format flag
only passes when the expected tag discipline for the mode is observed, and
the reward tiers depend on both.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .dataset import Instance
from .entail import Verdict

FORMAT_REWARD = 1.0
FORMAT_PENALTY = -1.0
ANSWER_REWARD = 2.0
ANSWER_PENALTY_WRONG = -1.5
ANSWER_PENALTY_UNPARSEABLE = -2.0

# every reachable task reward value given the tier coupling above
TASK_REWARD_IMAGE = (3.0, -0.5, -1.0, -2.5, -3.0)

_ANSWER_BLOCK = re.compile(r"<answer>(.*?)</answer>", re.DOTALL | re.IGNORECASE)
_CONTINUATION = re.compile(r"^(.*?)</answer>", re.DOTALL | re.IGNORECASE)
_BRACKET_LIST = re.compile(r"\[(.*?)\]", re.DOTALL)
_TOKEN_SPLIT = re.compile(r"[,\s]+")
_TOKEN_TRIM = ".,;:!'\"`"


@dataclass(frozen=True)
class ParsedAnswer:
    """Labels recovered from a model response plus format diagnostics."""

    labels: tuple[Verdict, ...]
    format_ok: bool
    span: str | None
    used_continuation: bool = False

    @property
    def parseable(self) -> bool:
        return bool(self.labels)


def _extract_labels(content: str) -> tuple[Verdict, ...]:
    bracket = None
    for bracket in _BRACKET_LIST.finditer(content):
        pass
    inner = bracket.group(1) if bracket else content
    labels = []
    for token in _TOKEN_SPLIT.split(inner.strip()):
        verdict = Verdict.from_label(token.strip(_TOKEN_TRIM))
        if verdict is not None:
            labels.append(verdict)
    return tuple(labels)


def parse_response(text: str, mode: str = "cot") -> ParsedAnswer:
    """Recover the final answer list from a raw model response.

    The last well-formed <answer> block wins. A response that merely closes
    a block the prompt scaffold opened (text up to the first </answer>) is
    still parsed; for the no-reasoning mode that is the expected shape, for
    the reasoning mode it fails the format check.
    """

    if mode not in ("cot", "nocot"):
        raise ValueError(f"unknown mode {mode!r}")

    block = None
    for block in _ANSWER_BLOCK.finditer(text):
        pass
    used_continuation = False
    if block is not None:
        content = block.group(1)
        region_start = block.start()
    else:
        cont = _CONTINUATION.match(text)
        if cont is None:
            return ParsedAnswer(labels=(), format_ok=False, span=None)
        content = cont.group(1)
        region_start = 0
        used_continuation = True

    labels = _extract_labels(content)
    if not labels:
        return ParsedAnswer(labels=(), format_ok=False, span=content,
                            used_continuation=used_continuation)

    if mode == "cot":
        # the scaffold opens <think>; a compliant response closes it and
        # only then emits its own tagged answer block
        format_ok = (not used_continuation
                     and text.rfind("</think>", 0, region_start) != -1)
    else:
        format_ok = True
    return ParsedAnswer(labels=labels, format_ok=format_ok, span=content,
                        used_continuation=used_continuation)


@dataclass(frozen=True)
class RewardBreakdown:
    """Additive format and answer components of the task reward."""

    format_score: float
    answer_score: float

    @property
    def total(self) -> float:
        return self.format_score + self.answer_score


def task_reward(parsed: ParsedAnswer, gold: Sequence[Verdict]) -> RewardBreakdown:
    """Score one response against the gold label list.

    The top answer tier is gated on the format flag, so the reachable
    totals are exactly the five values in TASK_REWARD_IMAGE.
    """

    format_score = FORMAT_REWARD if parsed.format_ok else FORMAT_PENALTY
    if not parsed.labels or len(parsed.labels) != len(gold):
        answer_score = ANSWER_PENALTY_UNPARSEABLE
    elif list(parsed.labels) == list(gold) and parsed.format_ok:
        answer_score = ANSWER_REWARD
    else:
        answer_score = ANSWER_PENALTY_WRONG
    return RewardBreakdown(format_score=format_score, answer_score=answer_score)


@dataclass(frozen=True)
class GradedRecord:
    """One question's outcome, carrying the keys metrics group by."""

    instance_id: str
    group_id: str
    depth: int
    question_idx: int
    gold: Verdict
    predicted: Verdict | None

    @property
    def valid(self) -> bool:
        return self.predicted is not None

    @property
    def correct(self) -> bool:
        return self.predicted is self.gold


@dataclass(frozen=True)
class GradeResult:
    parsed: ParsedAnswer
    reward: RewardBreakdown
    records: tuple[GradedRecord, ...]


def grade_response(instance: Instance, text: str, mode: str = "cot") -> GradeResult:
    """Parse and score one response against an instance's questions.

    Predictions align positionally with the question list; if the response
    has the wrong number of labels, every question counts as unanswered.
    """

    parsed = parse_response(text, mode=mode)
    gold = instance.gold_labels()
    reward = task_reward(parsed, gold)
    aligned = len(parsed.labels) == len(gold)
    records = tuple(
        GradedRecord(
            instance_id=instance.instance_id,
            group_id=instance.group_id,
            depth=instance.depth,
            question_idx=i,
            gold=g,
            predicted=parsed.labels[i] if aligned else None,
        )
        for i, g in enumerate(gold)
    )
    return GradeResult(parsed=parsed, reward=reward, records=records)


CONSISTENCY_DEFINITION = (
    "a group counts as consistent only if every question of every variant "
    "in it is answered correctly"
)


@dataclass(frozen=True)
class MetricBlock:
    """Aggregate rates over one slice of graded questions."""

    questions: int
    accuracy: float
    answer_rate: float
    precision: float
    f_beta: float
    consistency_ratio: float


@dataclass
class MetricsReport:
    beta: float
    min_answer_rate: float
    overall: MetricBlock
    per_depth: dict[int, MetricBlock] = field(default_factory=dict)
    depth_average: dict[str, float] = field(default_factory=dict)
    consistency_definition: str = CONSISTENCY_DEFINITION

    def to_record(self) -> dict:
        def block(b: MetricBlock) -> dict:
            return {
                "questions": b.questions,
                "accuracy": b.accuracy,
                "answer_rate": b.answer_rate,
                "precision": b.precision,
                "f_beta": b.f_beta,
                "consistency_ratio": b.consistency_ratio,
            }

        return {
            "beta": self.beta,
            "min_answer_rate": self.min_answer_rate,
            "overall": block(self.overall),
            "per_depth": {str(d): block(b) for d, b in sorted(self.per_depth.items())},
            "depth_average": dict(self.depth_average),
            "consistency_definition": self.consistency_definition,
        }


def f_beta_score(precision: float, answer_rate: float, beta: float,
                 min_answer_rate: float) -> float:
    """Precision/answer-rate compromise with a hard floor on answer rate.

    Below the floor the score is zero outright, so refusing to answer
    cannot be traded for precision.
    """

    if answer_rate <= min_answer_rate:
        return 0.0
    denom = beta * beta * precision + answer_rate
    if denom == 0:
        return 0.0
    return (1 + beta * beta) * precision * answer_rate / denom


def _block(records: Sequence[GradedRecord], beta: float,
           min_answer_rate: float) -> MetricBlock:
    total = len(records)
    if total == 0:
        return MetricBlock(0, 0.0, 0.0, 0.0, 0.0, 0.0)
    valid = sum(r.valid for r in records)
    correct = sum(r.correct for r in records)
    accuracy = correct / total
    answer_rate = valid / total
    precision = correct / valid if valid else 0.0

    by_group: dict[str, bool] = {}
    for rec in records:
        by_group[rec.group_id] = by_group.get(rec.group_id, True) and rec.correct
    consistency = sum(by_group.values()) / len(by_group)

    return MetricBlock(
        questions=total,
        accuracy=accuracy,
        answer_rate=answer_rate,
        precision=precision,
        f_beta=f_beta_score(precision, answer_rate, beta, min_answer_rate),
        consistency_ratio=consistency,
    )


def compute_metrics(records: Sequence[GradedRecord], beta: float = 0.5,
                    min_answer_rate: float = 0.3) -> MetricsReport:
    """Aggregate graded questions overall and per depth.

    The depth_average entries are unweighted means over the depth columns,
    so shallow tiers with many questions do not drown out deep ones; the
    overall block pools all questions instead.
    """

    overall = _block(records, beta, min_answer_rate)
    per_depth: dict[int, MetricBlock] = {}
    for depth in sorted({r.depth for r in records}):
        per_depth[depth] = _block([r for r in records if r.depth == depth],
                                  beta, min_answer_rate)

    depth_average: dict[str, float] = {}
    if per_depth:
        for name in ("accuracy", "answer_rate", "precision", "f_beta",
                     "consistency_ratio"):
            depth_average[name] = sum(
                getattr(b, name) for b in per_depth.values()) / len(per_depth)

    report = MetricsReport(beta=beta, min_answer_rate=min_answer_rate,
                           overall=overall, per_depth=per_depth,
                           depth_average=depth_average)
    return report


PARADIGM_NAMES = (
    "Modus Ponens",
    "Modus Tollens",
    "Hypothetical Syllogism",
    "Disjunctive Syllogism",
    "Reductio ad Absurdum",
    "Constructive Dilemma",
    "Disjunction Elimination",
)


def paradigm_word_freq(texts: Iterable[str]) -> dict[str, int]:
    """Case-insensitive occurrence counts of rule names across texts.

    Useful for checking whether reasoning traces start naming the inference
    patterns they use.
    """

    counts = {name: 0 for name in PARADIGM_NAMES}
    for text in texts:
        lowered = text.lower()
        for name in PARADIGM_NAMES:
            counts[name] += lowered.count(name.lower())
    return counts
