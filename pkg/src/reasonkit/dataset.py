"""Dataset assembly: realized instance records, verification, and splits.

An instance is one surface-realized variant of a certified argument tree:
a shuffled premise paragraph, its serialized formulas, the question list,
and the full rule-labeled tree for auditability. Records are plain JSON
with a schema version so downstream consumers can evolve safely.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field

from . import runio
from .entail import Verdict, entails, satisfiable
from .logic import Formula, Not, format_formula, parse_formula
from .rules import RuleApplicationError, RuleKind, apply_rule, minimal_depth
from .seeds import substream, substream_seed
from .surface import FactPool, TemplatePool, realize, should_wrap
from .trees import (
    ArgumentTree,
    DifficultyProfile,
    GenerationError,
    InstanceCore,
    Question,
    TreeNode,
    make_variant_group,
    skeleton_hash,
)

SCHEMA_VERSION = 1
DEFAULT_VARIANTS = 5
DEFAULT_SPLIT_RATIOS = (10, 1, 1)
SPLIT_NAMES = ("train", "val", "test")


class RecordError(ValueError):
    """An instance record is structurally unusable (not merely failing checks)."""


@dataclass(frozen=True)
class InstanceQuestion:
    """One question attached to an instance, in asked order."""

    text: str
    formula: Formula
    label: Verdict
    kind: str
    node_id: str

    @property
    def polarity(self) -> str:
        return "asserted" if self.label is Verdict.TRUE else "negated"


@dataclass
class Instance:
    """A realized dataset entry for one variant of one group."""

    instance_id: str
    group_id: str
    variant_idx: int
    depth: int
    width: int
    seed: int
    skeleton_hash: str
    paragraph: str
    premises: list[Formula]
    premise_texts: list[str]
    questions: list[InstanceQuestion]
    tree: TreeNode
    distractor_premise_idx: list[int]

    def to_record(self) -> dict:
        index_of = {format_formula(f): i for i, f in enumerate(self.premises)}

        def node_record(node: TreeNode) -> dict:
            rec: dict = {
                "id": node.node_id,
                "rule": node.rule.value if node.rule else None,
                "conclusion": format_formula(node.conclusion),
                "children": [node_record(c) for c in node.children],
            }
            if not node.children:
                rec["premise_idx"] = index_of[format_formula(node.conclusion)]
            return rec

        return {
            "schema": SCHEMA_VERSION,
            "id": self.instance_id,
            "group_id": self.group_id,
            "variant_idx": self.variant_idx,
            "depth": self.depth,
            "width": self.width,
            "seed": self.seed,
            "skeleton_hash": self.skeleton_hash,
            "paragraph": self.paragraph,
            "premises": [format_formula(f) for f in self.premises],
            "premise_texts": list(self.premise_texts),
            "questions": [
                {
                    "text": q.text,
                    "formula": format_formula(q.formula),
                    "label": q.label.value,
                    "kind": q.kind,
                    "node_id": q.node_id,
                }
                for q in self.questions
            ],
            "tree": node_record(self.tree),
            "distractor_premise_idx": list(self.distractor_premise_idx),
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "Instance":
        try:
            premises = [parse_formula(s) for s in record["premises"]]
            questions = [
                InstanceQuestion(
                    text=q["text"],
                    formula=parse_formula(q["formula"]),
                    label=Verdict(q["label"]),
                    kind=q["kind"],
                    node_id=q["node_id"],
                )
                for q in record["questions"]
            ]
            tree = _tree_from_record(record["tree"], level=0)
            return cls(
                instance_id=record["id"],
                group_id=record["group_id"],
                variant_idx=record["variant_idx"],
                depth=record["depth"],
                width=record["width"],
                seed=record["seed"],
                skeleton_hash=record["skeleton_hash"],
                paragraph=record["paragraph"],
                premises=premises,
                premise_texts=list(record["premise_texts"]),
                questions=questions,
                tree=tree,
                distractor_premise_idx=list(record["distractor_premise_idx"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise RecordError(f"unusable instance record: {exc}") from exc

    def gold_labels(self) -> list[Verdict]:
        return [q.label for q in self.questions]


def _tree_from_record(rec: Mapping, level: int) -> TreeNode:
    node = TreeNode(
        conclusion=parse_formula(rec["conclusion"]),
        rule=RuleKind(rec["rule"]) if rec.get("rule") else None,
        children=[_tree_from_record(c, level + 1) for c in rec.get("children", [])],
        level=level,
        node_id=rec["id"],
    )
    return node


def realize_instance(
    core: InstanceCore,
    group_id: str,
    pool: FactPool,
    templates: TemplatePool,
    master_seed: int,
) -> Instance:
    """Render one variant into a paragraph, question texts, and a record.

    The premise order is shuffled per instance; every template draw comes
    from a substream keyed by the instance id, so realization is independent
    of how many instances were generated before this one.
    """

    instance_id = f"{group_id}-v{core.variant_idx}"
    rng = substream(master_seed, "surface", instance_id)

    canonical = core.tree.all_premise_formulas()
    order = list(range(len(canonical)))
    rng.shuffle(order)
    premises = [canonical[i] for i in order]
    position = {format_formula(f): pos for pos, f in enumerate(premises)}

    premise_texts = [
        realize(f, pool.texts, templates, rng,
                statement_wrap=should_wrap(f, rng))
        for f in premises
    ]
    paragraph = " ".join(premise_texts)

    n_tree_leaves = len(core.tree.leaf_formulas())
    distractor_idx = [position[format_formula(f)]
                      for f in canonical[n_tree_leaves:]]

    questions = []
    for q in core.questions:
        text = realize(q.statement, pool.texts, templates, rng,
                       statement_wrap=(q.polarity == "asserted"))
        questions.append(InstanceQuestion(
            text=text,
            formula=q.statement,
            label=q.gold,
            kind=q.kind,
            node_id=q.node_id,
        ))

    return Instance(
        instance_id=instance_id,
        group_id=group_id,
        variant_idx=core.variant_idx,
        depth=core.profile.depth,
        width=core.profile.width,
        seed=core.skeleton_seed,
        skeleton_hash=core.skeleton_hash,
        paragraph=paragraph,
        premises=premises,
        premise_texts=premise_texts,
        questions=questions,
        tree=core.tree.root,
        distractor_premise_idx=distractor_idx,
    )


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    instance_id: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


def _check(report: VerificationReport, name: str, passed: bool, detail: str = "") -> bool:
    report.checks.append(CheckResult(name, passed, "" if passed else detail))
    return passed


_REQUIRED_FIELDS = (
    "schema", "id", "group_id", "variant_idx", "depth", "width", "seed",
    "skeleton_hash", "paragraph", "premises", "premise_texts", "questions",
    "tree", "distractor_premise_idx",
)


def verify_instance(record: Mapping) -> VerificationReport:
    """Re-derive every checkable property of a record from scratch.

    The checks re-run the semantic oracles (rule application, truth-table
    entailment, forward-chaining depth) rather than trusting any stored
    field, so a corrupted or hand-edited record cannot slip through.
    """

    report = VerificationReport(instance_id=str(record.get("id", "<missing>")))

    missing = [k for k in _REQUIRED_FIELDS if k not in record]
    if not _check(report, "schema", record.get("schema") == SCHEMA_VERSION and not missing,
                  f"schema={record.get('schema')!r} missing={missing}"):
        return report

    try:
        inst = Instance.from_record(record)
    except RecordError as exc:
        _check(report, "parse", False, str(exc))
        return report
    _check(report, "parse", True)

    _check(
        report, "paragraph",
        inst.paragraph == " ".join(inst.premise_texts)
        and len(inst.premise_texts) == len(inst.premises),
        "paragraph is not the space-join of premise_texts",
    )

    tree_ok = True
    leaf_idx: list[int] = []
    height = 0
    stack = [(inst.tree, 0)]
    detail = ""
    while stack and tree_ok:
        node, level = stack.pop()
        height = max(height, level)
        if node.children:
            if node.rule is None:
                tree_ok, detail = False, f"internal node {node.node_id} lacks a rule"
                break
            try:
                derived = apply_rule(node.rule, [c.conclusion for c in node.children])
            except RuleApplicationError as exc:
                tree_ok, detail = False, f"node {node.node_id}: {exc}"
                break
            if derived != node.conclusion:
                tree_ok, detail = False, f"node {node.node_id} conclusion mismatch"
                break
            stack.extend((c, level + 1) for c in node.children)
        else:
            idx = _leaf_premise_idx(record["tree"], node.node_id)
            if idx is None or not (0 <= idx < len(inst.premises)):
                tree_ok, detail = False, f"leaf {node.node_id} premise_idx invalid"
                break
            if inst.premises[idx] != node.conclusion:
                tree_ok, detail = False, f"leaf {node.node_id} premise mismatch"
                break
            leaf_idx.append(idx)
    _check(report, "tree-rules", tree_ok, detail)
    _check(report, "tree-height", height == inst.depth,
           f"structural height {height} != depth {inst.depth}")

    distractor_set = set(inst.distractor_premise_idx)
    coverage_ok = (
        tree_ok
        and len(set(leaf_idx)) == len(leaf_idx)
        and not (distractor_set & set(leaf_idx))
        and distractor_set | set(leaf_idx) == set(range(len(inst.premises)))
        and len(inst.distractor_premise_idx) == len(distractor_set)
    )
    _check(report, "premise-coverage", coverage_ok,
           "tree leaves plus distractors must partition the premise list")

    sat = satisfiable(inst.premises)
    _check(report, "satisfiable", sat, "premises have no model")

    if sat:
        labels_ok = True
        detail = ""
        for i, q in enumerate(inst.questions):
            verdict = entails(inst.premises, q.formula)
            if verdict is not q.label:
                labels_ok = False
                detail = f"question {i}: stored {q.label.value}, oracle {verdict.value}"
                break
        _check(report, "labels", labels_ok, detail)

        depth_found = minimal_depth(inst.premises, inst.tree.conclusion,
                                    max_steps=inst.depth + 2)
        _check(report, "depth", depth_found == inst.depth,
               f"forward chaining reaches root at {depth_found}, "
               f"recorded depth {inst.depth}")

    q_ok = True
    detail = ""
    roots = [q for q in inst.questions if q.kind == "root"]
    if len(roots) != 1 or inst.questions[-1].kind != "root":
        q_ok, detail = False, "exactly one root question required, in last position"
    else:
        by_id = {n.node_id: n for n, _ in _walk(inst.tree)}
        for i, q in enumerate(inst.questions):
            node = by_id.get(q.node_id)
            if node is None or not node.children:
                q_ok, detail = False, f"question {i} targets no internal node"
                break
            expected = node.conclusion if q.label is Verdict.TRUE else Not(node.conclusion)
            if q.formula != expected:
                q_ok, detail = False, f"question {i} formula does not match its node"
                break
            if q.kind == "root" and q.node_id != inst.tree.node_id:
                q_ok, detail = False, "root question mislabeled"
                break
    _check(report, "questions", q_ok, detail)

    if tree_ok and q_ok:
        recomputed = _recompute_skeleton_hash(inst)
        _check(report, "skeleton-hash", recomputed == inst.skeleton_hash,
               f"stored {inst.skeleton_hash[:12]}.., recomputed {recomputed[:12]}..")

    return report


def _walk(root: TreeNode) -> Iterator[tuple[TreeNode, int]]:
    stack = [(root, 0)]
    while stack:
        node, level = stack.pop()
        yield node, level
        stack.extend((c, level + 1) for c in reversed(node.children))


def _leaf_premise_idx(tree_rec: Mapping, node_id: str) -> int | None:
    stack = [tree_rec]
    while stack:
        rec = stack.pop()
        if rec["id"] == node_id:
            return rec.get("premise_idx")
        stack.extend(rec.get("children", []))
    return None


def _recompute_skeleton_hash(inst: Instance) -> str:
    distractors = [inst.premises[i] for i in inst.distractor_premise_idx]
    tree = ArgumentTree(
        root=inst.tree,
        distractor_leaves=[distractors] if distractors else [],
        atom_order=[],
        depth=inst.depth,
    )
    questions = [
        Question(statement=q.formula, gold=q.label, kind=q.kind,
                 node_id=q.node_id, polarity=q.polarity)
        for q in inst.questions
    ]
    return skeleton_hash(tree, questions)


@dataclass(frozen=True)
class PlanRow:
    """Generation settings for one depth tier."""

    depth: int
    width: int
    groups: int
    num_subquestions: int
    distractor_chains: int

    def profile(self, atom_budget: int = 20) -> DifficultyProfile:
        return DifficultyProfile(
            depth=self.depth,
            width=self.width,
            num_subquestions=self.num_subquestions,
            distractor_chains=self.distractor_chains,
            atom_budget=atom_budget,
        )


@dataclass(frozen=True)
class DatasetPlan:
    name: str
    rows: tuple[PlanRow, ...]
    variants: int = DEFAULT_VARIANTS

    @property
    def total_groups(self) -> int:
        return sum(r.groups for r in self.rows)

    @property
    def total_instances(self) -> int:
        return self.total_groups * self.variants

    @property
    def total_questions(self) -> int:
        return sum(r.groups * (r.num_subquestions + 1) for r in self.rows) * self.variants


_DEFAULT_TIERS = (
    # depth, width, groups, distractor chains; one question per depth level
    (1, 1, 240, 1),
    (2, 1, 120, 1),
    (3, 2, 84, 1),
    (4, 2, 72, 1),
    (5, 3, 48, 2),
    (6, 4, 36, 2),
    (7, 5, 36, 2),
    (8, 6, 24, 2),
)


def default_benchmark_plan() -> DatasetPlan:
    """The stock generation plan: 3,300 instances and 9,600 questions.

    Group counts per depth are divisible by 12 so a 10:1:1 group-atomic
    split is exact at every depth.
    """

    rows = tuple(
        PlanRow(depth=d, width=w, groups=g, num_subquestions=d - 1,
                distractor_chains=dc)
        for d, w, g, dc in _DEFAULT_TIERS
    )
    return DatasetPlan(name="benchmark-default-v1", rows=rows)


def generate_group(
    plan: DatasetPlan,
    row: PlanRow,
    group_idx: int,
    pool: FactPool,
    templates: TemplatePool,
    master_seed: int,
) -> list[Instance]:
    """Generate and realize all variants of one consistency group."""

    skeleton_seed = substream_seed(master_seed, "skeleton", row.depth, group_idx)
    group_id = f"d{row.depth}-g{group_idx:04d}"
    group = make_variant_group(skeleton_seed, row.profile(), pool.ids,
                               variants=plan.variants)
    return [
        realize_instance(core, group_id, pool, templates, master_seed)
        for core in group.variants
    ]


def generate_dataset(
    plan: DatasetPlan,
    pool: FactPool,
    templates: TemplatePool,
    master_seed: int,
    progress=None,
) -> Iterator[Instance]:
    """Yield realized instances for the whole plan in deterministic order."""

    done = 0
    for row in plan.rows:
        for g in range(row.groups):
            for inst in generate_group(plan, row, g, pool, templates, master_seed):
                yield inst
            done += 1
            if progress is not None:
                progress(done, plan.total_groups)


def split_dataset(
    instances: Sequence[Instance],
    ratios: Sequence[int] = DEFAULT_SPLIT_RATIOS,
    seed: int = 0,
) -> dict[str, list[Instance]]:
    """Partition group-atomically into train/val/test, stratified by depth.

    All variants of a group land in the same split. Within each depth the
    groups are shuffled by a seeded stream and allocated by largest
    remainder, which reduces to exact counts whenever the group total is
    divisible by the ratio sum.
    """

    if len(ratios) != len(SPLIT_NAMES) or any(r < 0 for r in ratios) or sum(ratios) == 0:
        raise ValueError(f"ratios must be {len(SPLIT_NAMES)} non-negative integers")

    groups_by_depth: dict[int, list[str]] = {}
    seen: set[str] = set()
    for inst in instances:
        if inst.group_id not in seen:
            seen.add(inst.group_id)
            groups_by_depth.setdefault(inst.depth, []).append(inst.group_id)

    assignment: dict[str, str] = {}
    total = sum(ratios)
    for depth in sorted(groups_by_depth):
        group_ids = groups_by_depth[depth]
        rng = substream(seed, "split", depth)
        shuffled = list(group_ids)
        rng.shuffle(shuffled)
        n = len(shuffled)
        exact = [n * r / total for r in ratios]
        counts = [int(x) for x in exact]
        remainders = sorted(range(len(ratios)),
                            key=lambda i: (exact[i] - counts[i], -i), reverse=True)
        short = n - sum(counts)
        for i in remainders[:short]:
            counts[i] += 1
        cursor = 0
        for name, count in zip(SPLIT_NAMES, counts):
            for gid in shuffled[cursor:cursor + count]:
                assignment[gid] = name
            cursor += count

    out: dict[str, list[Instance]] = {name: [] for name in SPLIT_NAMES}
    for inst in instances:
        out[assignment[inst.group_id]].append(inst)
    return out


def write_dataset(
    instances: Sequence[Instance],
    out_dir: str,
    ratios: Sequence[int] = DEFAULT_SPLIT_RATIOS,
    split_seed: int = 0,
    metadata: Mapping | None = None,
) -> dict:
    """Write split JSONL files plus a manifest; returns the manifest."""

    import os

    os.makedirs(out_dir, exist_ok=True)
    splits = split_dataset(instances, ratios=ratios, seed=split_seed)

    manifest: dict = {
        "schema": SCHEMA_VERSION,
        "ratios": list(ratios),
        "split_seed": split_seed,
        "rounding": "largest_remainder_per_depth",
        "splits": {},
        "per_depth": {},
    }
    if metadata:
        manifest.update(metadata)

    for name in SPLIT_NAMES:
        split = splits[name]
        path = os.path.join(out_dir, f"{name}.jsonl")
        runio.write_jsonl(path, (inst.to_record() for inst in split))
        manifest["splits"][name] = {
            "path": f"{name}.jsonl",
            "groups": len({i.group_id for i in split}),
            "instances": len(split),
            "questions": sum(len(i.questions) for i in split),
        }

    depths = sorted({i.depth for i in instances})
    for depth in depths:
        row = {}
        for name in SPLIT_NAMES:
            row[name] = len({i.group_id for i in splits[name] if i.depth == depth})
        manifest["per_depth"][str(depth)] = row

    runio.atomic_write_text(os.path.join(out_dir, "manifest.json"),
                            runio.dump_json_pretty(manifest))
    return manifest


def read_instances(path: str) -> list[Instance]:
    out = []
    for lineno, record in runio.read_jsonl(path):
        try:
            out.append(Instance.from_record(record))
        except RecordError as exc:
            raise runio.DataFormatError(f"{path}:{lineno}: {exc}") from None
    return out
