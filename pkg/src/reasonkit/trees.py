"""Seeded construction of deduction trees with exact-depth certificates.

A tree is grown backward from a root conclusion: each expansion replaces a
premise with the schema premises of a rule that derives it, with fresh atoms
filling the unconstrained slots. Fresh slots keep the leaf set satisfiable,
and every draw is certified before acceptance: leaves must admit a model, and
the forward chainer must first reach the root conclusion at exactly the
requested depth. Draws failing certification are retried a bounded number of
times, then reported with the seed.

Consistency groups share one abstract tree (atoms s0, s1, ...) and differ only
in the atom-slot to fact-id assignment, so every variant in a group has the
same canonical skeleton hash.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

from .entail import Verdict, entails, satisfiable
from .logic import Atom, Formula, Implies, Not, Or, atoms, format_formula, rename_atoms
from .rules import RuleKind, backward_options, backward_premises, minimal_depth
from .seeds import substream

MAX_RETRIES_DEFAULT = 32


class GenerationError(RuntimeError):
    """Raised when a seeded draw cannot be completed or certified."""


class PoolCapacityError(GenerationError):
    """Raised when the fact pool cannot cover a group's disjoint assignments."""


@dataclass(frozen=True)
class DifficultyProfile:
    """Shape controls for one generated instance.

    width is a per-level expansion quota: beyond the single spine expansion
    that carries the exact depth, up to width - 1 additional premises are
    expanded into their own shallow derivations. level_quota optionally caps
    those side expansions per tree level. atom_budget bounds the total number
    of distinct atoms so the truth-table oracle stays far below its cap.
    """

    depth: int
    width: int
    num_subquestions: int = 0
    distractor_chains: int = 0
    level_quota: Mapping[int, int] | None = None
    atom_budget: int = 20
    max_retries: int = MAX_RETRIES_DEFAULT

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.width < 1:
            raise ValueError("width must be >= 1")
        if self.num_subquestions < 0 or self.distractor_chains < 0:
            raise ValueError("counts must be non-negative")
        if self.atom_budget < self.depth + 4:
            raise ValueError("atom_budget too small for the requested depth")
        if self.max_retries < 1:
            raise ValueError("max_retries must be >= 1")


@dataclass
class TreeNode:
    """One conclusion in the tree; a node with no rule is a leaf premise."""

    conclusion: Formula
    rule: RuleKind | None = None
    children: list["TreeNode"] = field(default_factory=list)
    level: int = 0
    node_id: str = ""

    @property
    def is_leaf(self) -> bool:
        return self.rule is None

    def height(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(c.height() for c in self.children)


@dataclass
class ArgumentTree:
    """A certified deduction tree plus off-path distractor chains."""

    root: TreeNode
    distractor_leaves: list[list[Formula]]
    atom_order: list[str]
    depth: int

    def preorder_nodes(self) -> list[TreeNode]:
        out: list[TreeNode] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(reversed(node.children))
        return out

    def leaf_nodes(self) -> list[TreeNode]:
        return [n for n in self.preorder_nodes() if n.is_leaf]

    def internal_nodes(self) -> list[TreeNode]:
        return [n for n in self.preorder_nodes() if not n.is_leaf]

    def leaf_formulas(self) -> list[Formula]:
        return [n.conclusion for n in self.leaf_nodes()]

    def all_premise_formulas(self) -> list[Formula]:
        """Tree leaves followed by distractor leaves; paragraph order is
        shuffled later from this canonical order."""
        out = self.leaf_formulas()
        for chain in self.distractor_leaves:
            out.extend(chain)
        return out


Polarity = Literal["asserted", "negated"]


@dataclass(frozen=True)
class Question:
    """A statement about one tree conclusion, with its oracle-backed label."""

    statement: Formula
    gold: Verdict
    kind: Literal["root", "intermediate"]
    node_id: str
    polarity: Polarity


# ==== drawing ===============================================================

# Mild preference for two-premise rules; the three-premise rules consume two
# fresh atoms each and are additionally gated by the remaining atom budget.
_RULE_WEIGHTS = {
    RuleKind.MODUS_PONENS: 0.26,
    RuleKind.MODUS_TOLLENS: 0.16,
    RuleKind.HYPOTHETICAL_SYLLOGISM: 0.12,
    RuleKind.DISJUNCTIVE_SYLLOGISM: 0.16,
    RuleKind.REDUCTIO_AD_ABSURDUM: 0.10,
    RuleKind.CONSTRUCTIVE_DILEMMA: 0.10,
    RuleKind.DISJUNCTION_ELIMINATION: 0.10,
}

_FRESH_NEED = {
    RuleKind.CONSTRUCTIVE_DILEMMA: 2,
    RuleKind.DISJUNCTION_ELIMINATION: 2,
}


class _BudgetExhausted(Exception):
    pass


class _Draw:
    def __init__(self, profile: DifficultyProfile, rng) -> None:
        self.profile = profile
        self.rng = rng
        self.atoms_used = 0

    def fresh(self) -> Formula:
        if self.atoms_used >= self.profile.atom_budget:
            raise _BudgetExhausted
        name = f"t{self.atoms_used}"
        self.atoms_used += 1
        return Atom(name)

    def remaining(self) -> int:
        return self.profile.atom_budget - self.atoms_used

    def pick_rule(self, conclusion: Formula, reserve: int) -> RuleKind:
        """Weighted rule choice among kinds that fit shape and atom budget."""
        usable = self.remaining() - reserve
        options = [k for k in backward_options(conclusion) if _FRESH_NEED.get(k, 1) <= usable]
        if not options:
            raise _BudgetExhausted
        weights = [_RULE_WEIGHTS[k] for k in options]
        return self.rng.choices(options, weights=weights, k=1)[0]

    def expand(self, node: TreeNode, subtree_depth: int) -> None:
        """Grow an exact-depth subtree below `node` (one spine, rest leaves)."""
        reserve = subtree_depth - 1  # each deeper spine level needs >= 1 atom
        rule = self.pick_rule(node.conclusion, reserve)
        premises = backward_premises(rule, node.conclusion, self.fresh)
        node.rule = rule
        node.children = [
            TreeNode(conclusion=p, level=node.level + 1) for p in premises
        ]
        if subtree_depth > 1:
            spine = self.rng.choice(node.children)
            self.expand(spine, subtree_depth - 1)

    def root_conclusion(self) -> Formula:
        shape = self.rng.choices(
            ["atom", "not", "implies", "or"], weights=[0.45, 0.2, 0.2, 0.15], k=1
        )[0]
        if shape == "atom":
            return self.fresh()
        if shape == "not":
            return Not(self.fresh())
        if shape == "implies":
            return Implies(self.fresh(), self.fresh())
        return Or(self.fresh(), self.fresh())


def _side_candidates(root: TreeNode, max_level: int, quota_used: dict[int, int],
                     level_quota: Mapping[int, int] | None, width: int) -> list[TreeNode]:
    out: list[TreeNode] = []
    stack = [root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            if node.level <= max_level:
                cap = width - 1 if level_quota is None else level_quota.get(node.level, 0)
                if quota_used.get(node.level, 0) < cap:
                    out.append(node)
        else:
            stack.extend(reversed(node.children))
    return out


def _draw_tree(profile: DifficultyProfile, rng) -> ArgumentTree | None:
    draw = _Draw(profile, rng)
    try:
        root = TreeNode(conclusion=draw.root_conclusion(), level=0)
        draw.expand(root, profile.depth)

        # Side expansions: width - 1 extra premises grow their own shallow
        # derivations without disturbing the spine's exact depth.
        quota_used: dict[int, int] = {}
        side_budget = profile.width - 1
        while side_budget > 0:
            candidates = _side_candidates(
                root, profile.depth - 1, quota_used, profile.level_quota, profile.width
            )
            candidates = [c for c in candidates if draw.remaining() >= 2]
            if not candidates:
                break
            target = rng.choice(candidates)
            max_side_depth = min(2, profile.depth - target.level, draw.remaining() - 1)
            if max_side_depth < 1:
                break
            side_depth = 1 if max_side_depth == 1 else rng.choices([1, 2], [0.7, 0.3], k=1)[0]
            try:
                draw.expand(target, side_depth)
            except _BudgetExhausted:
                break
            quota_used[target.level] = quota_used.get(target.level, 0) + 1
            side_budget -= 1

        # Distractor chains: satisfiable mini-derivations over fresh atoms;
        # disjoint atoms keep every question verdict untouched.
        distractors: list[list[Formula]] = []
        for _ in range(profile.distractor_chains):
            if draw.remaining() < 3:
                break
            chain_root = TreeNode(conclusion=draw.fresh(), level=0)
            chain_depth = 1 if draw.remaining() < 4 else rng.choices([1, 2], [0.7, 0.3], k=1)[0]
            try:
                draw.expand(chain_root, chain_depth)
            except _BudgetExhausted:
                break
            chain_tree = ArgumentTree(chain_root, [], [], chain_depth)
            distractors.append(chain_tree.leaf_formulas())
    except _BudgetExhausted:
        return None

    tree = ArgumentTree(root, distractors, [], profile.depth)
    _finalize(tree)
    return tree


def _finalize(tree: ArgumentTree) -> None:
    """Assign preorder node ids and canonical atom names s0, s1, ..."""
    rename: dict[str, str] = {}

    def visit_formula(f: Formula) -> None:
        for name in atoms(f):
            if name not in rename:
                rename[name] = f"s{len(rename)}"

    for i, node in enumerate(tree.preorder_nodes()):
        node.node_id = f"n{i}"
        visit_formula(node.conclusion)
    for chain in tree.distractor_leaves:
        for f in chain:
            visit_formula(f)

    for node in tree.preorder_nodes():
        node.conclusion = rename_atoms(node.conclusion, rename)
    tree.distractor_leaves = [
        [rename_atoms(f, rename) for f in chain] for chain in tree.distractor_leaves
    ]
    tree.atom_order = [rename[k] for k in rename]


def build_tree(profile: DifficultyProfile, seed: int) -> ArgumentTree:
    """Draw and certify a tree; deterministic for a fixed (profile, seed).

    Certification re-derives everything the construction promises: leaves are
    pairwise distinct and jointly satisfiable, and the forward chainer first
    reaches the root conclusion at exactly profile.depth.
    """
    last_reason = "no draw attempted"
    for attempt in range(profile.max_retries):
        rng = substream(seed, "tree", attempt)
        tree = _draw_tree(profile, rng)
        if tree is None:
            last_reason = "atom budget exhausted mid-draw"
            continue
        premises = tree.all_premise_formulas()
        if len(set(premises)) != len(premises):
            last_reason = "duplicate leaf premises"
            continue
        if not satisfiable(premises):
            last_reason = "unsatisfiable leaf set"
            continue
        found = minimal_depth(premises, tree.root.conclusion, max_steps=profile.depth + 2)
        if found != profile.depth:
            last_reason = f"minimal derivation depth {found} != {profile.depth}"
            continue
        return tree
    raise GenerationError(
        f"could not draw a certified tree after {profile.max_retries} attempts "
        f"(seed={seed}, depth={profile.depth}, width={profile.width}): {last_reason}"
    )


# ==== questions =============================================================


def extract_questions(
    tree: ArgumentTree, profile: DifficultyProfile, seed: int
) -> list[Question]:
    """One root question plus up to profile.num_subquestions hidden ones.

    Sub-questions target sampled internal non-root conclusions, ordered
    deepest-first so they follow the forward derivation; the root question
    comes last. Polarity is an even seeded coin per question: asserted
    statements carry gold TRUE, negated ones gold FALSE.
    """
    rng = substream(seed, "questions")
    internals = tree.internal_nodes()
    root = internals[0]
    intermediates = internals[1:]
    k = min(profile.num_subquestions, len(intermediates))
    chosen = rng.sample(intermediates, k) if k else []
    order = {id(node): i for i, node in enumerate(tree.preorder_nodes())}
    chosen.sort(key=lambda n: (-n.level, order[id(n)]))

    questions: list[Question] = []
    for node, kind in [(n, "intermediate") for n in chosen] + [(root, "root")]:
        asserted = rng.random() < 0.5
        if asserted:
            q = Question(node.conclusion, Verdict.TRUE, kind, node.node_id, "asserted")
        else:
            q = Question(Not(node.conclusion), Verdict.FALSE, kind, node.node_id, "negated")
        questions.append(q)
    return questions


# ==== skeletons and variant groups ==========================================


def canonical_skeleton(tree: ArgumentTree, questions: Sequence[Question]) -> str:
    """Text form of the rule-labeled shape with atoms renamed canonically.

    Atom names are replaced by their first-occurrence index over a preorder
    walk, so any two trees equal up to atom renaming produce identical text.
    """
    rename: dict[str, str] = {}

    def canon(f: Formula) -> Formula:
        for name in atoms(f):
            if name not in rename:
                rename[name] = f"s{len(rename)}"
        return rename_atoms(f, rename)

    lines: list[str] = []

    def walk(node: TreeNode) -> None:
        tag = node.rule.value if node.rule else "leaf"
        lines.append(f"{node.node_id} {tag} {format_formula(canon(node.conclusion))}")
        for child in node.children:
            walk(child)

    walk(tree.root)
    for chain in tree.distractor_leaves:
        for f in chain:
            lines.append(f"distractor {format_formula(canon(f))}")
    for q in questions:
        lines.append(f"question {q.kind} {q.node_id} {q.polarity}")
    return "\n".join(lines)


def skeleton_hash(tree: ArgumentTree, questions: Sequence[Question]) -> str:
    return hashlib.sha256(canonical_skeleton(tree, questions).encode("utf-8")).hexdigest()


def rename_tree(tree: ArgumentTree, mapping: Mapping[str, str]) -> ArgumentTree:
    """Deep copy with atoms renamed; node ids and structure preserved."""

    def copy_node(node: TreeNode) -> TreeNode:
        return TreeNode(
            conclusion=rename_atoms(node.conclusion, mapping),
            rule=node.rule,
            children=[copy_node(c) for c in node.children],
            level=node.level,
            node_id=node.node_id,
        )

    return ArgumentTree(
        root=copy_node(tree.root),
        distractor_leaves=[
            [rename_atoms(f, mapping) for f in chain] for chain in tree.distractor_leaves
        ],
        atom_order=[mapping.get(a, a) for a in tree.atom_order],
        depth=tree.depth,
    )


@dataclass
class InstanceCore:
    """One variant before surface realization: concrete fact-id atoms."""

    variant_idx: int
    tree: ArgumentTree
    questions: list[Question]
    skeleton_hash: str
    skeleton_seed: int
    profile: DifficultyProfile
    fact_assignment: dict[str, str]


@dataclass
class VariantGroup:
    skeleton_seed: int
    profile: DifficultyProfile
    skeleton_hash: str
    variants: list[InstanceCore]


def make_variant_group(
    skeleton_seed: int,
    profile: DifficultyProfile,
    fact_ids: Sequence[str],
    *,
    variants: int = 5,
) -> VariantGroup:
    """Build one abstract tree and instantiate `variants` fact assignments.

    All variants share the skeleton hash; their atom-slot to fact-id
    assignments are drawn without replacement across the whole group, so no
    two variants share a fact. Every gold label is confirmed against the
    truth-table oracle once on the abstract tree (verdicts are invariant
    under atom renaming); a disagreement is a construction bug.
    """
    tree = build_tree(profile, skeleton_seed)
    questions = extract_questions(tree, profile, skeleton_seed)
    group_hash = skeleton_hash(tree, questions)

    premises = tree.all_premise_formulas()
    for q in questions:
        verdict = entails(premises, q.statement)
        if verdict is not q.gold:
            raise GenerationError(
                f"oracle disagrees with constructed label (seed={skeleton_seed}, "
                f"node={q.node_id}): got {verdict.value}, expected {q.gold.value}"
            )

    slots = tree.atom_order
    need = len(slots) * variants
    if len(fact_ids) < need:
        raise PoolCapacityError(
            f"fact pool of {len(fact_ids)} cannot cover {variants} disjoint "
            f"assignments of {len(slots)} atoms (need {need})"
        )
    rng = substream(skeleton_seed, "facts")
    drawn = rng.sample(list(fact_ids), need)

    members: list[InstanceCore] = []
    for v in range(variants):
        assignment = {
            slot: drawn[v * len(slots) + i] for i, slot in enumerate(slots)
        }
        concrete = rename_tree(tree, assignment)
        concrete_questions = [
            Question(
                rename_atoms(q.statement, assignment), q.gold, q.kind, q.node_id, q.polarity
            )
            for q in questions
        ]
        members.append(
            InstanceCore(
                variant_idx=v,
                tree=concrete,
                questions=concrete_questions,
                skeleton_hash=group_hash,
                skeleton_seed=skeleton_seed,
                profile=profile,
                fact_assignment=assignment,
            )
        )
    return VariantGroup(skeleton_seed, profile, group_hash, members)
