"""The seven deductive paradigms: schema application and forward chaining.

Premise matching is structural, not semantic: `apply_rule` expects premises in
schema order with exact subformula identity, so e.g. Disjunctive Syllogism
accepts [p ∨ q, ¬p] but not the commuted [q ∨ p, ¬p]. The forward chainer uses
the same structural matching, which makes its depth annotations an independent
certificate for generated argument trees.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .logic import Formula, Implies, Not, Or


class RuleApplicationError(ValueError):
    """Raised when premises do not match a rule's schema."""


class RuleKind(enum.Enum):
    MODUS_PONENS = "ModusPonens"
    MODUS_TOLLENS = "ModusTollens"
    HYPOTHETICAL_SYLLOGISM = "HypotheticalSyllogism"
    DISJUNCTIVE_SYLLOGISM = "DisjunctiveSyllogism"
    REDUCTIO_AD_ABSURDUM = "ReductioAdAbsurdum"
    CONSTRUCTIVE_DILEMMA = "ConstructiveDilemma"
    DISJUNCTION_ELIMINATION = "DisjunctionElimination"

    @property
    def arity(self) -> int:
        return _ARITY[self]

    @property
    def display_name(self) -> str:
        return _DISPLAY[self]


_ARITY = {
    RuleKind.MODUS_PONENS: 2,
    RuleKind.MODUS_TOLLENS: 2,
    RuleKind.HYPOTHETICAL_SYLLOGISM: 2,
    RuleKind.DISJUNCTIVE_SYLLOGISM: 2,
    RuleKind.REDUCTIO_AD_ABSURDUM: 2,
    RuleKind.CONSTRUCTIVE_DILEMMA: 3,
    RuleKind.DISJUNCTION_ELIMINATION: 3,
}

_DISPLAY = {
    RuleKind.MODUS_PONENS: "Modus Ponens",
    RuleKind.MODUS_TOLLENS: "Modus Tollens",
    RuleKind.HYPOTHETICAL_SYLLOGISM: "Hypothetical Syllogism",
    RuleKind.DISJUNCTIVE_SYLLOGISM: "Disjunctive Syllogism",
    RuleKind.REDUCTIO_AD_ABSURDUM: "Reductio ad Absurdum",
    RuleKind.CONSTRUCTIVE_DILEMMA: "Constructive Dilemma",
    RuleKind.DISJUNCTION_ELIMINATION: "Disjunction Elimination",
}

_SHAPE = {
    RuleKind.MODUS_PONENS: "[(IMP p q), p] => q",
    RuleKind.MODUS_TOLLENS: "[(IMP p q), (NOT q)] => (NOT p)",
    RuleKind.HYPOTHETICAL_SYLLOGISM: "[(IMP p q), (IMP q r)] => (IMP p r)",
    RuleKind.DISJUNCTIVE_SYLLOGISM: "[(OR p q), (NOT p)] => q",
    RuleKind.REDUCTIO_AD_ABSURDUM: "[(IMP p q), (IMP p (NOT q))] => (NOT p)",
    RuleKind.CONSTRUCTIVE_DILEMMA: "[(IMP p q), (IMP r s), (OR p r)] => (OR q s)",
    RuleKind.DISJUNCTION_ELIMINATION: "[(OR p q), (IMP p s), (IMP q s)] => s",
}


def _mismatch(kind: RuleKind, premises: Sequence[Formula]) -> RuleApplicationError:
    return RuleApplicationError(
        f"{kind.display_name} expects {_SHAPE[kind]}; got {len(premises)} premise(s) "
        "that do not fit the schema"
    )


def apply_rule(kind: RuleKind, premises: Sequence[Formula]) -> Formula:
    """Conclusion of one rule application; premises must be in schema order."""
    if len(premises) != kind.arity:
        raise _mismatch(kind, premises)

    if kind is RuleKind.MODUS_PONENS:
        imp, minor = premises
        if isinstance(imp, Implies) and minor == imp.antecedent:
            return imp.consequent
    elif kind is RuleKind.MODUS_TOLLENS:
        imp, neg = premises
        if isinstance(imp, Implies) and neg == Not(imp.consequent):
            return Not(imp.antecedent)
    elif kind is RuleKind.HYPOTHETICAL_SYLLOGISM:
        first, second = premises
        if (
            isinstance(first, Implies)
            and isinstance(second, Implies)
            and second.antecedent == first.consequent
        ):
            return Implies(first.antecedent, second.consequent)
    elif kind is RuleKind.DISJUNCTIVE_SYLLOGISM:
        disj, neg = premises
        if isinstance(disj, Or) and neg == Not(disj.left):
            return disj.right
    elif kind is RuleKind.REDUCTIO_AD_ABSURDUM:
        pos, negd = premises
        if (
            isinstance(pos, Implies)
            and isinstance(negd, Implies)
            and negd.antecedent == pos.antecedent
            and negd.consequent == Not(pos.consequent)
        ):
            return Not(pos.antecedent)
    elif kind is RuleKind.CONSTRUCTIVE_DILEMMA:
        first, second, disj = premises
        if (
            isinstance(first, Implies)
            and isinstance(second, Implies)
            and disj == Or(first.antecedent, second.antecedent)
        ):
            return Or(first.consequent, second.consequent)
    elif kind is RuleKind.DISJUNCTION_ELIMINATION:
        disj, first, second = premises
        if (
            isinstance(disj, Or)
            and isinstance(first, Implies)
            and isinstance(second, Implies)
            and first.antecedent == disj.left
            and second.antecedent == disj.right
            and first.consequent == second.consequent
        ):
            return first.consequent
    raise _mismatch(kind, premises)


def backward_options(conclusion: Formula) -> list[RuleKind]:
    """Rules able to derive a conclusion of this shape (generation helper)."""
    options = [
        RuleKind.MODUS_PONENS,
        RuleKind.DISJUNCTIVE_SYLLOGISM,
        RuleKind.DISJUNCTION_ELIMINATION,
    ]
    if isinstance(conclusion, Not):
        options += [RuleKind.MODUS_TOLLENS, RuleKind.REDUCTIO_AD_ABSURDUM]
    elif isinstance(conclusion, Implies):
        options.append(RuleKind.HYPOTHETICAL_SYLLOGISM)
    elif isinstance(conclusion, Or):
        options.append(RuleKind.CONSTRUCTIVE_DILEMMA)
    return options


def backward_premises(
    kind: RuleKind, conclusion: Formula, fresh: Callable[[], Formula]
) -> list[Formula]:
    """Premises (schema order) from which `kind` derives `conclusion` exactly.

    `fresh` supplies formulas for the unconstrained schema slots; using atoms
    never seen elsewhere keeps the growing premise set satisfiable.
    Guarantees apply_rule(kind, result) == conclusion.
    """
    if kind is RuleKind.MODUS_PONENS:
        x = fresh()
        return [Implies(x, conclusion), x]
    if kind is RuleKind.DISJUNCTIVE_SYLLOGISM:
        x = fresh()
        return [Or(x, conclusion), Not(x)]
    if kind is RuleKind.DISJUNCTION_ELIMINATION:
        x, y = fresh(), fresh()
        return [Or(x, y), Implies(x, conclusion), Implies(y, conclusion)]
    if kind is RuleKind.MODUS_TOLLENS:
        if isinstance(conclusion, Not):
            x = fresh()
            return [Implies(conclusion.child, x), Not(x)]
    elif kind is RuleKind.REDUCTIO_AD_ABSURDUM:
        if isinstance(conclusion, Not):
            x = fresh()
            return [Implies(conclusion.child, x), Implies(conclusion.child, Not(x))]
    elif kind is RuleKind.HYPOTHETICAL_SYLLOGISM:
        if isinstance(conclusion, Implies):
            x = fresh()
            return [Implies(conclusion.antecedent, x), Implies(x, conclusion.consequent)]
    elif kind is RuleKind.CONSTRUCTIVE_DILEMMA:
        if isinstance(conclusion, Or):
            x, y = fresh(), fresh()
            return [Implies(x, conclusion.left), Implies(y, conclusion.right), Or(x, y)]
    raise RuleApplicationError(
        f"{kind.display_name} cannot conclude a formula shaped like this; "
        f"schema is {_SHAPE[kind]}"
    )


# ==== forward chaining ======================================================


@dataclass(frozen=True)
class Derivation:
    """One rule application recorded by the forward chainer."""

    conclusion: Formula
    rule: RuleKind
    premises: tuple[Formula, ...]
    depth: int


@dataclass
class ClosureResult:
    """Deductive closure with minimal-depth annotations.

    depths maps every reachable formula to its minimal derivation depth
    (premises sit at depth 0); derivations holds one witness per derived
    formula. truncated is set when a budget stopped the chase early.
    """

    depths: dict[Formula, int]
    derivations: dict[Formula, Derivation]
    truncated: bool
    rounds: int

    def depth_of(self, f: Formula) -> int | None:
        return self.depths.get(f)


def _round_conclusions(known: dict[Formula, int]) -> dict[Formula, tuple[RuleKind, tuple]]:
    """All conclusions one structural rule application away from `known`."""
    implications = [f for f in known if isinstance(f, Implies)]
    disjunctions = [f for f in known if isinstance(f, Or)]
    by_antecedent: dict[Formula, list[Implies]] = {}
    for imp in implications:
        by_antecedent.setdefault(imp.antecedent, []).append(imp)

    out: dict[Formula, tuple[RuleKind, tuple]] = {}

    def emit(conclusion: Formula, rule: RuleKind, premises: tuple) -> None:
        if conclusion not in known and conclusion not in out:
            out[conclusion] = (rule, premises)

    for imp in implications:
        if imp.antecedent in known:
            emit(imp.consequent, RuleKind.MODUS_PONENS, (imp, imp.antecedent))
        neg = Not(imp.consequent)
        if neg in known:
            emit(Not(imp.antecedent), RuleKind.MODUS_TOLLENS, (imp, neg))
        for nxt in by_antecedent.get(imp.consequent, ()):
            emit(
                Implies(imp.antecedent, nxt.consequent),
                RuleKind.HYPOTHETICAL_SYLLOGISM,
                (imp, nxt),
            )
        refut = Implies(imp.antecedent, Not(imp.consequent))
        if refut in known:
            emit(Not(imp.antecedent), RuleKind.REDUCTIO_AD_ABSURDUM, (imp, refut))

    for disj in disjunctions:
        neg_left = Not(disj.left)
        if neg_left in known:
            emit(disj.right, RuleKind.DISJUNCTIVE_SYLLOGISM, (disj, neg_left))
        left_imps = by_antecedent.get(disj.left, ())
        right_imps = by_antecedent.get(disj.right, ())
        for li in left_imps:
            for ri in right_imps:
                emit(
                    Or(li.consequent, ri.consequent),
                    RuleKind.CONSTRUCTIVE_DILEMMA,
                    (li, ri, disj),
                )
                if li.consequent == ri.consequent:
                    emit(li.consequent, RuleKind.DISJUNCTION_ELIMINATION, (disj, li, ri))
    return out


def forward_closure(
    premises: Iterable[Formula],
    *,
    max_steps: int = 16,
    max_formulas: int = 5000,
    stop_at: Formula | None = None,
) -> ClosureResult:
    """Chase the premise set to a fixpoint, level by level.

    Level-by-level saturation makes the recorded depth of each formula its
    minimal derivation depth (1 + max over premise depths, minimized over all
    derivations). Passing `stop_at` ends the chase at the end of the first
    level where that formula appears; its depth annotation is already final.
    """
    known: dict[Formula, int] = {}
    for p in premises:
        known.setdefault(p, 0)
    derivations: dict[Formula, Derivation] = {}
    truncated = False
    rounds = 0
    if stop_at is not None and stop_at in known:
        return ClosureResult(known, derivations, False, 0)

    while True:
        new = _round_conclusions(known)
        if not new:
            break
        if rounds >= max_steps:
            truncated = True
            break
        rounds += 1
        for conclusion, (rule, used) in new.items():
            known[conclusion] = rounds
            derivations[conclusion] = Derivation(conclusion, rule, used, rounds)
        if stop_at is not None and stop_at in known:
            return ClosureResult(known, derivations, False, rounds)
        if len(known) > max_formulas:
            truncated = True
            break
    return ClosureResult(known, derivations, truncated, rounds)


def minimal_depth(
    premises: Iterable[Formula], target: Formula, *, max_steps: int = 16
) -> int | None:
    """Minimal derivation depth of `target`, or None if unreachable in budget."""
    result = forward_closure(premises, max_steps=max_steps, stop_at=target)
    return result.depth_of(target)
