"""Shared test utilities: independent oracles and randomized formula draws.

naive_entails re-derives verdicts by literal row-by-row evaluation, giving the
packed-truth-table implementation an independent second route to agree with.
"""

from __future__ import annotations

import itertools
import random

from reasonkit.entail import Verdict
from reasonkit.logic import And, Atom, Formula, Implies, Not, Or, atoms_of, evaluate


def naive_entails(premises: list[Formula], statement: Formula) -> Verdict | None:
    """Row-by-row verdict; None when the premises have no model."""
    names = atoms_of([*premises, statement])
    holds_somewhere = False
    fails_somewhere = False
    any_model = False
    for values in itertools.product([False, True], repeat=len(names)):
        assignment = dict(zip(names, values))
        if all(evaluate(p, assignment) for p in premises):
            any_model = True
            if evaluate(statement, assignment):
                holds_somewhere = True
            else:
                fails_somewhere = True
        if holds_somewhere and fails_somewhere:
            return Verdict.UNKNOWN
    if not any_model:
        return None
    if holds_somewhere and not fails_somewhere:
        return Verdict.TRUE
    return Verdict.FALSE


def random_premise_set(rng: random.Random, names: list[str], size: int) -> list[Formula]:
    """Premises shaped like rule schemas (literals, implications, disjunctions)
    over a small atom pool, so forward chaining actually fires."""

    def literal() -> Formula:
        a = Atom(rng.choice(names))
        return Not(a) if rng.random() < 0.4 else a

    out: list[Formula] = []
    for _ in range(size):
        roll = rng.random()
        if roll < 0.25:
            out.append(literal())
        elif roll < 0.65:
            out.append(Implies(literal(), literal()))
        else:
            out.append(Or(literal(), literal()))
    return out


def random_formula(rng: random.Random, names: list[str], depth: int) -> Formula:
    """A random formula of nesting depth at most `depth` over given atoms."""
    if depth == 0 or rng.random() < 0.35:
        return Atom(rng.choice(names))
    kind = rng.randrange(4)
    if kind == 0:
        return Not(random_formula(rng, names, depth - 1))
    left = random_formula(rng, names, depth - 1)
    right = random_formula(rng, names, depth - 1)
    if kind == 1:
        return And(left, right)
    if kind == 2:
        return Or(left, right)
    return Implies(left, right)
