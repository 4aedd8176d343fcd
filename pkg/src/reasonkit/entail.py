"""Exhaustive truth-table entailment with a three-valued verdict.

The verdict of a statement s against premises P is:

    TRUE     every assignment satisfying all of P satisfies s
    FALSE    every assignment satisfying all of P falsifies s
    UNKNOWN  s holds on some satisfying assignments and fails on others

Enumeration is exact: each formula's truth table over the n relevant atoms is
packed into a Python int (bit r = value under assignment r, where atom i takes
bit i of r), so the full 2^n-row table is evaluated with a handful of bitwise
operations. The row-by-row evaluator in the test suite is the independent
cross-check for this packing.
"""

from __future__ import annotations

import enum
from typing import Iterable, Sequence

from .logic import And, Atom, Formula, Implies, Not, Or, atoms_of

DEFAULT_ATOM_CAP = 24


class AtomCapacityError(ValueError):
    """Raised when a query involves more atoms than the enumeration cap."""


class UnsatisfiablePremisesError(ValueError):
    """Raised when the premise set has no satisfying assignment.

    Generated instances are satisfiable by construction, so hitting this on
    generator output signals a generator bug rather than a user error.
    """


class Verdict(enum.Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"

    @classmethod
    def from_label(cls, label: str) -> "Verdict | None":
        """Case-insensitive label lookup; None when the label is not a verdict."""
        key = label.strip().lower()
        for v in cls:
            if v.value.lower() == key:
                return v
        return None


# ==== packed truth tables ===================================================

_PATTERN_CACHE: dict[tuple[int, int], int] = {}
_PATTERN_CACHE_MAX_N = 16  # tables above 64 Kbit are cheap to rebuild, skip caching


def _atom_pattern(n_atoms: int, index: int) -> int:
    """Packed column of atom `index` over all 2^n assignments."""
    key = (n_atoms, index)
    cached = _PATTERN_CACHE.get(key)
    if cached is not None:
        return cached
    half = 1 << index
    unit = ((1 << half) - 1) << half  # `half` zeros then `half` ones
    width = half << 1
    total = 1 << n_atoms
    pattern = unit
    while width < total:
        pattern |= pattern << width
        width <<= 1
    if n_atoms <= _PATTERN_CACHE_MAX_N:
        _PATTERN_CACHE[key] = pattern
    return pattern


def _table(f: Formula, index: dict[str, int], n: int, full: int, memo: dict[Formula, int]) -> int:
    cached = memo.get(f)
    if cached is not None:
        return cached
    if isinstance(f, Atom):
        result = _atom_pattern(n, index[f.name])
    elif isinstance(f, Not):
        result = _table(f.child, index, n, full, memo) ^ full
    elif isinstance(f, And):
        result = _table(f.left, index, n, full, memo) & _table(f.right, index, n, full, memo)
    elif isinstance(f, Or):
        result = _table(f.left, index, n, full, memo) | _table(f.right, index, n, full, memo)
    elif isinstance(f, Implies):
        a = _table(f.antecedent, index, n, full, memo)
        result = (a ^ full) | _table(f.consequent, index, n, full, memo)
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[f] = result
    return result


def _premise_table(
    formulas: Sequence[Formula], atom_order: Sequence[str], atom_cap: int
) -> tuple[int, int, dict[str, int], dict[Formula, int]]:
    n = len(atom_order)
    if n > atom_cap:
        raise AtomCapacityError(f"{n} atoms exceeds the enumeration cap of {atom_cap}")
    full = (1 << (1 << n)) - 1
    index = {name: i for i, name in enumerate(atom_order)}
    memo: dict[Formula, int] = {}
    table = full
    for f in formulas:
        table &= _table(f, index, n, full, memo)
        if table == 0:
            break
    return table, full, index, memo


def satisfiable(formulas: Iterable[Formula], *, atom_cap: int = DEFAULT_ATOM_CAP) -> bool:
    """True when some assignment satisfies every formula jointly."""
    fs = list(formulas)
    table, _, _, _ = _premise_table(fs, atoms_of(fs), atom_cap)
    return table != 0


def entails(
    premises: Iterable[Formula],
    statement: Formula,
    *,
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> Verdict:
    """Three-valued verdict of `statement` against jointly-true `premises`.

    Raises UnsatisfiablePremisesError when the premises admit no model and
    AtomCapacityError when the combined atom count exceeds `atom_cap`.
    """
    prems = list(premises)
    atom_order = atoms_of([*prems, statement])
    prem_table, full, index, memo = _premise_table(prems, atom_order, atom_cap)
    if prem_table == 0:
        raise UnsatisfiablePremisesError(f"premise set of size {len(prems)} has no model")
    s_table = _table(statement, index, len(atom_order), full, memo)
    if prem_table & ~s_table == 0:
        return Verdict.TRUE
    if prem_table & s_table == 0:
        return Verdict.FALSE
    return Verdict.UNKNOWN
