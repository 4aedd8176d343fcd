"""Propositional formula AST, evaluation, and the text serialization format.

Formulas are immutable and compare structurally. The serialization is a
whitespace-separated prefix grammar:

    A:<id>          atom (id must contain no whitespace or parentheses)
    (NOT f)
    (AND f g)
    (OR f g)
    (IMP f g)

``parse_formula(format_formula(f)) == f`` holds for every formula, and
formatting a parsed canonical string reproduces it byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping


class FormulaSyntaxError(ValueError):
    """Raised when a serialized formula cannot be parsed."""


class MissingAtomError(KeyError):
    """Raised when an assignment lacks a value for an atom being evaluated."""


@dataclass(frozen=True)
class Formula:
    """Base class; only the subclasses below are constructed."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    __slots__ = ("name",)


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    __slots__ = ("child",)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    __slots__ = ("left", "right")


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    __slots__ = ("left", "right")


@dataclass(frozen=True)
class Implies(Formula):
    antecedent: Formula
    consequent: Formula

    __slots__ = ("antecedent", "consequent")


def subformulas(f: Formula) -> Iterator[Formula]:
    """Yield f and every subformula, preorder."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, (And, Or)):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, Implies):
            stack.append(node.consequent)
            stack.append(node.antecedent)


def atoms(f: Formula) -> list[str]:
    """Atom names in f, in first-occurrence preorder, without duplicates."""
    seen: dict[str, None] = {}
    for node in subformulas(f):
        if isinstance(node, Atom):
            seen.setdefault(node.name, None)
    return list(seen)


def atoms_of(formulas) -> list[str]:
    """First-occurrence atom order across a sequence of formulas."""
    seen: dict[str, None] = {}
    for f in formulas:
        for name in atoms(f):
            seen.setdefault(name, None)
    return list(seen)


def evaluate(f: Formula, assignment: Mapping[str, bool]) -> bool:
    """Truth value of f under a total assignment of its atoms."""
    if isinstance(f, Atom):
        try:
            return bool(assignment[f.name])
        except KeyError:
            raise MissingAtomError(f.name) from None
    if isinstance(f, Not):
        return not evaluate(f.child, assignment)
    if isinstance(f, And):
        return evaluate(f.left, assignment) and evaluate(f.right, assignment)
    if isinstance(f, Or):
        return evaluate(f.left, assignment) or evaluate(f.right, assignment)
    if isinstance(f, Implies):
        return (not evaluate(f.antecedent, assignment)) or evaluate(f.consequent, assignment)
    raise TypeError(f"not a formula: {f!r}")


# ==== serialization =========================================================

_FORBIDDEN_ID_CHARS = set("() \t\r\n")


def _check_atom_name(name: str) -> str:
    if not name or any(c in _FORBIDDEN_ID_CHARS for c in name):
        raise FormulaSyntaxError(f"atom id not serializable: {name!r}")
    return name


def format_formula(f: Formula) -> str:
    """Serialize to the prefix grammar."""
    if isinstance(f, Atom):
        return f"A:{_check_atom_name(f.name)}"
    if isinstance(f, Not):
        return f"(NOT {format_formula(f.child)})"
    if isinstance(f, And):
        return f"(AND {format_formula(f.left)} {format_formula(f.right)})"
    if isinstance(f, Or):
        return f"(OR {format_formula(f.left)} {format_formula(f.right)})"
    if isinstance(f, Implies):
        return f"(IMP {format_formula(f.antecedent)} {format_formula(f.consequent)})"
    raise TypeError(f"not a formula: {f!r}")


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    buf: list[str] = []
    for ch in text:
        if ch in "()":
            if buf:
                tokens.append("".join(buf))
                buf.clear()
            tokens.append(ch)
        elif ch.isspace():
            if buf:
                tokens.append("".join(buf))
                buf.clear()
        else:
            buf.append(ch)
    if buf:
        tokens.append("".join(buf))
    return tokens


_BINARY_HEADS = {"AND": And, "OR": Or, "IMP": Implies}


def parse_formula(text: str) -> Formula:
    """Parse the prefix grammar; raises FormulaSyntaxError on any defect."""
    tokens = _tokenize(text)
    pos = 0

    def fail(msg: str):
        raise FormulaSyntaxError(f"{msg} at token {pos} in {text!r}")

    def parse_one() -> Formula:
        nonlocal pos
        if pos >= len(tokens):
            fail("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens):
                fail("unexpected end of input")
            head = tokens[pos]
            pos += 1
            if head == "NOT":
                node: Formula = Not(parse_one())
            elif head in _BINARY_HEADS:
                left = parse_one()
                right = parse_one()
                node = _BINARY_HEADS[head](left, right)
            else:
                fail(f"unknown connective {head!r}")
            if pos >= len(tokens) or tokens[pos] != ")":
                fail("expected ')'")
            pos += 1
            return node
        if tok.startswith("A:"):
            name = tok[2:]
            if not name:
                fail("empty atom id")
            return Atom(name)
        fail(f"unexpected token {tok!r}")
        raise AssertionError  # unreachable

    result = parse_one()
    if pos != len(tokens):
        fail("trailing tokens")
    return result


def rename_atoms(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Structurally rename atoms; names absent from the mapping are kept."""
    if isinstance(f, Atom):
        return Atom(mapping.get(f.name, f.name))
    if isinstance(f, Not):
        return Not(rename_atoms(f.child, mapping))
    if isinstance(f, And):
        return And(rename_atoms(f.left, mapping), rename_atoms(f.right, mapping))
    if isinstance(f, Or):
        return Or(rename_atoms(f.left, mapping), rename_atoms(f.right, mapping))
    if isinstance(f, Implies):
        return Implies(rename_atoms(f.antecedent, mapping), rename_atoms(f.consequent, mapping))
    raise TypeError(f"not a formula: {f!r}")
