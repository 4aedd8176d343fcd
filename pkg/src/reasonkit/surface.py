"""Natural-language realization of formulas and prompt assembly.

Formulas over fact atoms are rendered into English sentences by recursive
template substitution, and rendered paragraphs plus question sentences are
spliced into fixed chat-style prompt scaffolds. All sampling is driven by a
caller-supplied random.Random so renders are reproducible.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from importlib import resources

from .entail import Verdict
from .logic import Atom, Formula, Implies, Not, Or, And

MIN_TEMPLATES_PER_CONSTRUCT = 10

CONSTRUCTS = ("statement", "negation", "conjunction", "implication", "disjunction")

_UNARY_CONSTRUCTS = {"statement", "negation"}

# compound premises get a statement wrapper this often; bare facts always do
COMPOUND_WRAP_RATE = 0.2

PROMPT_MODES = ("cot", "nocot")

_PROMPT_FILES = {"cot": "cot_prompt.txt", "nocot": "nocot_prompt.txt"}


class PoolFormatError(ValueError):
    """A fact pool file or template pool failed validation."""


class RealizationError(ValueError):
    """A formula could not be rendered with the given texts and templates."""


def _data_text(name: str) -> str:
    return (resources.files("reasonkit") / "data" / name).read_text(encoding="utf-8")


@dataclass(frozen=True)
class FactFilters:
    """Admission rules applied when loading a fact pool."""

    min_words: int = 4
    max_words: int = 30
    banned_substrings: tuple[str, ...] = ("?",)


_BAD_ID_CHARS = set("() \t\r\n")


@dataclass
class FactPool:
    """Ordered pool of fact sentences keyed by id.

    Texts are stored as given (no trailing period required); duplicate texts
    are dropped on load, duplicate ids are an error.
    """

    texts: dict[str, str] = field(default_factory=dict)
    dropped: int = 0

    @property
    def ids(self) -> list[str]:
        return list(self.texts)

    def __len__(self) -> int:
        return len(self.texts)

    def __getitem__(self, fact_id: str) -> str:
        return self.texts[fact_id]

    @classmethod
    def from_lines(
        cls,
        lines: Iterable[str],
        filters: FactFilters = FactFilters(),
        source: str = "<memory>",
    ) -> "FactPool":
        pool = cls()
        seen_texts = set()
        for lineno, raw in enumerate(lines, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1].strip():
                raise PoolFormatError(
                    f"{source}:{lineno}: expected 'id<TAB>text', got {line!r}"
                )
            fact_id, text = parts[0], parts[1].strip()
            if _BAD_ID_CHARS & set(fact_id):
                raise PoolFormatError(
                    f"{source}:{lineno}: fact id {fact_id!r} contains "
                    "whitespace or parentheses"
                )
            if fact_id in pool.texts:
                raise PoolFormatError(f"{source}:{lineno}: duplicate id {fact_id!r}")
            words = len(text.split())
            if (
                words < filters.min_words
                or words > filters.max_words
                or any(bad in text for bad in filters.banned_substrings)
                or text in seen_texts
            ):
                pool.dropped += 1
                continue
            seen_texts.add(text)
            pool.texts[fact_id] = text
        return pool

    @classmethod
    def load(cls, path: str, filters: FactFilters = FactFilters()) -> "FactPool":
        with open(path, encoding="utf-8") as handle:
            return cls.from_lines(handle, filters, source=path)

    @classmethod
    def bundled(cls, filters: FactFilters = FactFilters()) -> "FactPool":
        lines = _data_text("facts_demo.tsv").splitlines()
        return cls.from_lines(lines, filters, source="facts_demo.tsv")


@dataclass
class TemplatePool:
    """Sentence templates per construct.

    Unary constructs (statement, negation) use a {S} slot; binary ones
    (conjunction, implication, disjunction) use {P} and {Q}. Direct
    construction is unchecked so tests can pin single-template pools;
    ``load``/``default`` validate shape and minimum pool size.
    """

    constructs: dict[str, list[str]]

    @classmethod
    def _validated(cls, data: object, source: str) -> "TemplatePool":
        if not isinstance(data, dict):
            raise PoolFormatError(f"{source}: expected an object of template lists")
        constructs: dict[str, list[str]] = {}
        for name in CONSTRUCTS:
            templates = data.get(name)
            if not isinstance(templates, list) or not all(
                isinstance(t, str) for t in templates
            ):
                raise PoolFormatError(f"{source}: construct {name!r} missing or not "
                                      "a list of strings")
            if len(templates) < MIN_TEMPLATES_PER_CONSTRUCT:
                raise PoolFormatError(
                    f"{source}: construct {name!r} has {len(templates)} templates, "
                    f"needs at least {MIN_TEMPLATES_PER_CONSTRUCT}"
                )
            slots = ("{S}",) if name in _UNARY_CONSTRUCTS else ("{P}", "{Q}")
            for tmpl in templates:
                for slot in slots:
                    if slot not in tmpl:
                        raise PoolFormatError(
                            f"{source}: template {tmpl!r} in {name!r} lacks {slot}"
                        )
                if not tmpl.endswith("."):
                    raise PoolFormatError(
                        f"{source}: template {tmpl!r} in {name!r} must end with '.'"
                    )
            constructs[name] = list(templates)
        return cls(constructs)

    @classmethod
    def load(cls, path: str) -> "TemplatePool":
        import json

        with open(path, encoding="utf-8") as handle:
            return cls._validated(json.load(handle), source=path)

    @classmethod
    def default(cls) -> "TemplatePool":
        import json

        return cls._validated(json.loads(_data_text("expressions.json")),
                              source="expressions.json")


def _as_clause(sentence: str) -> str:
    clause = sentence.rstrip().rstrip(".")
    return clause[:1].lower() + clause[1:]


def _fill(template: str, **slots: str) -> str:
    out = template
    for name, value in slots.items():
        out = out.replace("{" + name + "}", value)
    return out


def _clause(formula: Formula, atom_texts: Mapping[str, str],
            templates: TemplatePool, rng: random.Random) -> str:
    if isinstance(formula, Atom):
        try:
            return _as_clause(atom_texts[formula.name])
        except KeyError:
            raise RealizationError(f"no surface text for atom {formula.name!r}") from None
    if isinstance(formula, Not):
        tmpl = rng.choice(templates.constructs["negation"])
        return _as_clause(_fill(tmpl, S=_clause(formula.child, atom_texts, templates, rng)))
    if isinstance(formula, And):
        construct = "conjunction"
        left, right = formula.left, formula.right
    elif isinstance(formula, Or):
        construct = "disjunction"
        left, right = formula.left, formula.right
    elif isinstance(formula, Implies):
        construct = "implication"
        left, right = formula.antecedent, formula.consequent
    else:
        raise RealizationError(f"cannot realize {type(formula).__name__}")
    tmpl = rng.choice(templates.constructs[construct])
    p = _clause(left, atom_texts, templates, rng)
    q = _clause(right, atom_texts, templates, rng)
    return _as_clause(_fill(tmpl, P=p, Q=q))


def realize(
    formula: Formula,
    atom_texts: Mapping[str, str],
    templates: TemplatePool,
    rng: random.Random,
    statement_wrap: bool = False,
) -> str:
    """Render a formula as one English sentence ending with a period.

    When ``statement_wrap`` is set and the formula is not a negation, the
    rendered clause is additionally framed by a statement template (the
    identity template "{S}." is part of the default pool, so wrapping still
    yields plain sentences some of the time). Negations already assert a
    truth value, so they are never double-framed.
    """

    if statement_wrap and not isinstance(formula, Not):
        tmpl = rng.choice(templates.constructs["statement"])
        body = _as_clause(_fill(tmpl, S=_clause(formula, atom_texts, templates, rng)))
    else:
        body = _clause(formula, atom_texts, templates, rng)
    return body[:1].upper() + body[1:] + "."


def should_wrap(formula: Formula, rng: random.Random) -> bool:
    """Decide whether a premise or asserted question gets a statement frame.

    Bare facts always get one so the paragraph asserts them explicitly;
    compound sentences are framed occasionally for variety. Consumes one
    rng draw for compounds, none for atoms or negations, so callers get
    reproducible draw sequences.
    """

    if isinstance(formula, Not):
        return False
    if isinstance(formula, Atom):
        return True
    return rng.random() < COMPOUND_WRAP_RATE


def canonical_answer_list(labels: Sequence[Verdict | str]) -> str:
    """Format gold labels the way the answer scaffold expects, e.g. [True, False]."""

    names = [lab.value if isinstance(lab, Verdict) else str(lab) for lab in labels]
    return "[" + ", ".join(names) + "]"


@dataclass(frozen=True)
class RenderedPrompt:
    """A fully substituted prompt ready to send to a model."""

    mode: str
    text: str
    num_questions: int


def load_prompt_template(mode: str) -> str:
    if mode not in _PROMPT_FILES:
        raise ValueError(f"unknown prompt mode {mode!r}, expected one of {PROMPT_MODES}")
    return _data_text(_PROMPT_FILES[mode])


def render_prompt(
    paragraph: str,
    question_texts: Sequence[str],
    mode: str = "cot",
    template: str | None = None,
) -> RenderedPrompt:
    """Splice a paragraph and question block into a prompt scaffold.

    Substitution is plain string replacement of the {num_q}, {paragraph} and
    {current_question} markers; the scaffold text itself is never reflowed.
    """

    if not question_texts:
        raise ValueError("at least one question is required")
    if template is None:
        template = load_prompt_template(mode)
    text = (
        template.replace("{num_q}", str(len(question_texts)))
        .replace("{paragraph}", paragraph)
        .replace("{current_question}", "\n".join(question_texts))
    )
    return RenderedPrompt(mode=mode, text=text, num_questions=len(question_texts))
