"""Surface realization and prompt rendering tests.

Expected sentences are written out by hand from the template text; coverage
and determinism checks drive the default pools with seeded rng streams.
"""

import random

import pytest

from reasonkit.entail import Verdict
from reasonkit.logic import Atom, Implies, Not, Or
from reasonkit.surface import (
    FactFilters,
    FactPool,
    PoolFormatError,
    RealizationError,
    TemplatePool,
    canonical_answer_list,
    load_prompt_template,
    realize,
    render_prompt,
    should_wrap,
)


def single_template_pool(**overrides):
    """Pool with one fixed template per construct, overridable per test."""
    base = {
        "statement": ["It is true that {S}."],
        "negation": ["The claim that {S} is false."],
        "conjunction": ["{P}, and {Q}."],
        "implication": ["Provided that {P}, we know that {Q}."],
        "disjunction": ["Either {P} or {Q}."],
    }
    base.update(overrides)
    return TemplatePool(base)


class TestFactPool:
    def test_loads_tab_separated_lines(self):
        pool = FactPool.from_lines([
            "a1\tthe gate is painted green",
            "a2\tthe bell rings at noon",
        ])
        assert pool.ids == ["a1", "a2"]
        assert pool["a2"] == "the bell rings at noon"
        assert pool.dropped == 0

    def test_filters_short_long_and_questions(self):
        lines = [
            "a1\ttoo short",
            "a2\t" + " ".join(["word"] * 31),
            "a3\tis the gate painted green?",
            "a4\tthe gate is painted green",
        ]
        pool = FactPool.from_lines(lines)
        assert pool.ids == ["a4"]
        assert pool.dropped == 3

    def test_duplicate_text_dropped_duplicate_id_rejected(self):
        pool = FactPool.from_lines([
            "a1\tthe gate is painted green",
            "a2\tthe gate is painted green",
        ])
        assert pool.ids == ["a1"]
        assert pool.dropped == 1
        with pytest.raises(PoolFormatError, match="line 2|:2"):
            FactPool.from_lines([
                "a1\tthe gate is painted green",
                "a1\tthe bell rings at noon",
            ], source="line")

    def test_malformed_line_reports_position(self):
        with pytest.raises(PoolFormatError, match="pool.tsv:1"):
            FactPool.from_lines(["no tab here"], source="pool.tsv")
        with pytest.raises(PoolFormatError, match="whitespace or parentheses"):
            FactPool.from_lines(["bad id\tthe gate is painted green"])

    def test_blank_lines_skipped(self):
        pool = FactPool.from_lines(["", "a1\tthe gate is painted green", "   "])
        assert pool.ids == ["a1"]

    def test_custom_filters(self):
        pool = FactPool.from_lines(
            ["a1\tjust two"],
            filters=FactFilters(min_words=2, max_words=2),
        )
        assert pool.ids == ["a1"]

    def test_bundled_pool(self):
        pool = FactPool.bundled()
        assert len(pool) == 1600
        assert pool.dropped == 0
        for text in list(pool.texts.values())[:50]:
            words = len(text.split())
            assert 4 <= words <= 30
            assert "?" not in text


class TestTemplatePool:
    def test_default_pool_loads_and_validates(self):
        pool = TemplatePool.default()
        for name in ("statement", "negation", "conjunction", "implication",
                     "disjunction"):
            assert len(pool.constructs[name]) >= 10

    def test_default_pool_contains_required_templates(self):
        pool = TemplatePool.default()
        assert "The claim that {S} is false." in pool.constructs["negation"]
        assert "Provided that {P}, we know that {Q}." in pool.constructs["implication"]
        assert "{S}." in pool.constructs["statement"]
        assert "It is a common misconception that {S}." in pool.constructs["negation"]

    def test_load_rejects_small_pool(self, tmp_path):
        import json

        data = TemplatePool.default().constructs.copy()
        data["negation"] = data["negation"][:3]
        path = tmp_path / "expr.json"
        path.write_text(json.dumps(data))
        with pytest.raises(PoolFormatError, match="at least 10"):
            TemplatePool.load(str(path))

    def test_load_rejects_missing_slot(self, tmp_path):
        import json

        data = TemplatePool.default().constructs.copy()
        data["implication"] = ["If {P}, then something."] * 10
        path = tmp_path / "expr.json"
        path.write_text(json.dumps(data))
        with pytest.raises(PoolFormatError, match="lacks"):
            TemplatePool.load(str(path))

    def test_load_rejects_missing_period(self, tmp_path):
        import json

        data = TemplatePool.default().constructs.copy()
        data["statement"] = ["It is true that {S}"] * 10
        path = tmp_path / "expr.json"
        path.write_text(json.dumps(data))
        with pytest.raises(PoolFormatError, match="end with"):
            TemplatePool.load(str(path))


class TestRealize:
    def test_atom_passes_through(self):
        texts = {"q": "Alice studies."}
        out = realize(Atom("q"), texts, single_template_pool(), random.Random(0))
        assert out == "Alice studies."

    def test_atom_without_period_gets_one(self):
        texts = {"q": "the gate is painted green"}
        out = realize(Atom("q"), texts, single_template_pool(), random.Random(0))
        assert out == "The gate is painted green."

    def test_negation_template(self):
        texts = {"q": "alice studies"}
        out = realize(Not(Atom("q")), texts, single_template_pool(), random.Random(3))
        assert out == "The claim that alice studies is false."

    def test_implication_template(self):
        texts = {"p": "the gate is open", "q": "the bell rings at noon"}
        out = realize(Implies(Atom("p"), Atom("q")), texts, single_template_pool(),
                      random.Random(5))
        assert out == "Provided that the gate is open, we know that the bell rings at noon."

    def test_nested_formula_embeds_clauses(self):
        texts = {"p": "the gate is open", "q": "the bell rings", "r": "the dog barks"}
        formula = Implies(Not(Atom("p")), Or(Atom("q"), Atom("r")))
        out = realize(formula, texts, single_template_pool(), random.Random(1))
        assert out == ("Provided that the claim that the gate is open is false, "
                       "we know that either the bell rings or the dog barks.")

    def test_statement_wrap(self):
        texts = {"q": "alice studies"}
        out = realize(Atom("q"), texts, single_template_pool(), random.Random(0),
                      statement_wrap=True)
        assert out == "It is true that alice studies."

    def test_statement_wrap_skips_negations(self):
        texts = {"q": "alice studies"}
        out = realize(Not(Atom("q")), texts, single_template_pool(), random.Random(0),
                      statement_wrap=True)
        assert out == "The claim that alice studies is false."

    def test_missing_atom_text_raises(self):
        with pytest.raises(RealizationError, match="zz"):
            realize(Atom("zz"), {}, single_template_pool(), random.Random(0))

    def test_sentences_capitalized_and_terminated(self):
        pool = TemplatePool.default()
        texts = {"p": "the gate is open", "q": "the bell rings at noon"}
        rng = random.Random(11)
        for _ in range(200):
            out = realize(Implies(Atom("p"), Atom("q")), texts, pool, rng)
            assert out[0].isupper()
            assert out.endswith(".")
            assert "{" not in out and "}" not in out

    @pytest.mark.parametrize("construct,formula", [
        ("negation", Not(Atom("p"))),
        ("implication", Implies(Atom("p"), Atom("q"))),
        ("disjunction", Or(Atom("p"), Atom("q"))),
    ])
    def test_template_coverage_over_seeded_renders(self, construct, formula):
        # every template in the pool must appear within 1000 renders
        pool = TemplatePool.default()
        texts = {"p": "the gate is open", "q": "the bell rings at noon"}
        rng = random.Random(7)
        seen = set()
        for _ in range(1000):
            seen.add(realize(formula, texts, pool, rng))
        expected = set()
        for tmpl in pool.constructs[construct]:
            filled = tmpl.replace("{S}", texts["p"]).replace(
                "{P}", texts["p"]).replace("{Q}", texts["q"])
            expected.add(filled[:1].upper() + filled[1:])
        assert expected <= seen

    def test_deterministic_under_seed(self):
        pool = TemplatePool.default()
        texts = {"p": "the gate is open", "q": "the bell rings at noon"}
        formula = Implies(Not(Atom("p")), Atom("q"))
        first = [realize(formula, texts, pool, random.Random(s)) for s in range(40)]
        second = [realize(formula, texts, pool, random.Random(s)) for s in range(40)]
        assert first == second
        assert len(set(first)) > 5

    def test_should_wrap_policy(self):
        rng = random.Random(0)
        assert should_wrap(Atom("p"), rng) is True
        assert should_wrap(Not(Atom("p")), rng) is False
        hits = sum(
            should_wrap(Implies(Atom("p"), Atom("q")), random.Random(i))
            for i in range(2000)
        )
        assert 0.15 < hits / 2000 < 0.25


class TestAnswerList:
    def test_formats_verdicts(self):
        assert canonical_answer_list([Verdict.TRUE, Verdict.FALSE]) == "[True, False]"
        assert canonical_answer_list([Verdict.UNKNOWN]) == "[Unknown]"

    def test_accepts_strings(self):
        assert canonical_answer_list(["True", "Unknown"]) == "[True, Unknown]"


class TestPrompts:
    def test_templates_load(self):
        cot = load_prompt_template("cot")
        nocot = load_prompt_template("nocot")
        assert cot.startswith("<|im_start|>system\n")
        assert cot.endswith("<|im_start|>assistant\n<think>")
        assert nocot.endswith("<|im_start|>assistant\n<answer>")

    def test_mode_specific_wording(self):
        # the two scaffolds differ in ellipsis style and unknown-rule phrasing
        cot = load_prompt_template("cot")
        nocot = load_prompt_template("nocot")
        assert "[True, False…]" in cot
        assert "[True, False...]" in nocot
        assert "of the statement from the premises" in cot
        assert "of the statement based on the premises" in nocot
        assert "<think>" not in nocot

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError, match="unknown prompt mode"):
            load_prompt_template("freeform")

    def test_substitution(self):
        prompt = render_prompt(
            "The gate is open. If the gate is open, then the bell rings.",
            ["Is it true that the bell rings?".replace("?", "."),
             "The gate is open."],
            mode="cot",
        )
        assert "final answer list for 2 question(s)" in prompt.text
        assert "Paragraph: The gate is open. If the gate is open, then the "\
               "bell rings.\n" in prompt.text
        assert "Is it true that the bell rings.\nThe gate is open." in prompt.text
        assert "{num_q}" not in prompt.text
        assert "{paragraph}" not in prompt.text
        assert "{current_question}" not in prompt.text
        assert prompt.num_questions == 2
        assert prompt.text.endswith("<think>")

    def test_nocot_substitution_ends_with_answer_tag(self):
        prompt = render_prompt("The gate is open.", ["The bell rings."],
                               mode="nocot")
        assert "final answer list for 1 question(s)" in prompt.text
        assert prompt.text.endswith("<answer>")

    def test_requires_questions(self):
        with pytest.raises(ValueError, match="at least one question"):
            render_prompt("The gate is open.", [], mode="cot")
