"""Score paired trace/no-trace responses and bucket confidence shifts.

Uses the deterministic mock scorer, configured so the presence of a
closed reasoning trace raises the gold answer's log-probs; a real
deployment swaps in HttpScorerClient against a log-prob endpoint.
"""

from reasonkit import (
    DatasetPlan,
    FactPool,
    MockScorer,
    PlanRow,
    TemplatePool,
    Verdict,
    build_teacher_forced_pair,
    canonical_answer_list,
    generate_dataset,
    confidence_analysis,
)

plan = DatasetPlan(name="demo", rows=(
    PlanRow(depth=2, width=1, groups=8, num_subquestions=1,
            distractor_chains=1),
))
instances = list(generate_dataset(plan, FactPool.bundled(),
                                  TemplatePool.default(), master_seed=23))


def flip(labels):
    return [Verdict.FALSE if lab is Verdict.TRUE else Verdict.TRUE
            for lab in labels]


# alternate the four transition patterns: (nocot right?, cot right?)
patterns = ((True, True), (False, True), (True, False), (False, False))
samples = []
for i, inst in enumerate(instances):
    gold = [q.label for q in inst.questions]
    nocot_right, cot_right = patterns[i % 4]
    cot_labels = gold if cot_right else flip(gold)
    nocot_labels = gold if nocot_right else flip(gold)
    cot = (f"work through both steps</think>\n"
           f"<answer> {canonical_answer_list(cot_labels)} </answer>")
    nocot = f" {canonical_answer_list(nocot_labels)} </answer>"
    samples.append((inst, cot, nocot))

inst, cot, _ = samples[0]
pair = build_teacher_forced_pair(inst, cot)
print("teacher-forced pair for one sample:")
print(f"  cot context ends:   ...{pair.cot_context[-60:]!r}")
print(f"  nocot context ends: ...{pair.nocot_context[-60:]!r}")
print(f"  gold continuation:  {pair.gold_text!r}")
print(f"  fallback anchor:    {pair.fallback_used}\n")

scorer = MockScorer({"</think>": 2.0})
analysis = confidence_analysis(scorer, samples)

print(f"{len(analysis.records)} paired samples; transition buckets "
      f"(letters are no-trace then trace, W=wrong, R=right):")
for name in ("WR", "RR", "WW", "RW"):
    stats = analysis.buckets[name]
    print(f"  {name}: n={stats.n:>2}  mean gold-evidence shift "
          f"{stats.mean_delta:+.4f}  mean quality reward "
          f"{stats.mean_r_q:+.4f}")

wr = analysis.buckets["WR"]
print(f"\nthe WR bucket (trace fixed a wrong answer) shows a positive "
      f"shift: {wr.mean_delta > 0}")
