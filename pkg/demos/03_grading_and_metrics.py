"""Grade synthetic responses and walk through the metrics report.

Three response styles show the reward tiers: clean and correct, correct
but badly formatted, and an outright refusal to commit.
"""

from reasonkit import (
    DatasetPlan,
    FactPool,
    PlanRow,
    TemplatePool,
    canonical_answer_list,
    compute_metrics,
    generate_dataset,
    grade_response,
)

plan = DatasetPlan(name="demo", rows=(
    PlanRow(depth=1, width=1, groups=4, num_subquestions=0,
            distractor_chains=1),
    PlanRow(depth=2, width=1, groups=2, num_subquestions=1,
            distractor_chains=1),
))
instances = list(generate_dataset(plan, FactPool.bundled(),
                                  TemplatePool.default(), master_seed=11))

records = []
styles = {"clean": 0, "sloppy": 0, "refusal": 0}
for i, inst in enumerate(instances):
    gold = canonical_answer_list([q.label for q in inst.questions])
    if i % 3 == 0:
        text = f"<think>derive each step</think>\n<answer> {gold} </answer>"
        styles["clean"] += 1
    elif i % 3 == 1:
        text = f"<answer> {gold} </answer>"  # right labels, no reasoning close
        styles["sloppy"] += 1
    else:
        unknowns = canonical_answer_list(["Unknown"] * len(inst.questions))
        text = f"<think>unsure</think>\n<answer> {unknowns} </answer>"
        styles["refusal"] += 1
    result = grade_response(inst, text, mode="cot")
    records.extend(result.records)
    if i < 3:
        print(f"{inst.instance_id}: format={result.parsed.format_ok} "
              f"reward={result.reward.total:+.1f} "
              f"correct={[r.correct for r in result.records]}")

print(f"\nresponse mix: {styles}")

report = compute_metrics(records, beta=0.5, min_answer_rate=0.3)
print(f"\noverall ({report.overall.questions} questions):")
print(f"  accuracy     {report.overall.accuracy:.4f}")
print(f"  answer rate  {report.overall.answer_rate:.4f}")
print(f"  precision    {report.overall.precision:.4f}")
print(f"  f-beta       {report.overall.f_beta:.4f}  "
      f"(zeroed whenever answer rate <= {report.min_answer_rate})")
print(f"  consistency  {report.overall.consistency_ratio:.4f}")

print("\nper depth vs unweighted depth average:")
for depth, block in sorted(report.per_depth.items()):
    print(f"  depth {depth}: accuracy {block.accuracy:.4f} "
          f"over {block.questions} questions")
print(f"  depth-average accuracy: {report.depth_average['accuracy']:.4f}")
print(f"\nconsistency rule: {report.consistency_definition}")
