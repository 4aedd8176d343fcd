"""Generate a small dataset and re-verify one instance from its record.

Every instance ships with the full derivation tree, so a consumer can
re-prove the gold labels without trusting the generator.
"""

from reasonkit import (
    DatasetPlan,
    format_formula,
    FactPool,
    PlanRow,
    TemplatePool,
    generate_dataset,
    verify_instance,
)

plan = DatasetPlan(name="demo", rows=(
    PlanRow(depth=3, width=2, groups=2, num_subquestions=2,
            distractor_chains=1),
))
pool = FactPool.bundled()
templates = TemplatePool.default()

instances = list(generate_dataset(plan, pool, templates, master_seed=7))
print(f"generated {len(instances)} instances "
      f"({plan.total_groups} groups x {plan.variants} variants)\n")

inst = instances[0]
print(f"instance {inst.instance_id}  depth={inst.depth}  width={inst.width}")
print(f"paragraph:\n  {inst.paragraph}\n")
print("questions:")
for i, q in enumerate(inst.questions):
    print(f"  {i}. [{q.label.value:>7}] {q.text}")

def show(node, indent="  "):
    tag = node.rule.value if node.rule else "premise"
    print(f"{indent}{node.node_id} <{tag}> {format_formula(node.conclusion)}")
    for child in node.children:
        show(child, indent + "  ")

print("\nderivation tree (conclusion at the root):")
show(inst.tree)
print(f"\ndistractor premises sit at paragraph positions "
      f"{inst.distractor_premise_idx}")

report = verify_instance(inst.to_record())
print(f"\nindependent re-verification: passed={report.passed}")
for check in report.checks:
    print(f"  {check.name:<16} ok={check.passed}")
