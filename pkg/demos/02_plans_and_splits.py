"""Inspect the default benchmark plan and its group-atomic splits.

The default plan fixes eight difficulty tiers whose group counts are all
divisible by 12, so a 10:1:1 split lands exactly with no rounding drift.
"""

import collections

from reasonkit import default_benchmark_plan, split_dataset
from reasonkit.dataset import generate_group
from reasonkit.surface import FactPool, TemplatePool

plan = default_benchmark_plan()
print(f"plan {plan.name!r}: {plan.total_groups} groups, "
      f"{plan.total_instances} instances, {plan.total_questions} questions\n")

print("depth  width  groups  subquestions  distractor_chains  questions")
for row in plan.rows:
    questions = row.groups * plan.variants * (row.num_subquestions + 1)
    print(f"{row.depth:>5}  {row.width:>5}  {row.groups:>6}  "
          f"{row.num_subquestions:>12}  {row.distractor_chains:>17}  "
          f"{questions:>9}")

# a scaled-down run keeps the ratios visible without the full cost
pool = FactPool.bundled()
templates = TemplatePool.default()
instances = []
for row in plan.rows[:3]:
    for g in range(12):
        instances.extend(generate_group(plan, row, g, pool, templates,
                                        master_seed=3))

splits = split_dataset(instances, ratios=(10, 1, 1), seed=0)
print(f"\nscaled-down run: {len(instances)} instances across "
      f"{len(instances) // plan.variants} groups")
for name, members in splits.items():
    by_depth = collections.Counter(i.depth for i in members)
    groups = len({i.group_id for i in members})
    print(f"  {name:<5} {groups:>3} groups  {len(members):>4} instances  "
          f"per-depth {dict(sorted(by_depth.items()))}")

# group atomicity: variants of one skeleton never straddle a split
placement = {}
for name, members in splits.items():
    for inst in members:
        placement.setdefault(inst.group_id, set()).add(name)
atomic = all(len(names) == 1 for names in placement.values())
print(f"\nevery group fully inside one split: {atomic}")
