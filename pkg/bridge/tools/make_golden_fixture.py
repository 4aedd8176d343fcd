"""Build the golden parity fixture from the core kernel alone.

Deliberately avoids importing reasonkit_bridge: the expected arrays come
straight from per-group core calls, so the bridge's batch path is checked
against an independent route. Rerunning reproduces the file byte for byte.

    python3 tools/make_golden_fixture.py src/reasonkit_bridge/data/golden_fixture.json
"""

import json
import random
import sys

from reasonkit import KernelConfig, Rollout, compute_advantages, estimate_bounds

SEED = 90210
CONFIG = {"lambda_q": 0.8, "tau": 8.0, "epsilon": 1e-6,
          "skip_uniform_groups": True}


def build_rollouts():
    rng = random.Random(SEED)
    rollouts = []
    # calibration history so two buckets get real percentile windows
    for bucket in ("depth2", "depth5"):
        for i in range(40):
            rollouts.append(Rollout(
                prompt_id=f"cal-{bucket}-{i // 8}", bucket=bucket,
                length=rng.randint(120, 480), r_task=3.0,
                l_cot=round(rng.uniform(-1.2, -0.4), 6),
                l_nocot=round(rng.uniform(-2.6, -1.4), 6), correct=True))
    # evaluation groups: mixed outcomes, a uniform-correct group (skipped
    # under the filter), an unknown bucket, and out-of-band lengths
    specs = [
        ("q-mixed", "depth2", [(3.0, True, 200), (-0.5, False, 260),
                               (-2.5, False, 900), (3.0, True, 30)]),
        ("q-uniform", "depth5", [(3.0, True, 300), (3.0, True, 310),
                                 (3.0, True, 290)]),
        ("q-nobucket", "depth9", [(3.0, True, 2000), (-3.0, False, 10)]),
        ("q-wide", "depth5", [(3.0, True, 250), (-0.5, False, 700),
                              (-1.0, False, 80), (3.0, True, 420),
                              (-2.5, False, 501)]),
    ]
    groups = []
    for prompt_id, bucket, members in specs:
        group = []
        for r_task, correct, length in members:
            group.append(Rollout(
                prompt_id=prompt_id, bucket=bucket, length=length,
                r_task=r_task,
                l_cot=round(rng.uniform(-1.5, -0.3), 6),
                l_nocot=round(rng.uniform(-2.8, -1.0), 6),
                correct=correct))
        groups.append(group)
    return rollouts, groups


def main(out_path):
    history, groups = build_rollouts()
    bounds = estimate_bounds(history, min_samples=20, step=1)
    config = KernelConfig(**CONFIG)

    flat = [r for group in groups for r in group]
    batch = {
        "r_task": [r.r_task for r in flat],
        "l_cot": [r.l_cot for r in flat],
        "l_nocot": [r.l_nocot for r in flat],
        "lengths": [float(r.length) for r in flat],
        "bucket_ids": [r.bucket for r in flat],
        "correct": [r.correct for r in flat],
        "format_ok": [r.format_ok for r in flat],
        "group_sizes": [len(group) for group in groups],
        "prompt_ids": [group[0].prompt_id for group in groups],
    }

    expected = {name: [] for name in
                ("r_q", "r", "a_tilde", "g", "a_hat", "skipped")}
    for group in groups:
        for res in compute_advantages(group, bounds, config):
            expected["r_q"].append(res.r_q)
            expected["r"].append(res.r)
            expected["a_tilde"].append(res.a_tilde)
            expected["g"].append(res.g)
            expected["a_hat"].append(res.a_hat)
            expected["skipped"].append(res.skipped)

    fixture = {
        "schema": 1,
        "seed": SEED,
        "config": CONFIG,
        "bounds": [bounds[k].to_record() for k in sorted(bounds, key=str)],
        "batch": batch,
        "expected": expected,
    }
    with open(out_path, "w", encoding="utf-8") as handle:
        json.dump(fixture, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"wrote {out_path}: {len(groups)} groups, {len(flat)} members, "
          f"{len(fixture['bounds'])} bounds")


if __name__ == "__main__":
    main(sys.argv[1])
