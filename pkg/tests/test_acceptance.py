"""Acceptance gate: eleven checks, one printed pass/fail line each.

Run with -s (or read the -v test lines) to see the per-criterion report.
The heavy fixtures are session-scoped so the 10,000-instance soundness
sweep is generated once and shared with the depth-exactness check.
"""

import json
import math
import time
from pathlib import Path

import pytest

from reasonkit.dataset import (
    default_benchmark_plan,
    generate_dataset,
    write_dataset,
)
from reasonkit.entail import Verdict, entails
from reasonkit.grading import (
    GradedRecord,
    TASK_REWARD_IMAGE,
    compute_metrics,
    f_beta_score,
    parse_response,
    task_reward,
)
from reasonkit.kernel import (
    KernelConfig,
    LengthBounds,
    Rollout,
    compute_advantages,
    group_advantages,
    length_attenuation,
    reasoning_quality_reward,
)
from reasonkit.rules import minimal_depth
from reasonkit.scoring import (
    ContractViolationError,
    HttpScorerClient,
    MockScorer,
    confidence_analysis,
)
from reasonkit.seeds import substream_seed
from reasonkit.surface import (
    FactPool,
    TemplatePool,
    canonical_answer_list,
    load_prompt_template,
    render_prompt,
)
from reasonkit.trees import make_variant_group
from reasonkit.dataset import DatasetPlan, PlanRow

from httpstub import StubServer

ACCEPT_SEED = 20260817
DATA_DIR = Path(__file__).parent / "data"


def report(num, name, ok, detail):
    line = f"criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line, flush=True)
    return line


@pytest.fixture(scope="session")
def seeded_cores():
    """250 groups x 5 variants per depth tier: 10,000 instance cores."""

    fact_ids = [f"v{i:05d}" for i in range(2000)]
    cores = {}
    start = time.perf_counter()
    for row in default_benchmark_plan().rows:
        profile = row.profile()
        per_depth = []
        for g in range(250):
            seed = substream_seed(ACCEPT_SEED, "accept", row.depth, g)
            group = make_variant_group(seed, profile, fact_ids)
            per_depth.extend(group.variants)
        cores[row.depth] = per_depth
    elapsed = time.perf_counter() - start
    return cores, elapsed


@pytest.fixture(scope="session")
def full_run(tmp_path_factory):
    """Two independent full default-plan runs written to disk."""

    plan = default_benchmark_plan()
    pool = FactPool.bundled()
    templates = TemplatePool.default()
    dirs = []
    runs = []
    for tag in ("a", "b"):
        instances = list(generate_dataset(plan, pool, templates, ACCEPT_SEED))
        out = tmp_path_factory.mktemp(f"full_{tag}")
        manifest = write_dataset(instances, str(out), ratios=(10, 1, 1),
                                 split_seed=0)
        dirs.append(out)
        runs.append((instances, manifest))
    return runs, dirs


def test_c01_oracle_soundness(seeded_cores):
    cores, gen_elapsed = seeded_cores
    start = time.perf_counter()
    total = sum(len(v) for v in cores.values())
    confirmed = 0
    questions = 0
    unknown_golds = 0
    for depth_cores in cores.values():
        for core in depth_cores:
            premises = core.tree.all_premise_formulas()
            for q in core.questions:
                questions += 1
                if q.gold is Verdict.UNKNOWN:
                    unknown_golds += 1
                if entails(premises, q.statement) is q.gold:
                    confirmed += 1
    elapsed = gen_elapsed + (time.perf_counter() - start)
    ok = (total == 10_000 and confirmed == questions and unknown_golds == 0
          and elapsed < 300.0)
    line = report(1, "oracle-soundness", ok,
                  f"{total} instances, {confirmed}/{questions} golds confirmed, "
                  f"{unknown_golds} unknown golds, {elapsed:.1f}s")
    assert ok, line


def test_c02_depth_exactness(seeded_cores):
    cores, _ = seeded_cores
    checked = 0
    mismatches = 0
    for depth, depth_cores in cores.items():
        for core in depth_cores[:1000]:
            premises = core.tree.all_premise_formulas()
            found = minimal_depth(premises, core.tree.root.conclusion)
            checked += 1
            if found != depth:
                mismatches += 1
    ok = checked == 8000 and mismatches == 0
    line = report(2, "depth-exactness", ok,
                  f"{checked} instances at 1000/depth, {mismatches} mismatches")
    assert ok, line


def test_c03_dataset_shape(full_run):
    runs, dirs = full_run
    instances, manifest = runs[0]

    questions = sum(len(i.questions) for i in instances)
    depths = sorted({i.depth for i in instances})

    split_of_group = {}
    counts = {}
    atomic = True
    for name in ("train", "val", "test"):
        path = dirs[0] / f"{name}.jsonl"
        ids = [json.loads(line)["group_id"]
               for line in path.read_text().splitlines()]
        counts[name] = len(ids)
        for gid in ids:
            if split_of_group.setdefault(gid, name) != name:
                atomic = False
    ratio_ok = (counts["train"], counts["val"], counts["test"]) == (2750, 275, 275)

    identical = all(
        (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
        for name in ("train.jsonl", "val.jsonl", "test.jsonl", "manifest.json"))

    ok = (questions == 9600 and depths == list(range(1, 9))
          and atomic and ratio_ok and identical)
    line = report(3, "dataset-shape", ok,
                  f"{questions} questions, depths {depths[0]}-{depths[-1]}, "
                  f"splits {counts['train']}/{counts['val']}/{counts['test']} "
                  f"group-atomic={atomic}, rerun-identical={identical}")
    assert ok, line


def test_c04_consistency_groups(full_run):
    runs, _ = full_run
    instances, _ = runs[0]
    groups = {}
    for inst in instances:
        groups.setdefault(inst.group_id, []).append(inst)
    bad_size = sum(1 for members in groups.values() if len(members) != 5)
    bad_hash = sum(1 for members in groups.values()
                   if len({m.skeleton_hash for m in members}) != 1)
    ok = bad_size == 0 and bad_hash == 0 and len(groups) == 660
    line = report(4, "consistency-groups", ok,
                  f"{len(groups)} groups, {bad_size} wrong-sized, "
                  f"{bad_hash} hash-mismatched")
    assert ok, line


def test_c05_task_reward_table():
    gold = [Verdict.TRUE]
    crafted = {
        3.0: "<think>steps</think>\n<answer> [True] </answer>",
        -0.5: "<think>steps</think>\n<answer> [False] </answer>",
        -1.0: "<think>steps</think>\n<answer> [True, False] </answer>",
        -2.5: "<answer> [True] </answer>",
        -3.0: "there is no answer block here at all",
    }
    observed = {}
    for expected, text in crafted.items():
        total = task_reward(parse_response(text, mode="cot"), gold).total
        observed[expected] = total
    exact = all(observed[k] == k for k in crafted)
    image_ok = set(observed.values()) == set(TASK_REWARD_IMAGE)
    ok = exact and image_ok
    line = report(5, "task-reward-table", ok,
                  f"observed {sorted(observed.values())}")
    assert ok, line


def test_c06_kernel_numerics():
    quality = reasoning_quality_reward(2.46, 0.0)
    tanh_ok = abs(quality - 0.9855) <= 1e-4

    bounds = LengthBounds(bucket="d", l_min=100.0, l_max=500.0, n=30)
    g = length_attenuation(540.0, bounds, tau=8.0)
    exp_ok = abs(g - 6.7379e-3) <= 1e-7

    import random
    rng = random.Random(ACCEPT_SEED)
    worst = 0.0
    for _ in range(200):
        rewards = [rng.uniform(-3, 3) for _ in range(rng.randint(2, 16))]
        worst = max(worst, abs(sum(group_advantages(rewards))))
    sum_ok = worst < 1e-9

    zero_var = group_advantages([5.0, 5.0, 5.0])
    zero_ok = all(a == 0.0 for a in zero_var)

    rollouts = [Rollout(prompt_id="p", bucket="d", length=200 + i,
                        r_task=r, l_cot=-1.0, l_nocot=-1.5, correct=r > 0)
                for i, r in enumerate([3.0, -0.5, -2.5, 3.0])]
    config = KernelConfig(lambda_q=0.0)
    results = compute_advantages(rollouts, None, config)
    plain = group_advantages([r.r_task for r in rollouts])
    bitwise_ok = all(res.a_hat == ref for res, ref in zip(results, plain))

    ok = tanh_ok and exp_ok and sum_ok and zero_ok and bitwise_ok
    line = report(6, "kernel-numerics", ok,
                  f"tanh={quality:.6f}, exp={g:.6e}, worst-sum={worst:.1e}, "
                  f"zero-var={zero_ok}, lambda0-bitwise={bitwise_ok}")
    assert ok, line


def test_c07_attenuation_properties():
    bounds = LengthBounds(bucket="d", l_min=100.0, l_max=500.0, n=30)
    in_band = all(length_attenuation(length, bounds, tau=tau) == 1.0
                  for tau in (5.0, 8.0, 10.0)
                  for length in (100.0, 101.0, 300.0, 499.0, 500.0))

    slope_ok = True
    worst_err = 0.0
    for tau in (5.0, 8.0, 10.0):
        for d1, d2 in ((10.0, 30.0), (5.0, 80.0)):
            over = (math.log(length_attenuation(500.0 + d2, bounds, tau=tau))
                    - math.log(length_attenuation(500.0 + d1, bounds, tau=tau))
                    ) / (d2 - d1)
            under = (math.log(length_attenuation(100.0 - d2, bounds, tau=tau))
                     - math.log(length_attenuation(100.0 - d1, bounds, tau=tau))
                     ) / (d2 - d1)
            for slope in (over, under):
                err = abs(slope + 1.0 / tau)
                worst_err = max(worst_err, err)
                slope_ok = slope_ok and err <= 1e-12

    ok = in_band and slope_ok
    line = report(7, "attenuation-properties", ok,
                  f"in-band-identity={in_band}, worst slope error {worst_err:.1e}")
    assert ok, line


def test_c08_metrics_fixtures():
    def rec(idx, gold, predicted):
        return GradedRecord(instance_id=f"i{idx}", group_id=f"g{idx}",
                            depth=1, question_idx=0, gold=gold,
                            predicted=predicted)

    records = []
    for i in range(4):
        records.append(rec(i, Verdict.TRUE, Verdict.TRUE))
    for i in range(4, 8):
        records.append(rec(i, Verdict.TRUE, Verdict.FALSE))
    for i in range(8, 10):
        records.append(rec(i, Verdict.TRUE, None))
    block = compute_metrics(records).overall
    fractions_ok = (block.accuracy == 0.4 and block.answer_rate == 0.8
                    and block.precision == 0.5)

    fb = f_beta_score(precision=0.5, answer_rate=0.8, beta=0.5, min_answer_rate=0.3)
    fb_ok = abs(fb - 0.5405) <= 1e-4

    floor_ok = all(
        f_beta_score(precision=p, answer_rate=ar, beta=0.5, min_answer_rate=0.3) == 0.0
        for p in (0.2, 0.5, 1.0) for ar in (0.0, 0.1, 0.3))

    ok = fractions_ok and fb_ok and floor_ok
    line = report(8, "metrics-fixtures", ok,
                  f"acc={block.accuracy}, ar={block.answer_rate}, "
                  f"p={block.precision}, f_beta={fb:.6f}, floor-zero={floor_ok}")
    assert ok, line


def test_c09_confidence_end_to_end(tmp_path):
    plan = DatasetPlan(name="fixture", rows=(
        PlanRow(depth=1, width=1, groups=40, num_subquestions=0,
                distractor_chains=1),))
    pool = FactPool.bundled()
    templates = TemplatePool.default()
    instances = list(generate_dataset(plan, pool, templates, ACCEPT_SEED))
    assert len(instances) == 200

    def flip(labels):
        return [Verdict.FALSE if lab is Verdict.TRUE else Verdict.TRUE
                for lab in labels]

    expected = {}
    samples = []
    buckets = ("RR", "WR", "RW", "WW")
    for i, inst in enumerate(instances):
        gold = [q.label for q in inst.questions]
        bucket = buckets[i % 4]
        cot_right = bucket[1] == "R"
        nocot_right = bucket[0] == "R"
        cot_labels = gold if cot_right else flip(gold)
        nocot_labels = gold if nocot_right else flip(gold)
        cot = (f"<think>step by step</think>\n"
               f"<answer> {canonical_answer_list(cot_labels)} </answer>")
        nocot = f" {canonical_answer_list(nocot_labels)} </answer>"
        expected[inst.instance_id] = bucket
        samples.append((inst, cot, nocot))

    scorer = MockScorer({"</think>": 2.0})
    analysis = confidence_analysis(scorer, samples)

    partition_ok = (len(analysis.records) == 200
                    and sum(s.n for s in analysis.buckets.values()) == 200
                    and all(analysis.buckets[b].n == 50 for b in buckets))
    assignment_ok = all(rec.bucket == expected[rec.instance_id]
                        for rec in analysis.records)
    wr = analysis.buckets["WR"]
    wr_ok = wr.mean_delta > 0.0 and wr.mean_r_q > 0.0

    ok = partition_ok and assignment_ok and wr_ok
    line = report(9, "confidence-end-to-end", ok,
                  f"buckets {sorted((b, s.n) for b, s in analysis.buckets.items())}, "
                  f"WR mean_delta={wr.mean_delta:.4f}, mean_r_q={wr.mean_r_q:.4f}")
    assert ok, line


def test_c10_prompt_fidelity():
    results = {}
    for mode, fixture in (("cot", "cot_prompt_frozen.txt"),
                          ("nocot", "nocot_prompt_frozen.txt")):
        frozen = (DATA_DIR / fixture).read_text(encoding="utf-8")
        template = load_prompt_template(mode)
        template_ok = template == frozen

        rendered = render_prompt("__PARA__", ["__QA__", "__QB__"], mode=mode)
        masked = (rendered.text
                  .replace("__QA__\n__QB__", "{current_question}")
                  .replace("__PARA__", "{paragraph}")
                  .replace("for 2 question(s)", "for {num_q} question(s)"))
        results[mode] = template_ok and masked == frozen
    ok = results["cot"] and results["nocot"]
    line = report(10, "prompt-fidelity", ok,
                  f"cot-match={results['cot']}, nocot-match={results['nocot']}")
    assert ok, line


def test_c11_http_client_contract():
    tokens = [" [True", "]"]
    logprobs = [-0.25, -0.5]
    with StubServer() as stub:
        client = HttpScorerClient(stub.base_url, timeout=2.0,
                                  max_retries=2, backoff=0.0)

        stub.enqueue(body={"tokens": tokens, "logprobs": logprobs})
        scores = client.score_continuation("ctx", " [True]")
        passthrough = scores == list(zip(tokens, logprobs))

        stub.enqueue(body={"tokens": tokens, "logprobs": [0.25, -0.5]})
        try:
            client.score_continuation("ctx", " [True]")
            violation = False
        except ContractViolationError:
            violation = True

        before = len(stub.requests)
        stub.enqueue(status=500, body={"error": "x"})
        stub.enqueue(status=503, body={"error": "y"})
        stub.enqueue(body={"tokens": tokens, "logprobs": logprobs})
        scores = client.score_continuation("ctx", " [True]")
        retry = (scores == list(zip(tokens, logprobs))
                 and len(stub.requests) - before == 3)

    ok = passthrough and violation and retry
    line = report(11, "http-client-contract", ok,
                  f"passthrough={passthrough}, violation-rejected={violation}, "
                  f"retry-then-succeed={retry}")
    assert ok, line
