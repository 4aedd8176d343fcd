"""Command-line interface.

Subcommands cover the full loop: generate and verify datasets, render
prompts, grade responses, drive a completion endpoint, estimate length
windows, turn rollouts into advantages, analyze confidence shifts, and
count rule mentions. Every command writes its outputs into --out through
atomic renames and drops a run_config.json snapshot beside them;
`rerun <snapshot> --out NEW` replays any non-network command and produces
byte-identical data files.

Exit codes: 0 success, 1 validation or data failure, 2 transport failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections.abc import Sequence

from . import __version__, runio
from .dataset import (
    DatasetPlan,
    Instance,
    PlanRow,
    default_benchmark_plan,
    generate_dataset,
    read_instances,
    verify_instance,
    write_dataset,
)
from .grading import compute_metrics, grade_response, paradigm_word_freq
from .kernel import (
    KernelConfig,
    LengthBounds,
    Rollout,
    compute_advantages,
    estimate_bounds,
    group_rollouts,
)
from .logic import FormulaSyntaxError
from .scoring import (
    CompletionClient,
    ContractViolationError,
    HttpScorerClient,
    MockScorer,
    TransportError,
    confidence_analysis,
)
from .surface import FactPool, PoolFormatError, TemplatePool, render_prompt
from .trees import GenerationError, PoolCapacityError

log = logging.getLogger("reasonkit")

SNAPSHOT_NAME = "run_config.json"
RERUNNABLE = ("gen", "render", "grade", "bounds", "advantage", "wordfreq",
              "analyze-confidence")


class _Parser(argparse.ArgumentParser):
    """Argument errors are validation failures, so they exit 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _parse_ratios(text: str) -> tuple[int, int, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"ratios must look like 10:1:1, got {text!r}")
    try:
        ratios = tuple(int(p) for p in parts)
    except ValueError:
        raise ValueError(f"ratios must be integers, got {text!r}") from None
    return ratios


def _parse_tier(text: str) -> PlanRow:
    parts = text.split(":")
    if not 3 <= len(parts) <= 5:
        raise ValueError(
            f"tier must be depth:width:groups[:subquestions[:distractors]], "
            f"got {text!r}")
    try:
        numbers = [int(p) for p in parts]
    except ValueError:
        raise ValueError(f"tier fields must be integers, got {text!r}") from None
    depth, width, groups = numbers[:3]
    subq = numbers[3] if len(numbers) > 3 else max(0, depth - 1)
    distractors = numbers[4] if len(numbers) > 4 else 1
    return PlanRow(depth=depth, width=width, groups=groups,
                   num_subquestions=subq, distractor_chains=distractors)


def _parse_marker_bonus(text: str) -> tuple[str, float]:
    marker, sep, value = text.rpartition("=")
    if not sep or not marker:
        raise ValueError(f"marker bonus must look like '</think>=2.0', "
                         f"got {text!r}")
    return marker, float(value)


def _load_pool(args) -> FactPool:
    if getattr(args, "facts", None):
        return FactPool.load(args.facts)
    return FactPool.bundled()


def _load_templates(args) -> TemplatePool:
    if getattr(args, "templates", None):
        return TemplatePool.load(args.templates)
    return TemplatePool.default()


def _load_responses(path: str, field: str = "response") -> dict[str, str]:
    responses: dict[str, str] = {}
    for lineno, record in runio.read_jsonl(path):
        if "instance_id" not in record or field not in record:
            raise runio.DataFormatError(
                f"{path}:{lineno}: expected 'instance_id' and {field!r} fields")
        responses[str(record["instance_id"])] = str(record[field])
    return responses


def _write_snapshot(out_dir: str, command: str, argv: Sequence[str]) -> None:
    snapshot = {
        "schema": 1,
        "command": command,
        "argv": list(argv),
        "package_version": __version__,
    }
    runio.atomic_write_text(os.path.join(out_dir, SNAPSHOT_NAME),
                            runio.dump_json_pretty(snapshot))


def _prepare_out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_gen(args, argv) -> int:
    if args.tier:
        rows = tuple(_parse_tier(t) for t in args.tier)
        plan = DatasetPlan(name="custom", rows=rows, variants=args.variants)
    else:
        plan = default_benchmark_plan()
        if args.variants != 5:
            plan = DatasetPlan(name=plan.name, rows=plan.rows,
                               variants=args.variants)
    pool = _load_pool(args)
    templates = _load_templates(args)
    out = _prepare_out(args)
    ratios = _parse_ratios(args.ratios)

    log.info("generating %d groups (%d instances, %d questions) with seed %d",
             plan.total_groups, plan.total_instances, plan.total_questions,
             args.seed)

    def progress(done, total):
        if done % 50 == 0 or done == total:
            log.info("groups %d/%d", done, total)

    instances = list(generate_dataset(plan, pool, templates, args.seed,
                                      progress=progress))
    manifest = write_dataset(
        instances, out, ratios=ratios, split_seed=args.split_seed,
        metadata={"plan": plan.name, "generation_seed": args.seed,
                  "variants": plan.variants})
    _write_snapshot(out, "gen", argv)
    for name, info in manifest["splits"].items():
        log.info("%s: %d groups, %d instances, %d questions",
                 name, info["groups"], info["instances"], info["questions"])
    return 0


def cmd_verify(args, argv) -> int:
    failures = 0
    total = 0
    for path in args.data:
        file_failures = 0
        count = 0
        for lineno, record in runio.read_jsonl(path):
            if args.limit and total >= args.limit:
                break
            total += 1
            count += 1
            report = verify_instance(record)
            if not report.passed:
                failures += 1
                file_failures += 1
                for check in report.failures():
                    log.error("%s:%d [%s] %s: %s", path, lineno,
                              report.instance_id, check.name, check.detail)
        print(f"{path}: {count} instances, {file_failures} failures")
    print(f"verified {total} instances, {failures} failures")
    return 1 if failures else 0


def cmd_render(args, argv) -> int:
    instances = read_instances(args.data)
    out = _prepare_out(args)
    records = []
    for inst in instances:
        texts = [q.text for q in inst.questions]
        if args.questions_per_prompt == "all":
            prompt = render_prompt(inst.paragraph, texts, mode=args.mode)
            records.append({
                "prompt_id": inst.instance_id,
                "instance_id": inst.instance_id,
                "mode": args.mode,
                "question_indices": list(range(len(texts))),
                "num_questions": len(texts),
                "text": prompt.text,
            })
        else:
            for idx, text in enumerate(texts):
                prompt = render_prompt(inst.paragraph, [text], mode=args.mode)
                records.append({
                    "prompt_id": f"{inst.instance_id}#q{idx}",
                    "instance_id": inst.instance_id,
                    "mode": args.mode,
                    "question_indices": [idx],
                    "num_questions": 1,
                    "text": prompt.text,
                })
    count = runio.write_jsonl(os.path.join(out, "prompts.jsonl"), records)
    _write_snapshot(out, "render", argv)
    log.info("rendered %d prompts from %d instances", count, len(instances))
    return 0


def _grade_and_write(instances, responses, mode, out, argv, command,
                     extra_outputs=None):
    by_id = {inst.instance_id: inst for inst in instances}
    missing = [rid for rid in responses if rid not in by_id]
    if missing:
        raise runio.DataFormatError(
            f"{len(missing)} response(s) reference unknown instances, "
            f"first: {missing[0]}")

    graded_rows = []
    records = []
    reward_values = []
    for instance_id, text in responses.items():
        result = grade_response(by_id[instance_id], text, mode=mode)
        reward_values.append(result.reward.total)
        for rec in result.records:
            records.append(rec)
            graded_rows.append({
                "instance_id": rec.instance_id,
                "group_id": rec.group_id,
                "depth": rec.depth,
                "question_idx": rec.question_idx,
                "gold": rec.gold.value,
                "predicted": rec.predicted.value if rec.predicted else None,
                "correct": rec.correct,
                "valid": rec.valid,
                "r_task": result.reward.total,
                "format_ok": result.parsed.format_ok,
            })

    report = compute_metrics(records, beta=0.5, min_answer_rate=0.3)
    histogram: dict[str, int] = {}
    for value in reward_values:
        histogram[str(value)] = histogram.get(str(value), 0) + 1
    metrics = {
        "metrics": report.to_record(),
        "rewards": {
            "responses": len(reward_values),
            "mean_r_task": (sum(reward_values) / len(reward_values)
                            if reward_values else 0.0),
            "histogram": dict(sorted(histogram.items())),
        },
    }

    runio.write_jsonl(os.path.join(out, "graded.jsonl"), graded_rows)
    runio.atomic_write_text(os.path.join(out, "metrics.json"),
                            runio.dump_json_pretty(metrics))
    for name, rows in (extra_outputs or {}).items():
        runio.write_jsonl(os.path.join(out, name), rows)
    _write_snapshot(out, command, argv)
    block = report.overall
    log.info("graded %d responses, %d questions: accuracy %.4f, "
             "answer rate %.4f, f_beta %.4f",
             len(reward_values), block.questions, block.accuracy,
             block.answer_rate, block.f_beta)
    return 0


def cmd_grade(args, argv) -> int:
    instances = read_instances(args.data)
    responses = _load_responses(args.responses)
    out = _prepare_out(args)
    return _grade_and_write(instances, responses, args.mode, out, argv, "grade")


def cmd_eval(args, argv) -> int:
    instances = read_instances(args.data)
    if args.limit:
        instances = instances[:args.limit]
    out = _prepare_out(args)
    client = CompletionClient(args.endpoint, profile=args.profile,
                              model=args.model, max_tokens=args.max_tokens,
                              timeout=args.timeout, max_retries=args.retries)
    responses: dict[str, str] = {}
    response_rows = []
    for i, inst in enumerate(instances, start=1):
        prompt = render_prompt(inst.paragraph, [q.text for q in inst.questions],
                               mode=args.mode)
        text = client.complete(prompt.text)
        responses[inst.instance_id] = text
        response_rows.append({"instance_id": inst.instance_id,
                              "mode": args.mode, "response": text})
        if i % 25 == 0 or i == len(instances):
            log.info("completed %d/%d prompts", i, len(instances))
    return _grade_and_write(instances, responses, args.mode, out, argv, "eval",
                            extra_outputs={"responses.jsonl": response_rows})


def _read_rollouts(path: str) -> list[Rollout]:
    rollouts = []
    for lineno, rec in runio.read_jsonl(path):
        try:
            rollouts.append(Rollout.from_record(rec))
        except (KeyError, TypeError) as exc:
            raise runio.DataFormatError(
                f"{path}:{lineno}: bad rollout record ({exc})") from exc
    return rollouts


def _read_bounds(path: str) -> dict[object, LengthBounds]:
    table = {}
    for lineno, rec in runio.read_jsonl(path):
        try:
            bounds = LengthBounds.from_record(rec)
        except (KeyError, TypeError) as exc:
            raise runio.DataFormatError(
                f"{path}:{lineno}: bad bounds record ({exc})") from exc
        table[bounds.bucket] = bounds
    return table


def cmd_bounds(args, argv) -> int:
    rollouts = _read_rollouts(args.rollouts)
    previous = _read_bounds(args.previous) if args.previous else None
    table = estimate_bounds(rollouts, min_samples=args.min_samples,
                            previous=previous, step=args.step)
    out = _prepare_out(args)
    rows = [table[b].to_record() for b in sorted(table, key=str)]
    runio.write_jsonl(os.path.join(out, "bounds.jsonl"), rows)
    _write_snapshot(out, "bounds", argv)
    usable = sum(1 for b in table.values() if not b.disabled)
    log.info("estimated bounds for %d buckets (%d usable) from %d rollouts",
             len(table), usable, len(rollouts))
    return 0


def cmd_advantage(args, argv) -> int:
    rollouts = _read_rollouts(args.rollouts)
    bounds = _read_bounds(args.bounds) if args.bounds else None
    config = KernelConfig(lambda_q=args.lambda_q, tau=args.tau,
                          epsilon=args.epsilon,
                          skip_uniform_groups=args.skip_uniform)
    out = _prepare_out(args)
    groups = group_rollouts(rollouts)
    rows = []
    for group in groups.values():
        for result in compute_advantages(group, bounds, config):
            rows.append(result.to_record())
    runio.write_jsonl(os.path.join(out, "advantages.jsonl"), rows)
    runio.atomic_write_text(os.path.join(out, "kernel_config.json"),
                            runio.dump_json_pretty(config.to_record()))
    _write_snapshot(out, "advantage", argv)
    skipped = sum(1 for r in rows if r["skipped"])
    log.info("computed %d advantages in %d groups (%d skipped rows)",
             len(rows), len(groups), skipped)
    return 0


def cmd_analyze_confidence(args, argv) -> int:
    instances = read_instances(args.data)
    cot = _load_responses(args.cot)
    nocot = _load_responses(args.nocot)
    samples = []
    for inst in instances:
        if inst.instance_id in cot and inst.instance_id in nocot:
            samples.append((inst, cot[inst.instance_id],
                            nocot[inst.instance_id]))
    if not samples:
        raise runio.DataFormatError(
            "no instance has both a cot and a nocot response")

    if args.scorer == "mock":
        bonuses = dict(_parse_marker_bonus(b) for b in args.marker_bonus)
        scorer = MockScorer(bonuses or None)
    else:
        if not args.endpoint:
            raise ValueError("--endpoint is required with --scorer http")
        scorer = HttpScorerClient(args.endpoint, timeout=args.timeout,
                                  max_retries=args.retries)

    analysis = confidence_analysis(scorer, samples)
    out = _prepare_out(args)
    runio.write_jsonl(os.path.join(out, "confidence.jsonl"),
                      [r.to_record() for r in analysis.records])
    runio.atomic_write_text(os.path.join(out, "confidence_summary.json"),
                            runio.dump_json_pretty(analysis.to_record()))
    _write_snapshot(out, "analyze-confidence", argv)
    for name, stats in analysis.buckets.items():
        log.info("bucket %s: n=%d mean_delta=%.4f mean_r_q=%.4f",
                 name, stats.n, stats.mean_delta, stats.mean_r_q)
    return 0


def cmd_wordfreq(args, argv) -> int:
    responses = _load_responses(args.responses, field=args.field)
    freq = paradigm_word_freq(responses.values())
    out = _prepare_out(args)
    runio.atomic_write_text(
        os.path.join(out, "wordfreq.json"),
        runio.dump_json_pretty({"texts": len(responses), "counts": freq}))
    _write_snapshot(out, "wordfreq", argv)
    for name, count in freq.items():
        log.info("%-24s %d", name, count)
    return 0


def cmd_rerun(args, argv) -> int:
    with open(args.snapshot, encoding="utf-8") as handle:
        snapshot = json.load(handle)
    command = snapshot.get("command")
    recorded = snapshot.get("argv")
    if not isinstance(recorded, list) or not command:
        raise ValueError(f"{args.snapshot}: not a run_config snapshot")
    if command not in RERUNNABLE:
        raise ValueError(f"command {command!r} is not rerunnable "
                         f"(network-dependent or writes nothing)")
    if command == "analyze-confidence" and "http" in recorded:
        raise ValueError("analyze-confidence runs with --scorer http are "
                         "not rerunnable")
    new_argv = list(recorded)
    if "--out" in new_argv:
        new_argv[new_argv.index("--out") + 1] = args.out
    else:
        new_argv += ["--out", args.out]
    log.info("replaying: reasonkit %s", " ".join(new_argv))
    return main(new_argv)


def build_parser() -> _Parser:
    # the logging flags ride a parent parser so they work both before and
    # after the subcommand; SUPPRESS keeps the subparser from clobbering a
    # value the top-level parse already set
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true",
                        default=argparse.SUPPRESS, help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true",
                        default=argparse.SUPPRESS, help="warnings only")

    parser = _Parser(
        prog="reasonkit",
        description="Deduction benchmark toolkit: generation, grading, "
                    "and reward kernel.",
        epilog="exit codes: 0 success, 1 validation or data failure, "
               "2 transport failure",
        parents=[common])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def add_parser(name, **kwargs):
        return sub.add_parser(name, parents=[common], **kwargs)

    p = add_parser("gen", help="generate a dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0, help="master generation seed")
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--ratios", default="10:1:1",
                   help="train:val:test group ratio")
    p.add_argument("--tier", action="append", default=[],
                   metavar="D:W:G[:S[:C]]",
                   help="custom tier depth:width:groups[:subquestions"
                        "[:distractors]]; repeatable; omits the default plan")
    p.add_argument("--variants", type=int, default=5,
                   help="variants per consistency group")
    p.add_argument("--facts", help="fact pool TSV (default: bundled)")
    p.add_argument("--templates", help="template JSON (default: bundled)")
    p.set_defaults(handler=cmd_gen)

    p = add_parser("verify", help="re-check instance records")
    p.add_argument("--data", nargs="+", action="extend", required=True,
                   help="jsonl files (flag may repeat)")
    p.add_argument("--limit", type=int, default=0,
                   help="stop after this many instances (0 = all)")
    p.set_defaults(handler=cmd_verify)

    p = add_parser("render", help="render prompts from instances")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("cot", "nocot"), default="cot")
    p.add_argument("--questions-per-prompt", choices=("all", "single"),
                   default="all")
    p.set_defaults(handler=cmd_render)

    p = add_parser("grade", help="grade stored responses")
    p.add_argument("--data", required=True)
    p.add_argument("--responses", required=True,
                   help="jsonl with instance_id and response fields")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("cot", "nocot"), default="cot")
    p.set_defaults(handler=cmd_grade)

    p = add_parser("eval", help="drive a completion endpoint and grade")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--endpoint", required=True)
    p.add_argument("--profile", choices=("simple", "openai"), default="simple")
    p.add_argument("--model", default="default")
    p.add_argument("--mode", choices=("cot", "nocot"), default="cot")
    p.add_argument("--limit", type=int, default=0)
    p.add_argument("--max-tokens", type=int, default=2048)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--retries", type=int, default=3)
    p.set_defaults(handler=cmd_eval)

    p = add_parser("bounds", help="estimate per-bucket length windows")
    p.add_argument("--rollouts", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-samples", type=int, default=20)
    p.add_argument("--previous", help="previous bounds.jsonl to carry")
    p.add_argument("--step", type=int, default=0)
    p.set_defaults(handler=cmd_bounds)

    p = add_parser("advantage", help="compute group advantages")
    p.add_argument("--rollouts", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bounds", help="bounds.jsonl from the bounds command")
    p.add_argument("--lambda-q", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=8.0)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--skip-uniform", action="store_true")
    p.set_defaults(handler=cmd_advantage)

    p = add_parser("analyze-confidence",
                       help="bucket gold-evidence shifts by answer flips")
    p.add_argument("--data", required=True)
    p.add_argument("--cot", required=True, help="cot responses jsonl")
    p.add_argument("--nocot", required=True, help="nocot responses jsonl")
    p.add_argument("--out", required=True)
    p.add_argument("--scorer", choices=("mock", "http"), default="mock")
    p.add_argument("--endpoint")
    p.add_argument("--marker-bonus", action="append", default=[],
                   metavar="MARKER=BONUS")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--retries", type=int, default=3)
    p.set_defaults(handler=cmd_analyze_confidence)

    p = add_parser("wordfreq", help="count rule-name mentions")
    p.add_argument("--responses", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--field", default="response")
    p.set_defaults(handler=cmd_wordfreq)

    p = add_parser("rerun", help="replay a run_config.json snapshot")
    p.add_argument("snapshot")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_rerun)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0

    level = logging.INFO
    if getattr(args, "verbose", False):
        level = logging.DEBUG
    elif getattr(args, "quiet", False):
        level = logging.WARNING
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(message)s")
    log.setLevel(level)

    try:
        return args.handler(args, argv)
    except TransportError as exc:
        log.error("%s", exc)
        return 2
    except (PoolFormatError, runio.DataFormatError, GenerationError,
            PoolCapacityError, ContractViolationError, FormulaSyntaxError,
            ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
