"""Deduction benchmark toolkit.

Generates verified multi-step entailment datasets, grades model
responses, and turns graded rollouts into length-aware group-relative
advantages. The CLI in reasonkit.cli exposes the same pipeline from the
shell.
"""

__version__ = "0.1.0"

from .logic import (
    And,
    Atom,
    Formula,
    FormulaSyntaxError,
    Implies,
    Not,
    Or,
    format_formula,
    parse_formula,
)
from .entail import (
    AtomCapacityError,
    UnsatisfiablePremisesError,
    Verdict,
    entails,
    satisfiable,
)
from .rules import RuleKind, apply_rule, forward_closure, minimal_depth
from .trees import (
    ArgumentTree,
    DifficultyProfile,
    GenerationError,
    Question,
    build_tree,
    extract_questions,
    make_variant_group,
    skeleton_hash,
)
from .seeds import substream, substream_seed
from .surface import (
    FactPool,
    PoolFormatError,
    TemplatePool,
    canonical_answer_list,
    load_prompt_template,
    realize,
    render_prompt,
)
from .dataset import (
    DatasetPlan,
    Instance,
    InstanceQuestion,
    PlanRow,
    RecordError,
    VerificationReport,
    default_benchmark_plan,
    generate_dataset,
    read_instances,
    split_dataset,
    verify_instance,
    write_dataset,
)
from .grading import (
    TASK_REWARD_IMAGE,
    GradedRecord,
    MetricsReport,
    compute_metrics,
    f_beta_score,
    grade_response,
    paradigm_word_freq,
    parse_response,
    task_reward,
)
from .kernel import (
    AdvantageResult,
    KernelConfig,
    LengthBounds,
    Rollout,
    composite_reward,
    compute_advantages,
    estimate_bounds,
    group_advantages,
    group_rollouts,
    length_attenuation,
    reasoning_quality_reward,
)
from .scoring import (
    CompletionClient,
    ContractViolationError,
    HttpScorerClient,
    MockScorer,
    TransportError,
    bucket_name,
    build_teacher_forced_pair,
    confidence_analysis,
    mean_gold_logprob,
)

__all__ = [
    "__version__",
    "And", "Atom", "Formula", "FormulaSyntaxError", "Implies", "Not", "Or",
    "format_formula", "parse_formula",
    "AtomCapacityError", "UnsatisfiablePremisesError", "Verdict",
    "entails", "satisfiable",
    "RuleKind", "apply_rule", "forward_closure", "minimal_depth",
    "ArgumentTree", "DifficultyProfile", "GenerationError", "Question",
    "build_tree", "extract_questions", "make_variant_group", "skeleton_hash",
    "substream", "substream_seed",
    "FactPool", "PoolFormatError", "TemplatePool", "canonical_answer_list",
    "load_prompt_template", "realize", "render_prompt",
    "DatasetPlan", "Instance", "InstanceQuestion", "PlanRow", "RecordError",
    "VerificationReport", "default_benchmark_plan", "generate_dataset",
    "read_instances", "split_dataset", "verify_instance", "write_dataset",
    "TASK_REWARD_IMAGE", "GradedRecord", "MetricsReport", "compute_metrics",
    "f_beta_score", "grade_response", "paradigm_word_freq", "parse_response",
    "task_reward",
    "AdvantageResult", "KernelConfig", "LengthBounds", "Rollout",
    "composite_reward", "compute_advantages", "estimate_bounds",
    "group_advantages", "group_rollouts", "length_attenuation",
    "reasoning_quality_reward",
    "CompletionClient", "ContractViolationError", "HttpScorerClient",
    "MockScorer", "TransportError", "bucket_name",
    "build_teacher_forced_pair", "confidence_analysis", "mean_gold_logprob",
]
