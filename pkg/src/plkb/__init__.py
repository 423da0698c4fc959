"""Explainable binary classification via probabilistic knowledge bases
learned from categorical data and queried with linear-programming
inference."""

from .data import (
    Dataset,
    Instance,
    SeedSpec,
    balance,
    generate_synthetic,
    label_synthetic,
    load_csv,
    load_synthetic,
    random_seed_spec,
    save_synthetic,
    split,
)
from .direct import SubsetCounter, active_kb, build_direct_kb, relevant_kb
from .explain import (
    Explanation,
    compute_explanation,
    explanation_accuracy,
    masked_string,
)
from .evaluate import (
    BenchResult,
    EvalReport,
    ExperimentConfig,
    bench_lp,
    classify_query,
    f1_score,
    run_eval,
    run_explanation_eval,
    run_knowledge_experiment,
    train_kb,
)
from .kb import (
    POS,
    Atom,
    Clause,
    KBParseError,
    KnowledgeBase,
    Literal,
    WeightedClause,
    merge,
    parse_kb,
    rule_clause,
    serialize_kb,
)
from .lp import (
    InferenceResult,
    LinearProgram,
    LpSolution,
    apply_query,
    build_lp,
    check_consistency,
    dump_lp,
    infer_pos,
    nilsson_oracle,
    solve_lp,
)
from .tree import TreeNode, build_id3, clause_from_path, format_tree, kb_from_tree

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "BenchResult",
    "Clause",
    "Dataset",
    "EvalReport",
    "ExperimentConfig",
    "Explanation",
    "InferenceResult",
    "Instance",
    "KBParseError",
    "KnowledgeBase",
    "LinearProgram",
    "Literal",
    "LpSolution",
    "POS",
    "SeedSpec",
    "SubsetCounter",
    "TreeNode",
    "WeightedClause",
    "active_kb",
    "apply_query",
    "balance",
    "bench_lp",
    "build_direct_kb",
    "build_id3",
    "build_lp",
    "check_consistency",
    "classify_query",
    "clause_from_path",
    "compute_explanation",
    "dump_lp",
    "explanation_accuracy",
    "f1_score",
    "format_tree",
    "generate_synthetic",
    "infer_pos",
    "kb_from_tree",
    "label_synthetic",
    "load_csv",
    "load_synthetic",
    "masked_string",
    "merge",
    "nilsson_oracle",
    "parse_kb",
    "random_seed_spec",
    "relevant_kb",
    "rule_clause",
    "run_eval",
    "run_explanation_eval",
    "run_knowledge_experiment",
    "save_synthetic",
    "serialize_kb",
    "solve_lp",
    "split",
    "train_kb",
]
