"""Ordinal solvency grading for non-life insurers.

Grades companies into four ordered classes (Insolvency < Weak < Moderate <
Strong) from financial ratios: CAR-threshold labeling, correlation-based
feature selection, bias-to-uniform resampling, C4.5-style trees combined
through a cumulative ordinal decomposition, and an evaluation harness.
"""
from .balance import ResampleSpec, resample
from .dataset import (
    ACTION_LEVELS,
    CANONICAL_ORDERING,
    TABLE2_COUNTS,
    AttributeSchema,
    ClassOrdering,
    CompanyRecord,
    DataError,
    Dataset,
    SolvencyClass,
    SynthSpec,
    action_level,
    dataset_to_csv,
    label_from_car,
    load_csv,
    synth_generate,
)
from .evaluate import (
    EvaluationReport,
    Pipeline,
    PredictionRecord,
    cross_validate,
    fit_pipeline,
    holdout,
    mae,
    ordinal_mae,
    percentage_split,
    render_report,
    rmse,
    stratified_folds,
)
from .featsel import cfs_merit, discretize, greedy_stepwise, subset_merit, symmetric_uncertainty
from .ordinal import (
    ModelError,
    OrdinalModel,
    TreeModel,
    classify,
    combine_probabilities,
    derive_binary_dataset,
    load_model,
    save_model,
    train,
)
from .tree import (
    Leaf,
    Split,
    SplitCandidate,
    TreeNode,
    TreeParams,
    best_numeric_split,
    build,
    entropy,
    node_count,
    predict_distribution,
    prune_pessimistic,
    tree_depth,
    tree_from_doc,
    tree_to_doc,
)

__version__ = "0.1.0"
