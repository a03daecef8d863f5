"""Explainable writer verification over discrete handwriting features.

Two samples are compared through 15 categorical features.  The package
offers two independent decision routes — per-feature cosine similarity
with a calibrated threshold, and a log-likelihood ratio from a pair of
Bayesian networks over feature-distance codes — plus the data formats,
synthetic generators, partitioning, metrics, and per-feature reports
that make the decisions auditable end to end.
"""

from .daam import (
    CalibrationResult,
    DaamScore,
    calibrate,
    classify_pair,
    cosine_sim,
    score_pair,
    sweep_thresholds,
)
from .dataio import (
    Dataset,
    SampleRecord,
    read_labels_csv,
    read_soft_records,
    write_labels_csv,
    write_soft_records,
)
from .errors import (
    DegenerateLabels,
    EmptyTrainingSet,
    HypothesisMismatch,
    InsufficientData,
    ParseError,
    ValidationError,
    VeriscribeError,
    ZeroVector,
)
from .evaluation import EvalReport, compare_methods, evaluate
from .explain import VerificationReport, explain_daam, explain_laam, render
from .laam import (
    TrainedBayesNet,
    bic_score,
    classify,
    distance_vector,
    encode_distance,
    fit,
    fit_distances,
    fit_pair_models,
    joint_log_prob,
    llr,
    load_bayesnet,
    pair_code_count,
    save_bayesnet,
)
from .partition import DIFFERENT, SAME, Pair, PairSet, Split, generate_pairs, split
from .schema import FeatureDef, FeatureSchema, builtin_schema, load_schema, save_schema
from .synthetic import WriterProfile, generate_profiles, sample_dataset, soften

__version__ = "0.1.0"

__all__ = [
    "CalibrationResult",
    "DaamScore",
    "Dataset",
    "DegenerateLabels",
    "DIFFERENT",
    "EmptyTrainingSet",
    "EvalReport",
    "FeatureDef",
    "FeatureSchema",
    "HypothesisMismatch",
    "InsufficientData",
    "Pair",
    "PairSet",
    "ParseError",
    "SAME",
    "SampleRecord",
    "Split",
    "TrainedBayesNet",
    "ValidationError",
    "VerificationReport",
    "VeriscribeError",
    "WriterProfile",
    "ZeroVector",
    "bic_score",
    "builtin_schema",
    "calibrate",
    "classify",
    "classify_pair",
    "compare_methods",
    "cosine_sim",
    "distance_vector",
    "encode_distance",
    "evaluate",
    "explain_daam",
    "explain_laam",
    "render",
    "fit",
    "fit_distances",
    "fit_pair_models",
    "generate_pairs",
    "generate_profiles",
    "joint_log_prob",
    "llr",
    "load_bayesnet",
    "load_schema",
    "pair_code_count",
    "read_labels_csv",
    "read_soft_records",
    "sample_dataset",
    "save_bayesnet",
    "save_schema",
    "score_pair",
    "soften",
    "split",
    "sweep_thresholds",
    "write_labels_csv",
    "write_soft_records",
]
