"""Confusion counts and accuracy metrics over labeled pair sets.

"Positive" means the same-writer prediction.  Type-1 accuracy is the
fraction of same-writer pairs decided same; type-2 accuracy is the
fraction of different-writer pairs decided different.  ``type2_literal``
additionally records false positives over the whole evaluation set — an
error rate, kept for transparency because some reports quote it under
the type-2 heading.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .daam import calibrate as daam_calibrate
from .daam import overall_scores
from .dataio import Dataset
from .errors import InsufficientData, LengthMismatch, ValidationError
from .laam import (
    calibrate_tau,
    distances_for_pairs,
    fit_pair_models,
    llr_batch,
)
from .partition import DIFFERENT, SAME, PairSet, generate_pairs, split

METHODS = ("daam", "laam")

REPORT_HEADER = (
    "method,regime,TP,FP,TN,FN,type1,type2,type2_literal,overall,precision,recall"
)


@dataclass(frozen=True)
class EvalReport:
    method: str
    regime: str
    tp: int
    fp: int
    tn: int
    fn: int
    type1: float
    type2: float
    type2_literal: float
    overall: float
    precision: float
    recall: float

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _safe_div(num: int, den: int) -> float:
    return num / den if den else 0.0


def evaluate(
    pairs: PairSet,
    decisions: Sequence[int],
    method: str = "",
    regime: str = "",
) -> EvalReport:
    """Score a decision sequence against the pair labels."""
    if len(decisions) != len(pairs):
        raise LengthMismatch(
            f"{len(decisions)} decisions for {len(pairs)} pairs"
        )
    if len(pairs) == 0:
        raise InsufficientData("cannot evaluate zero pairs")
    tp = fp = tn = fn = 0
    for pair, decision in zip(pairs, decisions):
        if decision == SAME:
            if pair.label == SAME:
                tp += 1
            else:
                fp += 1
        elif decision == DIFFERENT:
            if pair.label == DIFFERENT:
                tn += 1
            else:
                fn += 1
        else:
            raise ValidationError(f"decision {decision!r} is not a pair label")
    n_same = tp + fn
    n_diff = tn + fp
    total = len(pairs)
    return EvalReport(
        method=method,
        regime=regime,
        tp=tp, fp=fp, tn=tn, fn=fn,
        type1=_safe_div(tp, n_same),
        type2=_safe_div(tn, n_diff),
        type2_literal=_safe_div(fp, total),
        overall=(tp + tn) / total,
        precision=_safe_div(tp, tp + fp),
        recall=_safe_div(tp, n_same),
    )


def decisions_from_scores(scores: np.ndarray, threshold: float) -> list[int]:
    """Same-writer wherever the score reaches the threshold."""
    return [SAME if s >= threshold else DIFFERENT for s in np.asarray(scores)]


def compare_methods(
    dataset: Dataset,
    regimes: Sequence[str],
    methods: Sequence[str],
    seed: int = 0,
    strategy: str = "balanced",
    k: int = 1,
    alpha: float = 1.0,
    ocs: str = "mean",
    tau: float | None = 0.0,
) -> list[EvalReport]:
    """Run the full pipeline per (regime, method) and collect reports.

    Per regime: split the dataset, build train/val/test pairs, calibrate
    the cosine threshold on validation pairs, fit the two networks on
    training pairs, then evaluate on test pairs.  ``tau=None`` calibrates
    the ratio threshold on validation pairs instead of using a fixed one.
    """
    for method in methods:
        if method not in METHODS:
            raise ValidationError(
                f"unknown method {method!r}, expected one of {METHODS}"
            )
    reports: list[EvalReport] = []
    for regime in regimes:
        parts = split(dataset, regime, seed=seed)
        train_pairs = generate_pairs(parts.train, strategy, k, seed)
        val_pairs = generate_pairs(parts.val, strategy, k, seed)
        test_pairs = generate_pairs(parts.test, strategy, k, seed)
        for method in methods:
            if method == "daam":
                chosen = daam_calibrate(val_pairs, ocs).chosen_threshold
                scores = overall_scores(test_pairs, ocs)
                decisions = decisions_from_scores(scores, chosen)
            else:
                bn_same, bn_diff = fit_pair_models(train_pairs, dataset.schema, alpha)
                if tau is None:
                    chosen = calibrate_tau(val_pairs, bn_same, bn_diff).chosen_threshold
                else:
                    chosen = tau
                codes = distances_for_pairs(test_pairs, dataset.schema)
                scores = llr_batch(bn_same, bn_diff, codes)
                decisions = decisions_from_scores(scores, chosen)
            reports.append(evaluate(test_pairs, decisions, method, regime))
    return reports


def write_report_csv(reports: Sequence[EvalReport], stream: IO[str]) -> None:
    """Emit reports in the standard comparison layout, 4-decimal fractions."""
    stream.write(REPORT_HEADER + "\n")
    for r in reports:
        stream.write(
            f"{r.method},{r.regime},{r.tp},{r.fp},{r.tn},{r.fn},"
            f"{r.type1:.4f},{r.type2:.4f},{r.type2_literal:.4f},"
            f"{r.overall:.4f},{r.precision:.4f},{r.recall:.4f}\n"
        )
