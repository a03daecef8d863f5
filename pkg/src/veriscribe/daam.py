"""Distance-based verification: per-feature cosine similarity.

A pair of records is scored by the cosine similarity of each feature's
soft probability vector; the overall score averages the 15 per-feature
similarities (``ocs="sum"`` keeps the bare sum instead).  A decision
threshold is calibrated by sweeping candidate values and picking the one
whose precision and recall are closest, preferring the stricter
(larger) threshold on ties.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .dataio import SampleRecord, soft_array
from .errors import (
    DegenerateLabels,
    LengthMismatch,
    MissingSoft,
    SchemaMismatch,
    ValidationError,
    ZeroVector,
)
from .partition import DIFFERENT, SAME, Pair, PairSet

SWEEP_THRESHOLDS = tuple(round(0.1 * i, 1) for i in range(1, 10))
OCS_MODES = ("mean", "sum")


def cosine_sim(q_vec: Sequence[float], k_vec: Sequence[float]) -> float:
    """Cosine similarity of two nonnegative vectors, clamped to [0, 1].

    The clamp only strips floating-point dirt: for nonnegative inputs
    the true value already lies in [0, 1], and parallel vectors land on
    exactly 1.0.
    """
    q = np.asarray(q_vec, dtype=np.float64)
    k = np.asarray(k_vec, dtype=np.float64)
    if q.ndim != 1 or k.ndim != 1 or q.shape != k.shape:
        raise LengthMismatch(f"vector shapes differ: {q.shape} vs {k.shape}")
    if q.shape[0] < 2:
        raise ValidationError(f"need at least 2 entries, got {q.shape[0]}")
    if (q < 0).any() or (k < 0).any():
        raise ValidationError("cosine similarity expects nonnegative entries")
    nq = float(np.linalg.norm(q))
    nk = float(np.linalg.norm(k))
    if nq == 0.0 or nk == 0.0:
        raise ZeroVector("cosine similarity undefined for a zero vector")
    sim = float(np.dot(q, k)) / (nq * nk)
    return min(1.0, max(0.0, sim))


@dataclass(frozen=True)
class DaamScore:
    """Per-feature similarities plus their combination."""

    per_feature: tuple[float, ...]
    overall: float
    ocs: str = "mean"


def _require_soft(rec: SampleRecord) -> tuple[tuple[float, ...], ...]:
    if rec.soft is None:
        raise MissingSoft(f"record {rec.key} has no soft vectors")
    return rec.soft


def score_pair(q: SampleRecord, k: SampleRecord, ocs: str = "mean") -> DaamScore:
    """Score one record pair from its soft vectors."""
    if ocs not in OCS_MODES:
        raise ValidationError(f"unknown ocs mode {ocs!r}, expected one of {OCS_MODES}")
    q_soft = _require_soft(q)
    k_soft = _require_soft(k)
    if len(q_soft) != len(k_soft):
        raise SchemaMismatch(
            f"{q.key} has {len(q_soft)} features, {k.key} has {len(k_soft)}"
        )
    sims = []
    for j, (qv, kv) in enumerate(zip(q_soft, k_soft)):
        if len(qv) != len(kv):
            raise SchemaMismatch(
                f"feature f{j + 1}: {q.key} has {len(qv)} classes, {k.key} has {len(kv)}"
            )
        sims.append(cosine_sim(qv, kv))
    total = sum(sims)
    overall = total / len(sims) if ocs == "mean" else total
    return DaamScore(tuple(sims), overall, ocs)


def score_matrix(pairs: Iterable[Pair], ocs: str = "mean") -> np.ndarray:
    """Per-feature similarity matrix for many pairs, shape (P, 15)."""
    if ocs not in OCS_MODES:
        raise ValidationError(f"unknown ocs mode {ocs!r}, expected one of {OCS_MODES}")
    pair_list = list(pairs)
    a_recs = [p.a for p in pair_list]
    b_recs = [p.b for p in pair_list]
    if not pair_list:
        return np.zeros((0, 0))
    n_features = len(_require_soft(a_recs[0]))
    sims = np.empty((len(pair_list), n_features))
    for j in range(n_features):
        a = soft_array(a_recs, j)
        b = soft_array(b_recs, j)
        na = np.linalg.norm(a, axis=1)
        nb = np.linalg.norm(b, axis=1)
        if (na == 0).any() or (nb == 0).any():
            raise ZeroVector(f"feature f{j + 1}: zero soft vector in batch")
        sims[:, j] = (a * b).sum(axis=1) / (na * nb)
    return np.clip(sims, 0.0, 1.0)


def overall_scores(pairs: Iterable[Pair], ocs: str = "mean") -> np.ndarray:
    sims = score_matrix(pairs, ocs)
    return sims.mean(axis=1) if ocs == "mean" else sims.sum(axis=1)


def decide(overall: float, threshold: float) -> int:
    """Same-writer iff the overall score reaches the threshold."""
    return SAME if overall >= threshold else DIFFERENT


def classify_pair(
    q: SampleRecord, k: SampleRecord, threshold: float, ocs: str = "mean"
) -> int:
    return decide(score_pair(q, k, ocs).overall, threshold)


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float


@dataclass(frozen=True)
class CalibrationResult:
    chosen_threshold: float
    rows: tuple[SweepRow, ...]


def sweep_thresholds(
    scores: np.ndarray,
    labels: np.ndarray,
    thresholds: Sequence[float] = SWEEP_THRESHOLDS,
) -> CalibrationResult:
    """Confusion counts at each threshold; choose argmin |precision - recall|.

    Ties resolve toward the larger threshold.  "Positive" is the
    same-writer prediction (score >= threshold).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise LengthMismatch(
            f"{scores.shape[0]} scores vs {labels.shape[0]} labels"
        )
    if scores.size == 0:
        raise DegenerateLabels("cannot calibrate on an empty pair set")
    is_same = labels == SAME
    if is_same.all() or not is_same.any():
        raise DegenerateLabels(
            "calibration needs both same-writer and different-writer pairs"
        )
    rows = []
    best_row = None
    best_gap = float("inf")
    for t in sorted(set(float(t) for t in thresholds)):
        pred_same = scores >= t
        tp = int((pred_same & is_same).sum())
        fp = int((pred_same & ~is_same).sum())
        tn = int((~pred_same & ~is_same).sum())
        fn = int((~pred_same & is_same).sum())
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        row = SweepRow(t, tp, fp, tn, fn, precision, recall)
        rows.append(row)
        gap = abs(precision - recall)
        if gap <= best_gap:
            best_gap = gap
            best_row = row
    assert best_row is not None
    return CalibrationResult(best_row.threshold, tuple(rows))


def calibrate(pair_set: PairSet, ocs: str = "mean") -> CalibrationResult:
    """Sweep the standard thresholds over a labeled pair set."""
    return sweep_thresholds(overall_scores(pair_set, ocs), pair_set.labels())


def write_sweep_csv(result: CalibrationResult, stream: IO[str]) -> None:
    stream.write("threshold,tp,fp,tn,fn,precision,recall\n")
    for r in result.rows:
        stream.write(
            f"{r.threshold:.9g},{r.tp},{r.fp},{r.tn},{r.fn},"
            f"{r.precision:.6f},{r.recall:.6f}\n"
        )
