"""Verification reports a document examiner can read.

Both scoring routes decompose over the 15 features, so a verdict can
always be attributed: cosine scoring lists each feature's similarity,
ratio scoring lists each node's log-factor difference.  Lowlights call
out the features that argue most strongly against a shared writer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from .daam import decide, score_pair
from .dataio import SampleRecord
from .errors import ValidationError
from .laam import (
    TrainedBayesNet,
    code_string,
    distance_vector,
    llr_contributions,
)
from .partition import DIFFERENT, SAME
from .schema import FeatureSchema

DAAM_SALIENCE_CUTOFF = 0.5
LAAM_LOWLIGHT_COUNT = 3

FORMATS = ("text", "json", "plotdata")


def _record_name(rec: SampleRecord) -> str:
    return f"{rec.writer_id}:{rec.sample_id}"


@dataclass(frozen=True)
class FeatureEntry:
    """One feature's view of the pair."""

    feature: str
    q: tuple[float, ...] | int
    k: tuple[float, ...] | int
    contribution: float
    code: str | None = None


@dataclass(frozen=True)
class VerificationReport:
    method: str
    questioned: str
    known: str
    entries: tuple[FeatureEntry, ...]
    overall: float
    threshold: float
    verdict: int
    lowlights: tuple[str, ...]


def explain_daam(
    q: SampleRecord,
    k: SampleRecord,
    threshold: float,
    schema: FeatureSchema | None = None,
    ocs: str = "mean",
    salience: float = DAAM_SALIENCE_CUTOFF,
) -> VerificationReport:
    """Per-feature cosine similarities with weak features called out."""
    score = score_pair(q, k, ocs)
    if schema is not None:
        names = list(schema.names())
    else:
        names = [f"f{j + 1}" for j in range(len(score.per_feature))]
    entries = tuple(
        FeatureEntry(name, qv, kv, sim)
        for name, qv, kv, sim in zip(names, q.soft, k.soft, score.per_feature)
    )
    lowlights = tuple(e.feature for e in entries if e.contribution < salience)
    return VerificationReport(
        method="daam",
        questioned=_record_name(q),
        known=_record_name(k),
        entries=entries,
        overall=score.overall,
        threshold=threshold,
        verdict=decide(score.overall, threshold),
        lowlights=lowlights,
    )


def explain_laam(
    q: SampleRecord,
    k: SampleRecord,
    bn_same: TrainedBayesNet,
    bn_diff: TrainedBayesNet,
    tau: float = 0.0,
    n_lowlights: int = LAAM_LOWLIGHT_COUNT,
) -> VerificationReport:
    """Per-node log-factor differences; they sum exactly to the ratio."""
    schema = bn_same.schema
    d = distance_vector(q.labels, k.labels, schema)
    contribs = llr_contributions(bn_same, bn_diff, d)
    entries = tuple(
        FeatureEntry(
            feat.name,
            q.labels[j],
            k.labels[j],
            contribs[j],
            code_string(d[j], feat.cardinality),
        )
        for j, feat in enumerate(schema.features)
    )
    total = math.fsum(contribs)
    order = sorted(range(len(entries)), key=lambda j: entries[j].contribution)
    lowlights = tuple(entries[j].feature for j in order[:n_lowlights])
    return VerificationReport(
        method="laam",
        questioned=_record_name(q),
        known=_record_name(k),
        entries=entries,
        overall=total,
        threshold=tau,
        verdict=SAME if total >= tau else DIFFERENT,
        lowlights=lowlights,
    )


def _expected_index(value: tuple[float, ...] | int) -> float:
    """Scalar summary of a feature value: the expected class index."""
    if isinstance(value, int):
        return float(value)
    return sum(i * p for i, p in enumerate(value))


def render_text(report: VerificationReport) -> str:
    lines = [
        f"method: {report.method}",
        f"questioned: {report.questioned}",
        f"known: {report.known}",
        "",
    ]
    width = max(len(e.feature) for e in report.entries)
    for e in report.entries:
        mark = " !" if e.feature in report.lowlights else ""
        if report.method == "daam":
            bar = "#" * round(e.contribution * 20)
            lines.append(
                f"  {e.feature:<{width}}  {e.contribution:8.4f}  {bar:<20}{mark}"
            )
        else:
            lines.append(
                f"  {e.feature:<{width}}  q={e.q} k={e.k} code={e.code}  "
                f"{e.contribution:+9.4f}{mark}"
            )
    verdict = "same" if report.verdict == SAME else "different"
    lines += [
        "",
        f"overall: {report.overall:.6f}",
        f"threshold: {report.threshold:.6f}",
        f"verdict: {verdict}",
    ]
    if report.lowlights:
        lines.append("lowlights: " + ", ".join(report.lowlights))
    return "\n".join(lines) + "\n"


def render_json(report: VerificationReport) -> str:
    doc = {
        "method": report.method,
        "questioned": report.questioned,
        "known": report.known,
        "features": [
            {
                "feature": e.feature,
                "q": list(e.q) if isinstance(e.q, tuple) else e.q,
                "k": list(e.k) if isinstance(e.k, tuple) else e.k,
                **({"code": e.code} if e.code is not None else {}),
                "contribution": e.contribution,
            }
            for e in report.entries
        ],
        "overall": report.overall,
        "threshold": report.threshold,
        "verdict": "same" if report.verdict == SAME else "different",
        "lowlights": list(report.lowlights),
    }
    return json.dumps(doc, indent=2) + "\n"


def render_plotdata(report: VerificationReport) -> str:
    """Paired-series CSV: one scalar per record per feature."""
    lines = ["feature,q,k"]
    for e in report.entries:
        lines.append(
            f"{e.feature},{_expected_index(e.q):.6g},{_expected_index(e.k):.6g}"
        )
    return "\n".join(lines) + "\n"


def render(report: VerificationReport, fmt: str = "text") -> str:
    if fmt == "text":
        return render_text(report)
    if fmt == "json":
        return render_json(report)
    if fmt == "plotdata":
        return render_plotdata(report)
    raise ValidationError(f"unknown report format {fmt!r}, expected one of {FORMATS}")
