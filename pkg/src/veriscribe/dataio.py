"""Sample records and their on-disk formats.

Two formats are owned here and shared with any external feature extractor:

* Labels CSV: header ``writer_id,sample_id,f1,...,f15``, one record per
  line, integer class indices, LF line endings.  Reading then writing a
  file produced by :func:`write_labels_csv` is byte-exact.

* Soft-record file: JSON Lines.  The first line is a header object
  ``{"format": "veriscribe-soft", "version": 1}``; every following line is
  ``{"writer_id": ..., "sample_id": ..., "soft": [[...], ...]}`` with 15
  probability vectors whose lengths match the schema cardinalities.
  Probabilities are printed with 9 significant digits; on read a vector is
  renormalized when its sum is within 1e-6 of 1 and rejected otherwise.

Loading is all-or-nothing: any malformed line or invariant violation
raises before a dataset is returned.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import MissingSoft, ParseError, ValidationError
from .schema import N_FEATURES, FeatureSchema

SOFT_FORMAT_NAME = "veriscribe-soft"
SOFT_FORMAT_VERSION = 1

_SOFT_SUM_TOL = 1e-6


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write a file via a same-directory temp file and rename.

    A crash mid-write leaves either the old content or the new, never a
    truncated mix.
    """
    path = Path(path)
    fd, tmp = tempfile.mkstemp(
        dir=path.parent, prefix=path.name + ".", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


@dataclass(frozen=True)
class SampleRecord:
    """One handwriting sample: ids, 15 hard labels, optional soft vectors."""

    writer_id: str
    sample_id: str
    labels: tuple[int, ...]
    soft: tuple[tuple[float, ...], ...] | None = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.writer_id, self.sample_id)


class Dataset:
    """An immutable collection of validated records plus a writer index."""

    def __init__(self, schema: FeatureSchema, records: Iterable[SampleRecord]):
        self.schema = schema
        self.records: tuple[SampleRecord, ...] = tuple(records)
        index: dict[str, list[int]] = {}
        seen: set[tuple[str, str]] = set()
        for pos, rec in enumerate(self.records):
            validate_record(rec, schema)
            if rec.key in seen:
                raise ValidationError(
                    f"duplicate record {rec.writer_id}/{rec.sample_id}"
                )
            seen.add(rec.key)
            index.setdefault(rec.writer_id, []).append(pos)
        self.index: dict[str, tuple[int, ...]] = {
            w: tuple(ps) for w, ps in index.items()
        }

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def writers(self) -> tuple[str, ...]:
        return tuple(self.index)

    def by_writer(self, writer_id: str) -> tuple[SampleRecord, ...]:
        return tuple(self.records[p] for p in self.index[writer_id])

    @property
    def has_soft(self) -> bool:
        return all(rec.soft is not None for rec in self.records)


def validate_record(rec: SampleRecord, schema: FeatureSchema) -> None:
    """Check one record against the schema; raises ValidationError."""
    where = f"record {rec.writer_id}/{rec.sample_id}"
    if len(rec.labels) != N_FEATURES:
        raise ValidationError(f"{where}: expected {N_FEATURES} labels, got {len(rec.labels)}")
    for j, label in enumerate(rec.labels):
        n = schema.cardinality(j)
        if not (0 <= label < n):
            raise ValidationError(
                f"{where} f{j + 1} ({schema.features[j].name}): "
                f"label {label} out of range [0, {n})"
            )
    if rec.soft is not None:
        if len(rec.soft) != N_FEATURES:
            raise ValidationError(
                f"{where}: expected {N_FEATURES} soft vectors, got {len(rec.soft)}"
            )
        for j, vec in enumerate(rec.soft):
            n = schema.cardinality(j)
            if len(vec) != n:
                raise ValidationError(
                    f"{where} f{j + 1}: soft vector length {len(vec)} != cardinality {n}"
                )
            if any(p < 0.0 for p in vec):
                raise ValidationError(f"{where} f{j + 1}: negative soft probability")
            total = sum(vec)
            if abs(total - 1.0) > _SOFT_SUM_TOL:
                raise ValidationError(
                    f"{where} f{j + 1}: soft vector sums to {total!r}, not 1"
                )


def argmax_assignment(rec: SampleRecord) -> tuple[int, ...]:
    """Index of the most probable class per feature; ties go to the lowest index."""
    if rec.soft is None:
        raise MissingSoft(f"record {rec.writer_id}/{rec.sample_id} has no soft vectors")
    return tuple(max(range(len(vec)), key=vec.__getitem__) for vec in rec.soft)


# -- labels CSV --------------------------------------------------------------

_CSV_HEADER = ["writer_id", "sample_id"] + [f"f{j}" for j in range(1, N_FEATURES + 1)]


def read_labels_csv(path: str | Path, schema: FeatureSchema) -> Dataset:
    """Read a labels CSV into a validated Dataset."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected header") from None
        if header != _CSV_HEADER:
            raise ParseError(f"{path}: bad header {header!r}")
        records = []
        for row in reader:
            lineno = reader.line_num
            if len(row) != len(_CSV_HEADER):
                raise ParseError(
                    f"{path}:{lineno}: expected {len(_CSV_HEADER)} fields, got {len(row)}"
                )
            try:
                labels = tuple(int(tok) for tok in row[2:])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: labels must be integers") from None
            records.append(SampleRecord(writer_id=row[0], sample_id=row[1], labels=labels))
    return Dataset(schema, records)


def write_labels_csv(dataset: Dataset | Sequence[SampleRecord], path: str | Path) -> None:
    records = dataset.records if isinstance(dataset, Dataset) else dataset
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_HEADER)
    for rec in records:
        writer.writerow([rec.writer_id, rec.sample_id, *rec.labels])
    atomic_write_text(path, buf.getvalue())


# -- soft-record file --------------------------------------------------------

def _format_soft(soft: tuple[tuple[float, ...], ...]) -> str:
    vecs = (
        "[" + ", ".join(format(p, ".9g") for p in vec) + "]" for vec in soft
    )
    return "[" + ", ".join(vecs) + "]"


def soft_record_line(rec: SampleRecord) -> str:
    """One JSON line for a record with soft vectors (9 significant digits)."""
    if rec.soft is None:
        raise MissingSoft(f"record {rec.writer_id}/{rec.sample_id} has no soft vectors")
    return (
        f'{{"writer_id": {json.dumps(rec.writer_id)}, '
        f'"sample_id": {json.dumps(rec.sample_id)}, '
        f'"soft": {_format_soft(rec.soft)}}}'
    )


def write_soft_records(dataset: Dataset | Sequence[SampleRecord], path: str | Path) -> None:
    records = dataset.records if isinstance(dataset, Dataset) else dataset
    buf = io.StringIO()
    buf.write(json.dumps({"format": SOFT_FORMAT_NAME, "version": SOFT_FORMAT_VERSION}))
    buf.write("\n")
    for rec in records:
        buf.write(soft_record_line(rec))
        buf.write("\n")
    atomic_write_text(path, buf.getvalue())


def read_soft_records(path: str | Path, schema: FeatureSchema) -> Dataset:
    """Read a soft-record file; labels become the per-feature argmax."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        first = True
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise ParseError(f"{path}:{lineno}: expected a JSON object")
            if first and "format" in obj:
                _check_soft_header(obj, path, lineno)
                first = False
                continue
            first = False
            records.append(_parse_soft_record(obj, schema, path, lineno))
    return Dataset(schema, records)


def _check_soft_header(obj: dict, path, lineno: int) -> None:
    if obj.get("format") != SOFT_FORMAT_NAME:
        raise ParseError(f"{path}:{lineno}: unknown format {obj.get('format')!r}")
    if obj.get("version") != SOFT_FORMAT_VERSION:
        raise ParseError(
            f"{path}:{lineno}: unsupported soft-record version {obj.get('version')!r}"
        )


def _parse_soft_record(obj: dict, schema: FeatureSchema, path, lineno: int) -> SampleRecord:
    extra = set(obj) - {"writer_id", "sample_id", "soft"}
    if extra:
        raise ParseError(f"{path}:{lineno}: unknown keys {sorted(extra)}")
    try:
        writer_id, sample_id, soft = obj["writer_id"], obj["sample_id"], obj["soft"]
    except KeyError as exc:
        raise ParseError(f"{path}:{lineno}: missing key {exc.args[0]!r}") from None
    if not isinstance(writer_id, str) or not isinstance(sample_id, str):
        raise ParseError(f"{path}:{lineno}: ids must be strings")
    if not isinstance(soft, list) or not all(isinstance(v, list) for v in soft):
        raise ParseError(f"{path}:{lineno}: 'soft' must be an array of arrays")

    where = f"record {writer_id}/{sample_id}"
    if len(soft) != N_FEATURES:
        raise ValidationError(f"{where}: expected {N_FEATURES} soft vectors, got {len(soft)}")
    vectors = []
    for j, vec in enumerate(soft):
        n = schema.cardinality(j)
        if len(vec) != n:
            raise ValidationError(
                f"{where} f{j + 1}: soft vector length {len(vec)} != cardinality {n}"
            )
        try:
            values = [float(p) for p in vec]
        except (TypeError, ValueError):
            raise ParseError(f"{path}:{lineno}: non-numeric probability") from None
        if any(p < 0.0 for p in values):
            raise ValidationError(f"{where} f{j + 1}: negative soft probability")
        total = sum(values)
        if abs(total - 1.0) > _SOFT_SUM_TOL:
            raise ValidationError(f"{where} f{j + 1}: soft vector sums to {total!r}, not 1")
        if total != 1.0:
            values = [p / total for p in values]
        vectors.append(tuple(values))

    soft_t = tuple(vectors)
    labels = tuple(max(range(len(vec)), key=vec.__getitem__) for vec in soft_t)
    return SampleRecord(writer_id=writer_id, sample_id=sample_id, labels=labels, soft=soft_t)


# -- array views -------------------------------------------------------------

def labels_array(records: Sequence[SampleRecord]) -> np.ndarray:
    """Hard labels as an (N, 15) integer array."""
    return np.array([rec.labels for rec in records], dtype=np.int64).reshape(
        len(records), N_FEATURES
    )


def soft_array(records: Sequence[SampleRecord], j: int) -> np.ndarray:
    """Soft vectors of feature position ``j`` as an (N, n_j) float array."""
    for rec in records:
        if rec.soft is None:
            raise MissingSoft(
                f"record {rec.writer_id}/{rec.sample_id} has no soft vectors"
            )
    return np.array([rec.soft[j] for rec in records], dtype=np.float64)
