"""Synthetic writers with controllable consistency.

Each writer gets, per feature, a categorical distribution that blends a
"home" class (drawn from the population marginal) with the marginal
itself:

    p_writer = c * one_hot(home) + (1 - c) * marginal

so ``c = 1`` gives perfectly consistent writers and ``c = 0`` collapses
everyone onto the population distribution.  Sampling uses one RNG
substream per writer, keyed by (seed, writer index), so growing the
dataset never reshuffles records that already existed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import Dataset, SampleRecord
from .errors import ValidationError
from .schema import FeatureSchema


@dataclass(frozen=True)
class WriterProfile:
    """Per-writer categorical distributions, one per feature."""

    writer_id: str
    distributions: tuple[tuple[float, ...], ...]
    consistency: float

    def __post_init__(self) -> None:
        for j, dist in enumerate(self.distributions):
            total = sum(dist)
            if abs(total - 1.0) > 1e-9:
                raise ValidationError(
                    f"profile {self.writer_id} f{j + 1}: distribution sums to {total!r}"
                )
            if any(p < 0 for p in dist):
                raise ValidationError(
                    f"profile {self.writer_id} f{j + 1}: negative probability"
                )


def _writer_rng(seed: int, index: int, purpose: int) -> np.random.Generator:
    # Separate substreams per (writer, purpose) keep profile draws and
    # sample draws uncorrelated even when the same seed is reused.
    return np.random.default_rng(np.random.SeedSequence([seed, index, purpose]))


def generate_profiles(
    schema: FeatureSchema,
    n_writers: int,
    consistency: float,
    seed: int = 0,
) -> list[WriterProfile]:
    """Draw writer profiles with the given consistency in [0, 1]."""
    if not 0.0 <= consistency <= 1.0:
        raise ValidationError(f"consistency must be in [0, 1], got {consistency!r}")
    if n_writers < 1:
        raise ValidationError(f"n_writers must be positive, got {n_writers}")
    profiles = []
    for i in range(n_writers):
        rng = _writer_rng(seed, i, 0)
        dists = []
        for feat in schema.features:
            marginal = np.asarray(feat.default_marginal, dtype=np.float64)
            home = int(rng.choice(feat.cardinality, p=marginal / marginal.sum()))
            mixed = (1.0 - consistency) * marginal
            mixed[home] += consistency
            dists.append(tuple(float(p) for p in mixed))
        profiles.append(
            WriterProfile(f"w{i:03d}", tuple(dists), consistency)
        )
    return profiles


def sample_dataset(
    schema: FeatureSchema,
    profiles: list[WriterProfile],
    samples_per_writer: int,
    seed: int = 0,
) -> Dataset:
    """Sample labeled records from writer profiles (no soft vectors)."""
    if samples_per_writer < 1:
        raise ValidationError(
            f"samples_per_writer must be positive, got {samples_per_writer}"
        )
    records = []
    for i, profile in enumerate(profiles):
        if len(profile.distributions) != len(schema.features):
            raise ValidationError(
                f"profile {profile.writer_id}: {len(profile.distributions)} "
                f"distributions for {len(schema.features)} features"
            )
        rng = _writer_rng(seed, i, 1)
        columns = []
        for feat, dist in zip(schema.features, profile.distributions):
            if len(dist) != feat.cardinality:
                raise ValidationError(
                    f"profile {profile.writer_id} {feat.name}: "
                    f"{len(dist)} classes, schema has {feat.cardinality}"
                )
            p = np.asarray(dist, dtype=np.float64)
            columns.append(rng.choice(feat.cardinality, size=samples_per_writer, p=p / p.sum()))
        labels = np.stack(columns, axis=1)
        for t in range(samples_per_writer):
            records.append(
                SampleRecord(
                    writer_id=profile.writer_id,
                    sample_id=f"s{t:03d}",
                    labels=tuple(int(v) for v in labels[t]),
                )
            )
    return Dataset(schema, tuple(records))


def soften(dataset: Dataset, sharpness: float) -> Dataset:
    """Attach synthetic soft vectors peaked on each record's labels.

    Per feature the vector is ``s * one_hot(label) + (1 - s) * uniform``,
    so ``sharpness = 1`` reproduces hard one-hot scores.  Deterministic;
    labels are unchanged.
    """
    if not 0.0 < sharpness <= 1.0:
        raise ValidationError(f"sharpness must be in (0, 1], got {sharpness!r}")
    schema = dataset.schema
    softened = []
    for rec in dataset.records:
        soft = []
        for feat, label in zip(schema.features, rec.labels):
            base = (1.0 - sharpness) / feat.cardinality
            vec = [base] * feat.cardinality
            vec[label] = sharpness + base
            soft.append(tuple(vec))
        softened.append(
            SampleRecord(rec.writer_id, rec.sample_id, rec.labels, tuple(soft))
        )
    return Dataset(schema, tuple(softened))
