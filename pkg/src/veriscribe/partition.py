"""Writer-aware dataset splitting and labeled pair generation.

Three split regimes are supported:

* ``unseen``  — the three parts draw from disjoint writer sets.
* ``shuffled`` — records are globally shuffled, then sliced by ratio.
* ``seen``    — every writer (with at least 5 samples) contributes to all
  three parts; per writer, validation and test sizes are floored and the
  remainder goes to training.

Pair labels use ``SAME == 0`` and ``DIFFERENT == 1`` throughout the
package (the same-writer hypothesis is index 0 everywhere).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .dataio import Dataset, SampleRecord
from .errors import InsufficientData, ValidationError

SAME = 0
DIFFERENT = 1

MODES = ("unseen", "shuffled", "seen")
PAIR_STRATEGIES = ("all", "balanced")

MIN_SAMPLES_SEEN = 5
DEFAULT_RATIOS = (0.6, 0.2, 0.2)


@dataclass(frozen=True)
class Split:
    train: tuple[SampleRecord, ...]
    val: tuple[SampleRecord, ...]
    test: tuple[SampleRecord, ...]
    mode: str
    seed: int
    excluded_writers: int = 0

    @property
    def parts(self) -> dict[str, tuple[SampleRecord, ...]]:
        return {"train": self.train, "val": self.val, "test": self.test}


class Pair(NamedTuple):
    a: SampleRecord
    b: SampleRecord
    label: int


@dataclass(frozen=True)
class PairSet:
    pairs: tuple[Pair, ...]

    def __post_init__(self) -> None:
        seen: set[frozenset] = set()
        for p in self.pairs:
            if p.a.key == p.b.key:
                raise ValidationError(f"pair of record {p.a.key} with itself")
            if p.label != pair_label(p.a, p.b):
                raise ValidationError(
                    f"pair {p.a.key} / {p.b.key}: label {p.label} contradicts writer ids"
                )
            key = frozenset((p.a.key, p.b.key))
            if key in seen:
                raise ValidationError(f"duplicate unordered pair {p.a.key} / {p.b.key}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def n_same(self) -> int:
        return sum(1 for p in self.pairs if p.label == SAME)

    @property
    def n_different(self) -> int:
        return len(self.pairs) - self.n_same

    def labels(self) -> np.ndarray:
        return np.array([p.label for p in self.pairs], dtype=np.int64)

    def restrict(self, label: int) -> "PairSet":
        return PairSet(tuple(p for p in self.pairs if p.label == label))


def pair_label(a: SampleRecord, b: SampleRecord) -> int:
    return SAME if a.writer_id == b.writer_id else DIFFERENT


def _check_ratios(ratios: Sequence[float]) -> tuple[float, float, float]:
    if len(ratios) != 3:
        raise ValidationError(f"ratios must have 3 entries, got {len(ratios)}")
    if any(r <= 0 for r in ratios):
        raise ValidationError(f"ratios must be positive, got {tuple(ratios)}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValidationError(f"ratios sum to {sum(ratios)!r}, not 1")
    return tuple(ratios)  # type: ignore[return-value]


def split(
    dataset: Dataset,
    mode: str,
    ratios: Sequence[float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> Split:
    """Partition a dataset into train/val/test under the given regime."""
    if mode not in MODES:
        raise ValidationError(f"unknown split mode {mode!r}, expected one of {MODES}")
    r_train, r_val, r_test = _check_ratios(ratios)
    if len(dataset) == 0:
        raise InsufficientData("cannot split an empty dataset")
    rng = np.random.default_rng(seed)

    if mode == "unseen":
        writers = list(dataset.index)
        if len(writers) < 3:
            raise InsufficientData(
                f"unseen split needs at least 3 writers, got {len(writers)}"
            )
        order = [writers[i] for i in rng.permutation(len(writers))]
        n_val = int(r_val * len(writers))
        n_test = int(r_test * len(writers))
        n_train = len(writers) - n_val - n_test
        groups = (
            order[:n_train],
            order[n_train:n_train + n_val],
            order[n_train + n_val:],
        )
        parts = tuple(
            tuple(
                dataset.records[p]
                for w in sorted(group)
                for p in dataset.index[w]
            )
            for group in groups
        )
        return Split(*parts, mode=mode, seed=seed)

    if mode == "shuffled":
        order = rng.permutation(len(dataset))
        n_val = int(r_val * len(dataset))
        n_test = int(r_test * len(dataset))
        n_train = len(dataset) - n_val - n_test
        take = lambda idxs: tuple(dataset.records[i] for i in idxs)
        return Split(
            take(order[:n_train]),
            take(order[n_train:n_train + n_val]),
            take(order[n_train + n_val:]),
            mode=mode,
            seed=seed,
        )

    # seen: split each writer's samples, excluding writers with too few
    train: list[SampleRecord] = []
    val: list[SampleRecord] = []
    test: list[SampleRecord] = []
    excluded = 0
    for writer in dataset.index:
        positions = dataset.index[writer]
        if len(positions) < MIN_SAMPLES_SEEN:
            excluded += 1
            continue
        order = rng.permutation(len(positions))
        n_val = int(r_val * len(positions))
        n_test = int(r_test * len(positions))
        n_train = len(positions) - n_val - n_test
        recs = [dataset.records[positions[i]] for i in order]
        train.extend(recs[:n_train])
        val.extend(recs[n_train:n_train + n_val])
        test.extend(recs[n_train + n_val:])
    if not train:
        raise InsufficientData(
            f"seen split: no writer has >= {MIN_SAMPLES_SEEN} samples"
        )
    return Split(
        tuple(train), tuple(val), tuple(test),
        mode=mode, seed=seed, excluded_writers=excluded,
    )


def generate_pairs(
    part: Sequence[SampleRecord],
    strategy: str = "balanced",
    k: int = 1,
    seed: int = 0,
) -> PairSet:
    """Build labeled record pairs from one split part.

    ``all`` enumerates every unordered pair.  ``balanced`` takes every
    intra-writer pair plus ``k`` times as many inter-writer pairs sampled
    without replacement (capped at the number available).
    """
    if strategy not in PAIR_STRATEGIES:
        raise ValidationError(
            f"unknown pair strategy {strategy!r}, expected one of {PAIR_STRATEGIES}"
        )
    if len(part) < 2:
        raise InsufficientData(f"need at least 2 records to pair, got {len(part)}")

    if strategy == "all":
        pairs = tuple(
            Pair(a, b, pair_label(a, b))
            for a, b in itertools.combinations(part, 2)
        )
        return PairSet(pairs)

    if k < 1:
        raise ValidationError(f"balanced pairing needs k >= 1, got {k}")
    same_idx: list[tuple[int, int]] = []
    diff_idx: list[tuple[int, int]] = []
    for i, j in itertools.combinations(range(len(part)), 2):
        if part[i].writer_id == part[j].writer_id:
            same_idx.append((i, j))
        else:
            diff_idx.append((i, j))
    if not same_idx:
        raise InsufficientData("balanced pairing: no intra-writer pairs in this part")
    rng = np.random.default_rng(seed)
    n_diff = min(k * len(same_idx), len(diff_idx))
    chosen = sorted(rng.choice(len(diff_idx), size=n_diff, replace=False).tolist())
    pairs = [Pair(part[i], part[j], SAME) for i, j in same_idx]
    pairs.extend(Pair(part[i], part[j], DIFFERENT) for i, j in (diff_idx[c] for c in chosen))
    return PairSet(tuple(pairs))
