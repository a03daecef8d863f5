"""Procedurally rendered 64x64 glyph images with known feature labels.

Each of the 15 features owns a fixed slot on a 5x3 grid; the class of
the feature is drawn as a filled stroke block whose height grows with
the class index (class ``c`` fills ``3c + 2`` rows), so classes stay
separable even through aggressive pooling and heavy pixel noise.
Slots sit inside a vertical band with a 12-pixel margin top and
bottom, so the training-time vertical translations never push content
out of frame.  A per-sample jitter of up to one pixel keeps repeated
label vectors from rendering into byte-identical images.
"""

from __future__ import annotations

import numpy as np

from .features import CARDINALITIES, IMAGE_SIZE, N_FEATURES

# Slot geometry: 5 columns x 3 rows inside rows [14, 50).
_SLOT_W = 12
_SLOT_H = 12
_COL0 = 2
_ROW0 = 14
_BLOCK_STEP = 3  # rows of block height added per class step
_BLOCK_BASE = 2  # rows for class 0; class 3 fills 11 <= _SLOT_H rows


def _slot_origin(feature: int) -> tuple[int, int]:
    row, col = divmod(feature, 5)
    return _ROW0 + row * _SLOT_H, _COL0 + col * _SLOT_W


def render_glyph(
    labels: np.ndarray | tuple[int, ...],
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Render one label vector to a float32 image in [0, 1]."""
    labels = np.asarray(labels)
    if labels.shape != (N_FEATURES,):
        raise ValueError(f"expected {N_FEATURES} labels, got shape {labels.shape}")
    img = np.zeros((IMAGE_SIZE, IMAGE_SIZE), dtype=np.float32)
    for j, label in enumerate(labels):
        if not 0 <= label < CARDINALITIES[j]:
            raise ValueError(
                f"feature {j}: label {label} out of range [0, {CARDINALITIES[j]})"
            )
        r0, c0 = _slot_origin(j)
        if rng is not None:
            r0 += int(rng.integers(0, 2))
            c0 += int(rng.integers(0, 2))
        height = _BLOCK_BASE + int(label) * _BLOCK_STEP
        img[r0 : r0 + height, c0 : c0 + _SLOT_W - 2] = 1.0
    return img


def sample_label_vectors(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random label vectors, one class draw per feature."""
    return np.stack(
        [rng.integers(0, k, size=n) for k in CARDINALITIES], axis=1
    ).astype(np.int64)


def make_corpus(n_images: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """A seeded corpus of (images, labels): (N, 64, 64) float32, (N, 15) int64."""
    rng = np.random.default_rng(seed)
    labels = sample_label_vectors(n_images, rng)
    images = np.stack([render_glyph(row, rng) for row in labels])
    return images, labels


def make_writer_corpus(
    n_writers: int,
    samples_per_writer: int,
    consistency: float = 0.9,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray, list[tuple[str, str]]]:
    """A corpus organized by writer, for verification experiments.

    Each writer has a home class per feature; every sample keeps the
    home class with probability ``consistency`` and otherwise flips to
    a uniformly random other class.  Returns (images, labels, ids) with
    ids as ``(writer_id, sample_id)`` pairs.
    """
    if not 0.0 <= consistency <= 1.0:
        raise ValueError(f"consistency must be in [0, 1], got {consistency}")
    rng = np.random.default_rng(seed)
    homes = sample_label_vectors(n_writers, rng)
    images, labels, ids = [], [], []
    for w in range(n_writers):
        for s in range(samples_per_writer):
            row = homes[w].copy()
            for j, k in enumerate(CARDINALITIES):
                if k > 1 and rng.random() >= consistency:
                    shift = int(rng.integers(1, k))
                    row[j] = (row[j] + shift) % k
            images.append(render_glyph(row, rng))
            labels.append(row)
            ids.append((f"w{w:03d}", f"s{s:03d}"))
    return np.stack(images), np.stack(labels), ids
