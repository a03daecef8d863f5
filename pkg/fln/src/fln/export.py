"""Write the model's softmax outputs as a soft-record file.

The file is JSON Lines: a header line naming the format and version,
then one record per image with the writer id, sample id, and the 15
probability vectors printed to 9 significant digits.  Vectors are
renormalized in float64 before formatting so every written vector sums
to 1 within the ingester's tolerance.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from .features import SOFT_FORMAT_NAME, SOFT_FORMAT_VERSION
from .model import SkipAutoEncoder


def soft_records(
    model: SkipAutoEncoder, images: np.ndarray
) -> list[tuple[tuple[float, ...], ...]]:
    """Per-image feature distributions: a tuple of 15 probability vectors."""
    model.eval()
    softs = model.soft_vectors(torch.from_numpy(images))
    per_feature = []
    for vecs in softs:
        arr = vecs.numpy().astype(np.float64)
        arr /= arr.sum(axis=1, keepdims=True)
        per_feature.append(arr)
    return [
        tuple(tuple(arr[i]) for arr in per_feature) for i in range(len(images))
    ]


def _format_vectors(soft: tuple[tuple[float, ...], ...]) -> str:
    vecs = ("[" + ", ".join(format(p, ".9g") for p in vec) + "]" for vec in soft)
    return "[" + ", ".join(vecs) + "]"


def export_soft(
    model: SkipAutoEncoder,
    images: np.ndarray,
    ids: Sequence[tuple[str, str]],
    path: str | Path,
) -> None:
    """Run the model on ``images`` and write one soft record per id."""
    if len(ids) != len(images):
        raise ValueError(f"{len(images)} images but {len(ids)} ids")
    lines = [json.dumps({"format": SOFT_FORMAT_NAME, "version": SOFT_FORMAT_VERSION})]
    for (writer_id, sample_id), soft in zip(ids, soft_records(model, images)):
        lines.append(
            f'{{"writer_id": {json.dumps(writer_id)}, '
            f'"sample_id": {json.dumps(sample_id)}, '
            f'"soft": {_format_vectors(soft)}}}'
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
