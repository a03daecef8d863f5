"""Seeded toy-scale training on the procedural glyph corpus.

Inputs are corrupted on the fly — a random vertical translation of up
to 12 pixels and uniform noise written into half the pixels — while the
targets stay the clean, centered originals, so reconstruction has to
undo both.

The returned model is a Polyak (exponential moving) average of the
optimizer trajectory: averaged weights ride out the step-to-step jitter
of stochastic augmentation and are the better model at toy scale.
Progress is logged as the averaged model's total loss on one fixed
pre-corrupted batch, evaluated after every ``log_every`` optimizer
steps; training the same config twice gives the same log.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from .glyphs import make_corpus
from .losses import total_loss
from .model import SkipAutoEncoder

MAX_SHIFT = 12
NOISE_FRACTION = 0.5


def corrupt(images: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vertically translate within ±12 px, then overwrite 50% of pixels."""
    out = np.empty_like(images)
    size = images.shape[-1]
    n_noised = int(round(NOISE_FRACTION * images[0].size))
    for i, img in enumerate(images):
        shift = int(rng.integers(-MAX_SHIFT, MAX_SHIFT + 1))
        moved = np.zeros_like(img)
        if shift >= 0:
            moved[shift:] = img[: size - shift]
        else:
            moved[:shift] = img[-shift:]
        flat = moved.reshape(-1)
        where = rng.choice(flat.size, size=n_noised, replace=False)
        flat[where] = rng.random(n_noised, dtype=np.float32)
        out[i] = flat.reshape(img.shape)
    return out


@dataclass
class TrainConfig:
    n_images: int = 256
    steps: int = 620
    batch_size: int = 32
    lr: float = 1e-3
    log_every: int = 10
    ema_decay: float = 0.99
    seed: int = 0
    use_skips: bool = True


@dataclass
class TrainResult:
    model: SkipAutoEncoder
    loss_log: list[float]
    head_agreement: float
    config: TrainConfig = field(repr=False)


@torch.no_grad()
def argmax_agreement(
    model: SkipAutoEncoder, images: np.ndarray, labels: np.ndarray
) -> float:
    """Fraction of (image, feature) cells where the head argmax hits the label."""
    model.eval()
    softs = model.soft_vectors(torch.from_numpy(images))
    hits = sum(
        int((vecs.argmax(dim=1).numpy() == labels[:, j]).sum())
        for j, vecs in enumerate(softs)
    )
    return hits / (labels.shape[0] * labels.shape[1])


def train(config: TrainConfig = TrainConfig()) -> TrainResult:
    torch.manual_seed(config.seed)
    images, labels = make_corpus(config.n_images, seed=config.seed)
    labels_t = torch.from_numpy(labels)

    # One fixed corrupted batch, held out of the step RNG, to log against.
    eval_rng = np.random.default_rng([config.seed, 1])
    eval_idx = eval_rng.choice(len(images), size=min(64, len(images)), replace=False)
    eval_in = torch.from_numpy(corrupt(images[eval_idx], eval_rng))
    eval_target = torch.from_numpy(images[eval_idx])
    eval_labels = labels_t[eval_idx]

    model = SkipAutoEncoder(use_skips=config.use_skips)
    averaged = SkipAutoEncoder(use_skips=config.use_skips)
    averaged.load_state_dict(model.state_dict())
    for p in averaged.parameters():
        p.requires_grad_(False)

    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    step_rng = np.random.default_rng([config.seed, 2])

    loss_log: list[float] = []
    for step in range(1, config.steps + 1):
        model.train()
        idx = step_rng.choice(len(images), size=config.batch_size, replace=False)
        batch_in = torch.from_numpy(corrupt(images[idx], step_rng))
        optimizer.zero_grad()
        recon, logits = model(batch_in)
        loss = total_loss(recon, torch.from_numpy(images[idx]), logits, labels_t[idx])
        loss.backward()
        optimizer.step()

        with torch.no_grad():
            for avg_p, p in zip(averaged.parameters(), model.parameters()):
                avg_p.mul_(config.ema_decay).add_(p, alpha=1.0 - config.ema_decay)

        if step % config.log_every == 0:
            averaged.eval()
            with torch.no_grad():
                recon, logits = averaged(eval_in)
                loss_log.append(
                    float(total_loss(recon, eval_target, logits, eval_labels))
                )

    return TrainResult(
        model=averaged,
        loss_log=loss_log,
        head_agreement=argmax_agreement(averaged, images, labels),
        config=config,
    )
