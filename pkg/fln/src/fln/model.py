"""Skip auto-encoder with one classification head per handwriting feature.

The encoder is five levels of 3x3 convolution + 2x2 max-pool with
filter widths doubling from 16, taking a 64x64x1 image down to a
2x2x256 code.  That code fans out into 15 learning units — a 128-wide
hidden layer and a softmax per feature — whose hidden activations are
concatenated and projected through a 512-wide fully-connected layer.
The projection, reshaped to 1x1x512, seeds the decoder: five levels of
2x upsampling + 3x3 convolution with filter widths halving from 256,
each optionally concatenated with the encoder map of matching spatial
size, closing at a sigmoid-activated 64x64x1 reconstruction.
"""

from __future__ import annotations

import torch
from torch import nn

from .features import CARDINALITIES, IMAGE_SIZE

_ENCODER_WIDTHS = (16, 32, 64, 128, 256)
_HEAD_HIDDEN = 128
_COMBINE_WIDTH = 512


class FeatureHead(nn.Module):
    """One learning unit: hidden layer plus class logits for one feature."""

    def __init__(self, in_features: int, n_classes: int):
        super().__init__()
        self.hidden = nn.Linear(in_features, _HEAD_HIDDEN)
        self.act = nn.ReLU()
        self.logits = nn.Linear(_HEAD_HIDDEN, n_classes)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        h = self.act(self.hidden(x))
        return h, self.logits(h)


class SkipAutoEncoder(nn.Module):
    """Encoder, 15 feature heads, and a skip-connected decoder.

    ``use_skips=False`` drops the encoder-to-decoder concatenations
    (the plain auto-encoder variant); everything else is unchanged.
    """

    def __init__(
        self,
        cardinalities: tuple[int, ...] = CARDINALITIES,
        use_skips: bool = True,
    ):
        super().__init__()
        self.cardinalities = tuple(cardinalities)
        self.use_skips = use_skips

        self.encoder = nn.ModuleList()
        in_ch = 1
        for width in _ENCODER_WIDTHS:
            self.encoder.append(
                nn.Sequential(
                    nn.Conv2d(in_ch, width, kernel_size=3, padding=1),
                    nn.ReLU(),
                    nn.MaxPool2d(2),
                )
            )
            in_ch = width

        code_hw = IMAGE_SIZE // 2 ** len(_ENCODER_WIDTHS)
        code_features = _ENCODER_WIDTHS[-1] * code_hw * code_hw
        self.heads = nn.ModuleList(
            FeatureHead(code_features, k) for k in self.cardinalities
        )
        self.combine = nn.Sequential(
            nn.Linear(_HEAD_HIDDEN * len(self.cardinalities), _COMBINE_WIDTH),
            nn.ReLU(),
        )

        decoder_widths = tuple(reversed(_ENCODER_WIDTHS))  # 256 .. 16
        self.decoder = nn.ModuleList()
        in_ch = _COMBINE_WIDTH
        for level, width in enumerate(decoder_widths):
            self.decoder.append(
                nn.Sequential(
                    nn.Upsample(scale_factor=2, mode="nearest"),
                    nn.Conv2d(in_ch, width, kernel_size=3, padding=1),
                    nn.ReLU(),
                )
            )
            skip_ch = decoder_widths[level] if use_skips else 0
            in_ch = width + skip_ch
        self.output = nn.Sequential(
            nn.Upsample(scale_factor=2, mode="nearest"),
            nn.Conv2d(in_ch, 1, kernel_size=3, padding=1),
            nn.Sigmoid(),
        )

    def forward(
        self, x: torch.Tensor
    ) -> tuple[torch.Tensor, list[torch.Tensor]]:
        """Returns (reconstruction, per-feature logits)."""
        if x.dim() == 3:
            x = x.unsqueeze(1)
        encoded = []
        h = x
        for stage in self.encoder:
            h = stage(h)
            encoded.append(h)

        code = h.flatten(start_dim=1)
        hiddens, logits = [], []
        for head in self.heads:
            hidden, logit = head(code)
            hiddens.append(hidden)
            logits.append(logit)
        d = self.combine(torch.cat(hiddens, dim=1)).reshape(-1, _COMBINE_WIDTH, 1, 1)

        for level, stage in enumerate(self.decoder):
            d = stage(d)
            if self.use_skips:
                d = torch.cat([d, encoded[-1 - level]], dim=1)
        return self.output(d).squeeze(1), logits

    @torch.no_grad()
    def soft_vectors(self, x: torch.Tensor) -> list[torch.Tensor]:
        """Per-feature class probabilities (softmax over logits)."""
        _, logits = self(x)
        return [torch.softmax(l, dim=1) for l in logits]
