"""Training-loop contracts at smoke scale (the long run lives in
test_end_to_end.py)."""

import numpy as np
import pytest

from fln.glyphs import make_corpus
from fln.training import MAX_SHIFT, NOISE_FRACTION, TrainConfig, corrupt, train

SMOKE = TrainConfig(n_images=48, steps=24, batch_size=16, log_every=6, seed=3)


class TestCorrupt:
    def test_preserves_shape_dtype_and_range(self):
        images, _ = make_corpus(6, seed=0)
        noisy = corrupt(images, np.random.default_rng(1))
        assert noisy.shape == images.shape
        assert noisy.dtype == np.float32
        assert noisy.min() >= 0.0
        assert noisy.max() <= 1.0

    def test_does_not_mutate_the_input(self):
        images, _ = make_corpus(3, seed=0)
        kept = images.copy()
        corrupt(images, np.random.default_rng(1))
        np.testing.assert_array_equal(images, kept)

    def test_overwrites_about_half_the_pixels(self):
        images, _ = make_corpus(4, seed=0)
        noisy = corrupt(images, np.random.default_rng(2))
        for img, out in zip(images, noisy):
            changed = (img != out).mean()
            assert 0.3 <= changed <= NOISE_FRACTION + 0.35

    def test_translation_stays_within_bounds(self):
        # A full-ink image makes the translation margin directly visible:
        # after shifting by s, exactly |s| rows at one edge are noise-only.
        probe = np.ones((20, 64, 64), dtype=np.float32)
        noisy = corrupt(probe, np.random.default_rng(3))
        for out in noisy:
            solid = (out == 1.0).mean(axis=1) > 0.2
            rows = np.flatnonzero(solid)
            assert rows.size >= 64 - MAX_SHIFT
            gap = 64 - rows.size
            assert 0 <= gap <= MAX_SHIFT

    def test_seeded_determinism(self):
        images, _ = make_corpus(4, seed=0)
        a = corrupt(images, np.random.default_rng(7))
        b = corrupt(images, np.random.default_rng(7))
        np.testing.assert_array_equal(a, b)


class TestTrain:
    def test_loss_log_length_matches_schedule(self):
        result = train(SMOKE)
        assert len(result.loss_log) == SMOKE.steps // SMOKE.log_every

    def test_smoke_run_reduces_the_loss(self):
        result = train(SMOKE)
        assert result.loss_log[-1] < result.loss_log[0]

    def test_repeatable_given_config(self):
        a = train(SMOKE)
        b = train(SMOKE)
        assert a.loss_log == b.loss_log
        assert a.head_agreement == b.head_agreement

    def test_ablated_skip_variant_still_trains(self):
        import dataclasses

        config = dataclasses.replace(SMOKE, use_skips=False)
        result = train(config)
        assert result.model.use_skips is False
        assert result.loss_log[-1] < result.loss_log[0]
