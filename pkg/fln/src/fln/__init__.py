"""Toy-scale feature learner: a skip auto-encoder whose bottleneck feeds
15 softmax heads, one per handwriting feature, trained on procedural
glyph images and exported as soft-record files for the verifier."""

from .export import export_soft, soft_records
from .features import CARDINALITIES, FEATURE_NAMES, IMAGE_SIZE, N_FEATURES
from .glyphs import make_corpus, make_writer_corpus, render_glyph, sample_label_vectors
from .losses import head_loss, recon_loss, total_loss
from .model import FeatureHead, SkipAutoEncoder
from .training import TrainConfig, TrainResult, argmax_agreement, corrupt, train

__all__ = [
    "CARDINALITIES",
    "FEATURE_NAMES",
    "IMAGE_SIZE",
    "N_FEATURES",
    "FeatureHead",
    "SkipAutoEncoder",
    "TrainConfig",
    "TrainResult",
    "argmax_agreement",
    "corrupt",
    "export_soft",
    "head_loss",
    "make_corpus",
    "make_writer_corpus",
    "recon_loss",
    "render_glyph",
    "sample_label_vectors",
    "soft_records",
    "total_loss",
    "train",
]
