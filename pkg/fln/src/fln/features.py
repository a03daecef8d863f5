"""The 15-cue contract shared with the verification engine.

The verifier consumes soft-record files whose records carry one
probability vector per handwriting feature, in this fixed order and
with these class counts.  The constants here mirror that file-format
contract; nothing else in this package depends on the verifier.
"""

FEATURE_NAMES = (
    "pen_pressure",
    "tilt",
    "entry_stroke_a",
    "slantness",
    "size",
    "dimension",
    "letter_spacing",
    "is_lowercase",
    "is_continuous",
    "constancy",
    "staff_of_a",
    "staff_of_d",
    "exit_stroke_d",
    "word_formation",
    "formation_n",
)

CARDINALITIES = (2, 2, 2, 4, 3, 3, 3, 2, 2, 2, 4, 3, 4, 2, 2)

N_FEATURES = len(FEATURE_NAMES)
assert len(CARDINALITIES) == N_FEATURES

IMAGE_SIZE = 64

# Soft-record file header, fixed by the ingesting side.
SOFT_FORMAT_NAME = "veriscribe-soft"
SOFT_FORMAT_VERSION = 1
