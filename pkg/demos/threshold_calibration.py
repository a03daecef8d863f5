"""Sweep decision thresholds and watch precision trade against recall.

The cosine verifier needs a threshold on the overall similarity before
it can say SAME or DIFFERENT.  `calibrate` sweeps a fixed grid on a
validation pair set and picks the threshold where precision and recall
are closest — the operating point that favors neither error direction.
This script prints the full sweep so the trade-off is visible.
"""

from veriscribe import (
    builtin_schema,
    calibrate,
    generate_pairs,
    generate_profiles,
    sample_dataset,
    soften,
    split,
)

schema = builtin_schema()
profiles = generate_profiles(schema, n_writers=20, consistency=0.9, seed=7)
dataset = soften(sample_dataset(schema, profiles, samples_per_writer=10, seed=7), 0.9)

# Calibrate on the validation part of a writer-disjoint split, the honest
# setting: the threshold must transfer to writers it never saw.
parts = split(dataset, "unseen", seed=7)
val_pairs = generate_pairs(parts.val, "balanced", k=1, seed=7)

result = calibrate(val_pairs)
print(f"{'threshold':>9}  {'tp':>3} {'fp':>3} {'tn':>3} {'fn':>3}"
      f"  {'precision':>9}  {'recall':>6}")
for row in result.rows:
    marker = "  <- chosen" if row.threshold == result.chosen_threshold else ""
    print(f"{row.threshold:>9.1f}  {row.tp:>3} {row.fp:>3} {row.tn:>3} {row.fn:>3}"
          f"  {row.precision:>9.4f}  {row.recall:>6.4f}{marker}")

print(f"\nchosen threshold: {result.chosen_threshold}")
print("Low thresholds accept everything (perfect recall, poor precision);")
print("high ones reject everything genuine.  The chosen point balances both.")
