"""Score one questioned/known pair both ways and print the expert report.

Walks the shortest useful path through the library: synthesize a small
writer population, pick a genuine pair and an impostor pair, score each
with the cosine method and the likelihood-ratio method, and render the
per-feature explanation for the interesting one.
"""

from veriscribe import (
    SAME,
    builtin_schema,
    explain_daam,
    explain_laam,
    fit_pair_models,
    generate_pairs,
    generate_profiles,
    render,
    sample_dataset,
    score_pair,
    soften,
)

schema = builtin_schema()

# A toy population: 12 writers, 10 samples each, fairly consistent hands.
profiles = generate_profiles(schema, n_writers=12, consistency=0.9, seed=42)
dataset = soften(sample_dataset(schema, profiles, samples_per_writer=10, seed=42), 0.9)
records = dataset.records

genuine_q, genuine_k = records[0], records[1]      # same writer
impostor_q, impostor_k = records[0], records[10]   # different writers

print("== cosine method ==")
for name, (q, k) in [
    ("genuine ", (genuine_q, genuine_k)),
    ("impostor", (impostor_q, impostor_k)),
]:
    score = score_pair(q, k)
    print(f"{name}  overall similarity = {score.overall:.4f}")

# The likelihood-ratio method needs fitted same-writer and
# different-writer networks; train them on balanced pairs.
pairs = generate_pairs(records, "balanced", k=1, seed=42)
bn_same, bn_diff = fit_pair_models(pairs, schema)

print("\n== likelihood-ratio method ==")
report = explain_laam(impostor_q, impostor_k, bn_same, bn_diff)
verdict = "same" if report.verdict == SAME else "different"
print(f"impostor  log-likelihood ratio = {report.overall:+.3f}"
      f"  verdict = {verdict}")

print("\n== per-feature report for the genuine pair ==")
print(render(explain_daam(genuine_q, genuine_k, threshold=0.5, schema=schema), "text"))
