"""Domain model for the 15 categorical handwriting features.

A :class:`FeatureSchema` carries, for each feature, its display name, the
ordered class labels, and a default population marginal, plus one directed
acyclic graph over the 15 feature positions that the likelihood models use
for their factorization.  The engine never hardcodes feature names; it is
parameterized by a schema, and :func:`builtin_schema` supplies the default.

Schema document format (UTF-8, line oriented, ``key: value`` lines)::

    # comments and blank lines are ignored
    schema: 1

    feature: f1
    name: pen_pressure
    labels: Strong, Medium
    marginal: 0.406, 0.594

    ...fourteen more feature sections...

    edges: f1->f2, f3->f4, f5->f7, ...

Rules: the ``schema: 1`` line comes first; every feature section holds
exactly the keys ``name``, ``labels``, ``marginal``; ``edges`` appears
exactly once with comma-separated ``fP->fC`` tokens; any other key is
rejected.  Labels and marginal entries are comma separated, and the
cardinality of a feature is the number of labels.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .errors import ParseError, ValidationError

N_FEATURES = 15

# The fixed per-feature class counts this engine is built around.  All
# distance-code bookkeeping downstream derives its sizes from these.
EXPECTED_CARDINALITIES = (2, 2, 2, 4, 3, 3, 3, 2, 2, 2, 4, 3, 4, 2, 2)


@dataclass(frozen=True)
class FeatureDef:
    """One categorical feature: 1-based index, name, labels, default marginal."""

    index: int
    name: str
    class_labels: tuple[str, ...]
    default_marginal: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.default_marginal) != len(self.class_labels):
            raise ValidationError(
                f"f{self.index} ({self.name}): marginal length "
                f"{len(self.default_marginal)} != cardinality {len(self.class_labels)}"
            )

    @property
    def cardinality(self) -> int:
        return len(self.class_labels)


@dataclass(frozen=True)
class FeatureSchema:
    """The 15 features plus one DAG over their 0-based positions.

    ``dag_edges`` holds ``(parent, child)`` pairs as 0-based positions into
    ``features``.  The 1-based ``fN`` naming appears only in the document
    format and in user-facing messages.
    """

    features: tuple[FeatureDef, ...]
    dag_edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        self._validate()

    # -- derived structure ------------------------------------------------

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(f.cardinality for f in self.features)

    def cardinality(self, j: int) -> int:
        return self.features[j].cardinality

    @cached_property
    def parent_map(self) -> tuple[tuple[int, ...], ...]:
        """Parents of each node, sorted ascending, indexed by node position."""
        parents: list[list[int]] = [[] for _ in self.features]
        for p, c in self.dag_edges:
            parents[c].append(p)
        return tuple(tuple(sorted(ps)) for ps in parents)

    def parents(self, j: int) -> tuple[int, ...]:
        return self.parent_map[j]

    @property
    def roots(self) -> tuple[int, ...]:
        return tuple(j for j in range(len(self.features)) if not self.parent_map[j])

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        """Node positions ordered parents-before-children (deterministic)."""
        ts = graphlib.TopologicalSorter(
            {j: self.parent_map[j] for j in range(len(self.features))}
        )
        order: list[int] = []
        ts.prepare()
        while ts.is_active():
            ready = sorted(ts.get_ready())
            order.extend(ready)
            ts.done(*ready)
        return tuple(order)

    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    # -- validation --------------------------------------------------------

    def _validate(self) -> None:
        feats = self.features
        if len(feats) != N_FEATURES:
            raise ValidationError(
                f"schema must define exactly {N_FEATURES} features, got {len(feats)}"
            )
        for pos, f in enumerate(feats):
            tag = f"f{pos + 1}"
            if f.index != pos + 1:
                raise ValidationError(
                    f"{tag}: index must be {pos + 1}, got {f.index}"
                )
            if not f.name.isidentifier():
                raise ValidationError(f"{tag}: name {f.name!r} is not an identifier")
            if f.cardinality != EXPECTED_CARDINALITIES[pos]:
                raise ValidationError(
                    f"{tag} ({f.name}): cardinality must be "
                    f"{EXPECTED_CARDINALITIES[pos]}, got {f.cardinality}"
                )
            if len(f.default_marginal) != f.cardinality:
                raise ValidationError(
                    f"{tag} ({f.name}): marginal length {len(f.default_marginal)} "
                    f"!= cardinality {f.cardinality}"
                )
            if any(not (0.0 <= p <= 1.0) for p in f.default_marginal):
                raise ValidationError(f"{tag} ({f.name}): marginal entry outside [0, 1]")
            if abs(sum(f.default_marginal) - 1.0) > 1e-9:
                raise ValidationError(
                    f"{tag} ({f.name}): marginal sums to {sum(f.default_marginal)!r}, not 1"
                )

        # Cross-checks on the fixed cardinality vector.  Cheap, and they fail
        # loudly if the table above is ever edited inconsistently.
        if sum(self.cardinalities) != 40:
            raise ValidationError("cardinalities do not sum to 40")
        prod = 1
        for n in self.cardinalities:
            prod *= n * (n + 1) // 2
        if prod != 3**8 * 6**4 * 10**3:
            raise ValidationError("unordered-pair counts have unexpected product")

        seen_edges = set()
        for p, c in self.dag_edges:
            if not (0 <= p < N_FEATURES and 0 <= c < N_FEATURES):
                raise ValidationError(f"dag_edges: node out of range in ({p}, {c})")
            if p == c:
                raise ValidationError(f"dag_edges: self loop on f{p + 1}")
            if (p, c) in seen_edges:
                raise ValidationError(f"dag_edges: duplicate edge f{p + 1}->f{c + 1}")
            seen_edges.add((p, c))
        try:
            self.topological_order
        except graphlib.CycleError as exc:
            cycle = "->".join(f"f{j + 1}" for j in exc.args[1])
            raise ValidationError(f"dag_edges: cycle {cycle}") from None


# -- builtin default -------------------------------------------------------

# (name, labels, class percentages).  Three rows do not total exactly 100 as
# published (slantness 100.42, exit_stroke_d 100.01, letter_spacing 91.36);
# the marginals are normalized so each sums to 1.
_BUILTIN_FEATURES = (
    ("pen_pressure", ("Strong", "Medium"), (40.6, 59.4)),
    ("tilt", ("Normal", "Tilted"), (81.24, 18.76)),
    ("entry_stroke_a", ("No Stroke", "Downstroke"), (94.32, 5.68)),
    ("slantness", ("Normal", "Slight Right", "Very Right", "Left"),
     (52.41, 29.38, 11.05, 7.58)),
    ("size", ("Small", "Medium", "Large"), (23.01, 52.41, 24.58)),
    ("dimension", ("Low", "Medium", "High"), (29.75, 52.18, 18.07)),
    ("letter_spacing", ("Less", "Medium", "High"), (22.49, 43.09, 25.78)),
    ("is_lowercase", ("No", "Yes"), (1.5, 98.5)),
    ("is_continuous", ("No", "Yes"), (33.38, 66.62)),
    ("constancy", ("Irregular", "Regular"), (39.65, 60.35)),
    ("staff_of_a", ("No Staff", "Retraced", "Loopy", "Tented"),
     (18.04, 58.45, 7.0, 16.51)),
    ("staff_of_d", ("No Staff", "Retraced", "Loopy"), (9.86, 49.63, 40.51)),
    ("exit_stroke_d", ("No Stroke", "Down Stroke", "Curved Up", "Straight"),
     (24.86, 44.02, 12.6, 18.53)),
    ("word_formation", ("Not Well Formed", "Well Formed"), (56.91, 43.09)),
    ("formation_n", ("No Formation", "Normal"), (22.97, 77.03)),
)

# Default dependency structure, 1-based for readability; converted below.
_BUILTIN_EDGES_1BASED = (
    (1, 2), (3, 4), (11, 12), (13, 14),
    (7, 8), (8, 9), (9, 10),
    (5, 7), (6, 7), (15, 7),
)


def _normalized(percentages: tuple[float, ...]) -> tuple[float, ...]:
    total = sum(percentages)
    return tuple(p / total for p in percentages)


def builtin_schema() -> FeatureSchema:
    """Return the default 15-feature schema with its dependency DAG."""
    features = tuple(
        FeatureDef(
            index=i + 1,
            name=name,
            class_labels=labels,
            default_marginal=_normalized(percents),
        )
        for i, (name, labels, percents) in enumerate(_BUILTIN_FEATURES)
    )
    edges = tuple((p - 1, c - 1) for p, c in _BUILTIN_EDGES_1BASED)
    return FeatureSchema(features=features, dag_edges=edges)


# -- document I/O -----------------------------------------------------------

_SECTION_KEYS = ("name", "labels", "marginal")


def schema_to_text(schema: FeatureSchema) -> str:
    """Serialize a schema to the document format (round-trips exactly)."""
    lines = ["# veriscribe feature schema", "schema: 1", ""]
    for f in schema.features:
        lines.append(f"feature: f{f.index}")
        lines.append(f"name: {f.name}")
        lines.append("labels: " + ", ".join(f.class_labels))
        lines.append("marginal: " + ", ".join(repr(p) for p in f.default_marginal))
        lines.append("")
    edge_tokens = ", ".join(f"f{p + 1}->f{c + 1}" for p, c in schema.dag_edges)
    lines.append(f"edges: {edge_tokens}")
    return "\n".join(lines) + "\n"


def schema_from_text(text: str) -> FeatureSchema:
    """Parse the document format; raises ParseError / ValidationError."""
    version_seen = False
    sections: dict[int, dict[str, str]] = {}
    current: dict[str, str] | None = None
    edges_value: str | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ParseError(f"line {lineno}: expected 'key: value', got {line!r}")
        key = key.strip()
        value = value.strip()

        if key == "schema":
            if version_seen:
                raise ParseError(f"line {lineno}: duplicate 'schema' line")
            if value != "1":
                raise ParseError(f"line {lineno}: unsupported schema version {value!r}")
            version_seen = True
        elif key == "feature":
            if not version_seen:
                raise ParseError(f"line {lineno}: 'schema: 1' must come first")
            idx = _parse_feature_token(value, lineno)
            if idx in sections:
                raise ParseError(f"line {lineno}: duplicate section for f{idx}")
            current = {}
            sections[idx] = current
        elif key in _SECTION_KEYS:
            if current is None:
                raise ParseError(f"line {lineno}: {key!r} outside a feature section")
            if key in current:
                raise ParseError(f"line {lineno}: duplicate {key!r} in section")
            current[key] = value
        elif key == "edges":
            if edges_value is not None:
                raise ParseError(f"line {lineno}: duplicate 'edges' line")
            edges_value = value
            current = None
        else:
            raise ParseError(f"line {lineno}: unknown key {key!r}")

    if not version_seen:
        raise ParseError("missing 'schema: 1' line")
    if edges_value is None:
        raise ParseError("missing 'edges' line")
    if sorted(sections) != list(range(1, N_FEATURES + 1)):
        raise ValidationError(
            f"expected sections f1..f{N_FEATURES}, got "
            + (", ".join(f"f{i}" for i in sorted(sections)) or "none")
        )

    features = []
    for idx in range(1, N_FEATURES + 1):
        sec = sections[idx]
        for want in _SECTION_KEYS:
            if want not in sec:
                raise ParseError(f"f{idx}: missing {want!r}")
        labels = tuple(tok.strip() for tok in sec["labels"].split(","))
        if any(not tok for tok in labels):
            raise ParseError(f"f{idx}: empty label")
        try:
            marginal = tuple(float(tok) for tok in sec["marginal"].split(","))
        except ValueError:
            raise ParseError(f"f{idx}: marginal entries must be numbers") from None
        features.append(
            FeatureDef(
                index=idx,
                name=sec["name"],
                class_labels=labels,
                default_marginal=marginal,
            )
        )

    edges = []
    if edges_value:
        for token in edges_value.split(","):
            token = token.strip()
            parts = token.split("->")
            if len(parts) != 2:
                raise ParseError(f"edges: bad token {token!r}")
            p = _parse_feature_token(parts[0].strip(), None)
            c = _parse_feature_token(parts[1].strip(), None)
            edges.append((p - 1, c - 1))

    return FeatureSchema(features=tuple(features), dag_edges=tuple(edges))


def _parse_feature_token(token: str, lineno: int | None) -> int:
    where = f"line {lineno}: " if lineno is not None else "edges: "
    if not token.startswith("f") or not token[1:].isdigit():
        raise ParseError(f"{where}expected a feature token like 'f3', got {token!r}")
    idx = int(token[1:])
    if not (1 <= idx <= N_FEATURES):
        raise ValidationError(f"{where}feature index f{idx} out of range 1..{N_FEATURES}")
    return idx


def load_schema(path: str | Path) -> FeatureSchema:
    """Load and validate a schema document from disk."""
    return schema_from_text(Path(path).read_text(encoding="utf-8"))


def save_schema(schema: FeatureSchema, path: str | Path) -> None:
    from .dataio import atomic_write_text

    atomic_write_text(path, schema_to_text(schema))
