"""Command-line pipeline over the verification library.

Subcommands mirror the pipeline stages: ``schema``, ``synth``,
``partition``, ``calibrate``, ``train-laam``, ``verify``, ``evaluate``,
``explain``.  Every run with an identical configuration and identical
inputs produces byte-identical outputs; file writes go through a temp
file and an atomic rename, so interrupted runs never leave partial
artifacts.  When ``--seed`` is omitted, the ``VERISCRIBE_SEED``
environment variable is consulted before falling back to 0.

Exit codes: 0 success, 1 validation or I/O failure, 2 usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from io import StringIO
from pathlib import Path
from typing import Sequence

from . import daam, evaluation, explain, laam, partition, synthetic
from .dataio import (
    Dataset,
    atomic_write_text,
    read_labels_csv,
    read_soft_records,
    write_labels_csv,
    write_soft_records,
)
from .errors import ValidationError, VeriscribeError
from .schema import builtin_schema, load_schema, schema_to_text

SEED_ENV_VAR = "VERISCRIBE_SEED"


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on besides its input files.

    Two runs with equal configs and byte-identical inputs must produce
    byte-identical outputs.
    """

    subcommand: str
    seed: int
    options: tuple[tuple[str, object], ...]

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        seed = getattr(ns, "seed", None)
        if seed is None:
            raw = os.environ.get(SEED_ENV_VAR)
            if raw is not None:
                try:
                    seed = int(raw)
                except ValueError:
                    raise ValidationError(
                        f"{SEED_ENV_VAR}={raw!r} is not an integer"
                    ) from None
            else:
                seed = 0
        skip = {"func", "subcommand", "seed", "target"}
        options = tuple(
            sorted((k, v) for k, v in vars(ns).items() if k not in skip)
        )
        return cls(getattr(ns, "subcommand", "?"), seed, options)

    def get(self, name: str, default=None):
        for key, value in self.options:
            if key == name:
                return value
        return default

    def __getattr__(self, name: str):
        for key, value in self.options:
            if key == name:
                return value
        raise AttributeError(name)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(out, text)


def _load_schema(cfg: RunConfig):
    path = cfg.get("schema")
    return load_schema(path) if path else builtin_schema()


def _load_dataset(schema, data: str | None, soft: str | None) -> Dataset:
    if (data is None) == (soft is None):
        raise ValidationError("exactly one of --data/--soft must be given")
    if data is not None:
        return read_labels_csv(data, schema)
    return read_soft_records(soft, schema)


def _find_record(dataset: Dataset, selector: str):
    writer_id, sep, sample_id = selector.partition(":")
    if not sep:
        raise ValidationError(
            f"record selector {selector!r} must be writer_id:sample_id"
        )
    for pos in dataset.index.get(writer_id, ()):
        rec = dataset.records[pos]
        if rec.sample_id == sample_id:
            return rec
    raise ValidationError(f"no record {selector!r} in the dataset")


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValidationError(f"--ratios needs 3 comma-separated values, got {text!r}")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise ValidationError(f"--ratios values must be numeric: {text!r}") from None


# --- subcommand handlers -----------------------------------------------------

def _cmd_schema(cfg: RunConfig) -> int:
    check = cfg.get("check")
    if check:
        load_schema(check)
        sys.stderr.write(f"{check}: ok\n")
        return 0
    _emit(schema_to_text(builtin_schema()), cfg.get("out"))
    return 0


def _cmd_synth(cfg: RunConfig) -> int:
    schema = _load_schema(cfg)
    profiles = synthetic.generate_profiles(
        schema, cfg.writers, cfg.consistency, cfg.seed
    )
    dataset = synthetic.sample_dataset(schema, profiles, cfg.samples, cfg.seed)
    write_labels_csv(dataset, cfg.out)
    if cfg.get("soft"):
        write_soft_records(synthetic.soften(dataset, cfg.sharpness), cfg.soft)
    return 0


def _cmd_partition(cfg: RunConfig) -> int:
    schema = _load_schema(cfg)
    dataset = _load_dataset(schema, cfg.get("data"), cfg.get("soft"))
    ratios = _parse_ratios(cfg.ratios)
    result = partition.split(dataset, cfg.mode, ratios, cfg.seed)
    if result.excluded_writers:
        sys.stderr.write(
            f"warning: {result.excluded_writers} writer(s) with fewer than "
            f"{partition.MIN_SAMPLES_SEEN} samples excluded\n"
        )
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    as_soft = cfg.get("soft") is not None
    for name, records in result.parts.items():
        if as_soft:
            write_soft_records(records, outdir / f"{name}.jsonl")
        else:
            write_labels_csv(records, outdir / f"{name}.csv")
    return 0


def _pairs_from(cfg: RunConfig, dataset: Dataset) -> partition.PairSet:
    return partition.generate_pairs(
        dataset.records, cfg.pair_strategy, cfg.k, cfg.seed
    )


def _cmd_calibrate_daam(cfg: RunConfig) -> int:
    schema = _load_schema(cfg)
    dataset = read_soft_records(cfg.val, schema)
    result = daam.calibrate(_pairs_from(cfg, dataset), cfg.ocs)
    if cfg.get("sweep_out"):
        buf = StringIO()
        daam.write_sweep_csv(result, buf)
        atomic_write_text(cfg.sweep_out, buf.getvalue())
    sys.stdout.write(f"chosen_threshold={result.chosen_threshold:.9g}\n")
    return 0


def _cmd_calibrate_laam(cfg: RunConfig) -> int:
    schema = _load_schema(cfg)
    dataset = _load_dataset(schema, cfg.get("data"), cfg.get("soft"))
    bn_same = laam.load_bayesnet(cfg.bn1, schema)
    bn_diff = laam.load_bayesnet(cfg.bn2, schema)
    result = laam.calibrate_tau(_pairs_from(cfg, dataset), bn_same, bn_diff)
    if cfg.get("sweep_out"):
        buf = StringIO()
        daam.write_sweep_csv(result, buf)
        atomic_write_text(cfg.sweep_out, buf.getvalue())
    sys.stdout.write(f"chosen_tau={result.chosen_threshold:.9g}\n")
    return 0


def _cmd_train_laam(cfg: RunConfig) -> int:
    schema = _load_schema(cfg)
    dataset = _load_dataset(schema, cfg.get("data"), cfg.get("soft"))
    pairs = _pairs_from(cfg, dataset)
    bn_same, bn_diff = laam.fit_pair_models(pairs, schema, cfg.alpha)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    laam.save_bayesnet(bn_same, outdir / "bn_same.json")
    laam.save_bayesnet(bn_diff, outdir / "bn_different.json")
    sys.stderr.write(
        f"fitted on {bn_same.n_pairs} same-writer / "
        f"{bn_diff.n_pairs} different-writer pairs\n"
    )
    return 0


def _verification_report(cfg: RunConfig, schema, dataset: Dataset):
    q = _find_record(dataset, cfg.q)
    k = _find_record(dataset, cfg.k)
    if cfg.method == "daam":
        return explain.explain_daam(
            q, k, cfg.threshold, schema, cfg.ocs, cfg.salience
        )
    bn_same = laam.load_bayesnet(cfg.bn1, schema)
    bn_diff = laam.load_bayesnet(cfg.bn2, schema)
    return explain.explain_laam(q, k, bn_same, bn_diff, cfg.tau, cfg.lowlights)


def _cmd_verify(cfg: RunConfig) -> int:
    schema = _load_schema(cfg)
    dataset = _load_dataset(schema, cfg.get("data"), cfg.get("soft"))
    report = _verification_report(cfg, schema, dataset)
    verdict = "same" if report.verdict == partition.SAME else "different"
    threshold_name = "threshold" if cfg.method == "daam" else "tau"
    sys.stdout.write(
        f"method={report.method} overall={report.overall:.9g} "
        f"{threshold_name}={report.threshold:.9g} verdict={verdict}\n"
    )
    return 0


def _cmd_explain(cfg: RunConfig) -> int:
    schema = _load_schema(cfg)
    dataset = _load_dataset(schema, cfg.get("data"), cfg.get("soft"))
    report = _verification_report(cfg, schema, dataset)
    _emit(explain.render(report, cfg.format), cfg.get("out"))
    return 0


def _cmd_evaluate(cfg: RunConfig) -> int:
    schema = _load_schema(cfg)
    dataset = _load_dataset(schema, cfg.get("data"), cfg.get("soft"))
    regimes = (
        list(partition.MODES)
        if cfg.regime == "all"
        else [r.strip() for r in cfg.regime.split(",")]
    )
    methods = list(evaluation.METHODS) if cfg.method == "both" else [cfg.method]
    reports = evaluation.compare_methods(
        dataset,
        regimes,
        methods,
        seed=cfg.seed,
        strategy=cfg.pair_strategy,
        k=cfg.k,
        alpha=cfg.alpha,
        ocs=cfg.ocs,
        tau=None if cfg.calibrate_tau else cfg.tau,
    )
    buf = StringIO()
    evaluation.write_report_csv(reports, buf)
    _emit(buf.getvalue(), cfg.get("out"))
    return 0


# --- argument grammar --------------------------------------------------------

def _add_seed(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--seed", type=int, default=None,
        help=f"RNG seed (default: ${SEED_ENV_VAR} or 0)",
    )


def _add_schema_opt(p: argparse.ArgumentParser) -> None:
    p.add_argument("--schema", help="schema document (default: built-in)")


def _add_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    group = p.add_mutually_exclusive_group(required=required)
    group.add_argument("--data", help="labels CSV input")
    group.add_argument("--soft", help="soft-record file input")


def _add_pairing(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--pair-strategy", choices=partition.PAIR_STRATEGIES,
        default="balanced", help="pair generation strategy",
    )
    p.add_argument(
        "--k", type=int, default=1,
        help="inter-writer pairs per intra-writer pair (balanced strategy)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="veriscribe",
        description="Explainable writer verification over discrete handwriting features.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("schema", help="print or check a schema document")
    p.add_argument("-o", "--out", help="write the built-in schema here")
    p.add_argument("--check", help="validate this schema document instead")
    p.set_defaults(func=_cmd_schema)

    p = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    _add_schema_opt(p)
    p.add_argument("--writers", type=int, required=True)
    p.add_argument("--samples", type=int, required=True,
                   help="samples per writer")
    p.add_argument("--consistency", type=float, required=True,
                   help="intra-writer consistency in [0, 1]")
    p.add_argument("--sharpness", type=float, default=0.9,
                   help="soft-vector peak mass for --soft output")
    _add_seed(p)
    p.add_argument("-o", "--out", required=True, help="labels CSV output")
    p.add_argument("--soft", help="also write soft records here")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("partition", help="split a dataset into train/val/test")
    _add_schema_opt(p)
    _add_source(p)
    p.add_argument("--mode", choices=partition.MODES, required=True)
    p.add_argument("--ratios", default="0.6,0.2,0.2",
                   help="train,val,test fractions")
    _add_seed(p)
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("calibrate", help="choose a decision threshold")
    cal = p.add_subparsers(dest="target", required=True)

    c = cal.add_parser("daam", help="sweep cosine thresholds on validation pairs")
    _add_schema_opt(c)
    c.add_argument("--val", required=True, help="validation soft-record file")
    c.add_argument("--ocs", choices=daam.OCS_MODES, default="mean")
    _add_pairing(c)
    _add_seed(c)
    c.add_argument("--sweep-out", help="write the sweep table CSV here")
    c.set_defaults(func=_cmd_calibrate_daam)

    c = cal.add_parser("laam", help="sweep ratio thresholds on validation pairs")
    _add_schema_opt(c)
    _add_source(c)
    c.add_argument("--bn1", required=True, help="same-writer model file")
    c.add_argument("--bn2", required=True, help="different-writer model file")
    _add_pairing(c)
    _add_seed(c)
    c.add_argument("--sweep-out", help="write the sweep table CSV here")
    c.set_defaults(func=_cmd_calibrate_laam)

    p = sub.add_parser("train-laam", help="fit the two ratio networks")
    _add_schema_opt(p)
    _add_source(p)
    p.add_argument("--alpha", type=float, default=1.0,
                   help="additive smoothing count")
    _add_pairing(p)
    _add_seed(p)
    p.add_argument("-o", "--out", required=True, help="model output directory")
    p.set_defaults(func=_cmd_train_laam)

    def add_verify_args(p: argparse.ArgumentParser) -> None:
        _add_schema_opt(p)
        _add_source(p)
        p.add_argument("--method", choices=evaluation.METHODS, required=True)
        p.add_argument("--q", required=True,
                       help="questioned record as writer_id:sample_id")
        p.add_argument("--k", required=True,
                       help="known record as writer_id:sample_id")
        p.add_argument("-T", "--threshold", type=float, default=0.5,
                       help="cosine decision threshold")
        p.add_argument("--tau", type=float, default=0.0,
                       help="log-likelihood-ratio decision threshold")
        p.add_argument("--bn1", help="same-writer model file")
        p.add_argument("--bn2", help="different-writer model file")
        p.add_argument("--ocs", choices=daam.OCS_MODES, default="mean")
        p.add_argument("--salience", type=float,
                       default=explain.DAAM_SALIENCE_CUTOFF,
                       help="cosine lowlight cutoff")
        p.add_argument("--lowlights", type=int,
                       default=explain.LAAM_LOWLIGHT_COUNT,
                       help="ratio lowlight count")

    p = sub.add_parser("verify", help="decide one questioned/known pair")
    add_verify_args(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("explain", help="per-feature report for one pair")
    add_verify_args(p)
    p.add_argument("--format", choices=explain.FORMATS, default="text")
    p.add_argument("-o", "--out", help="write the report here")
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("evaluate", help="pipeline metrics per regime and method")
    _add_schema_opt(p)
    _add_source(p)
    p.add_argument("--method", choices=(*evaluation.METHODS, "both"),
                   required=True)
    p.add_argument("--regime", required=True,
                   help="partition regime, comma list, or 'all'")
    _add_pairing(p)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--ocs", choices=daam.OCS_MODES, default="mean")
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--calibrate-tau", action="store_true",
                   help="calibrate tau on validation pairs instead")
    _add_seed(p)
    p.add_argument("-o", "--out", help="report CSV output")
    p.set_defaults(func=_cmd_evaluate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_namespace(ns)
        if ns.subcommand in ("verify", "explain"):
            if cfg.method == "laam" and not (cfg.get("bn1") and cfg.get("bn2")):
                raise ValidationError(
                    "--method laam needs --bn1 and --bn2 model files"
                )
        return ns.func(cfg)
    except (VeriscribeError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
