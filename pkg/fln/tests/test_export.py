"""Soft-record export: file layout, vector validity, verifier ingestion."""

import json
import shutil
import subprocess

import numpy as np
import pytest
import torch

from fln.export import export_soft, soft_records
from fln.features import CARDINALITIES, SOFT_FORMAT_NAME, SOFT_FORMAT_VERSION
from fln.glyphs import make_writer_corpus

VERIFIER = shutil.which("veriscribe")


@pytest.fixture(scope="module")
def exported(tiny_model, tmp_path_factory):
    images, _, ids = make_writer_corpus(3, 4, seed=2)
    path = tmp_path_factory.mktemp("export") / "soft.jsonl"
    export_soft(tiny_model, images, ids, path)
    return path, ids


class TestSoftRecords:
    def test_one_record_per_image_with_schema_widths(self, tiny_model):
        images, _, _ = make_writer_corpus(2, 2, seed=1)
        records = soft_records(tiny_model, images)
        assert len(records) == 4
        for rec in records:
            assert [len(vec) for vec in rec] == list(CARDINALITIES)

    def test_vectors_are_normalized(self, tiny_model):
        images, _, _ = make_writer_corpus(2, 2, seed=1)
        for rec in soft_records(tiny_model, images):
            for vec in rec:
                assert min(vec) >= 0.0
                assert abs(sum(vec) - 1.0) < 1e-9


class TestExportedFile:
    def test_header_line(self, exported):
        path, _ = exported
        header = json.loads(path.read_text().splitlines()[0])
        assert header == {"format": SOFT_FORMAT_NAME, "version": SOFT_FORMAT_VERSION}

    def test_every_record_parses_with_valid_vectors(self, exported):
        path, ids = exported
        lines = path.read_text().splitlines()[1:]
        assert len(lines) == len(ids)
        for line, (writer, sample) in zip(lines, ids):
            obj = json.loads(line)
            assert set(obj) == {"writer_id", "sample_id", "soft"}
            assert (obj["writer_id"], obj["sample_id"]) == (writer, sample)
            for vec, k in zip(obj["soft"], CARDINALITIES):
                assert len(vec) == k
                assert all(p >= 0.0 for p in vec)
                assert abs(sum(vec) - 1.0) < 1e-6

    def test_deterministic_given_fixed_weights(self, tiny_model, tmp_path):
        images, _, ids = make_writer_corpus(2, 3, seed=5)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        export_soft(tiny_model, images, ids, a)
        export_soft(tiny_model, images, ids, b)
        assert a.read_bytes() == b.read_bytes()

    def test_id_count_mismatch_raises(self, tiny_model):
        images, _, ids = make_writer_corpus(2, 2, seed=5)
        with pytest.raises(ValueError, match="ids"):
            export_soft(tiny_model, images, ids[:-1], "unused.jsonl")


@pytest.mark.skipif(VERIFIER is None, reason="verifier CLI not installed")
class TestVerifierIngestion:
    def test_verifier_reads_the_file_without_errors(self, exported):
        path, _ = exported
        done = subprocess.run(
            [VERIFIER, "verify", "--soft", str(path), "--method", "daam",
             "--q", "w000:s000", "--k", "w000:s001"],
            capture_output=True, text=True,
        )
        assert done.returncode == 0, done.stderr
        assert done.stdout.startswith("method=daam overall=")

    def test_verifier_partitions_the_file(self, exported, tmp_path):
        path, _ = exported
        done = subprocess.run(
            [VERIFIER, "partition", "--soft", str(path), "--mode", "shuffled",
             "--seed", "1", "-o", str(tmp_path / "parts")],
            capture_output=True, text=True,
        )
        assert done.returncode == 0, done.stderr
        assert (tmp_path / "parts" / "train.jsonl").exists()
