"""Record containers and the two on-disk formats."""

import json
import math

import numpy as np
import pytest

from veriscribe.dataio import (
    Dataset,
    SampleRecord,
    argmax_assignment,
    atomic_write_text,
    labels_array,
    read_labels_csv,
    read_soft_records,
    soft_array,
    soft_record_line,
    write_labels_csv,
    write_soft_records,
)
from veriscribe.errors import MissingSoft, ParseError, ValidationError


def _record(schema, writer="w0", sample="s0", bump=0):
    labels = tuple(bump % f.cardinality for f in schema.features)
    return SampleRecord(writer, sample, labels)


class TestDataset:
    def test_indexes_records_by_writer(self, schema):
        recs = [_record(schema, "a", "s0"), _record(schema, "b", "s0"),
                _record(schema, "a", "s1")]
        ds = Dataset(schema, recs)
        assert ds.writers == ("a", "b")
        assert [r.sample_id for r in ds.by_writer("a")] == ["s0", "s1"]

    def test_duplicate_key_rejected(self, schema):
        recs = [_record(schema), _record(schema)]
        with pytest.raises(ValidationError, match="duplicate"):
            Dataset(schema, recs)

    def test_out_of_range_label_names_record_and_feature(self, schema):
        bad = SampleRecord("w9", "s9", (9,) + (0,) * 14)
        with pytest.raises(ValidationError, match=r"w9.*pen_pressure"):
            Dataset(schema, [bad])

    def test_wrong_label_count_rejected(self, schema):
        with pytest.raises(ValidationError):
            Dataset(schema, [SampleRecord("w", "s", (0,) * 14)])


class TestLabelsCsv:
    def test_round_trip_is_byte_exact(self, tiny_dataset, tmp_path):
        path = tmp_path / "labels.csv"
        write_labels_csv(tiny_dataset, path)
        first = path.read_bytes()
        again = read_labels_csv(path, tiny_dataset.schema)
        assert again.records == tiny_dataset.records
        write_labels_csv(again, path)
        assert path.read_bytes() == first

    def test_header_only_file_gives_empty_dataset(self, schema, tmp_path):
        path = tmp_path / "empty.csv"
        header = "writer_id,sample_id," + ",".join(f"f{i}" for i in range(1, 16))
        path.write_text(header + "\n")
        assert len(read_labels_csv(path, schema)) == 0

    def test_empty_file_rejected(self, schema, tmp_path):
        path = tmp_path / "none.csv"
        path.write_text("")
        with pytest.raises(ParseError):
            read_labels_csv(path, schema)

    def test_wrong_header_rejected(self, schema, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("writer,sample,f1\n")
        with pytest.raises(ParseError, match="header"):
            read_labels_csv(path, schema)

    def test_non_integer_label_reports_line(self, schema, tmp_path):
        path = tmp_path / "bad.csv"
        header = "writer_id,sample_id," + ",".join(f"f{i}" for i in range(1, 16))
        path.write_text(header + "\nw0,s0," + ",".join(["x"] + ["0"] * 14) + "\n")
        with pytest.raises(ParseError, match=":2"):
            read_labels_csv(path, schema)


class TestSoftRecords:
    def test_round_trip_preserves_labels_and_soft_at_printed_precision(
        self, soft_dataset, tmp_path
    ):
        path = tmp_path / "soft.jsonl"
        write_soft_records(soft_dataset, path)
        again = read_soft_records(path, soft_dataset.schema)
        assert len(again) == len(soft_dataset)
        for orig, back in zip(soft_dataset.records, again.records):
            assert back.labels == orig.labels
            for v_orig, v_back in zip(orig.soft, back.soft):
                assert v_back == pytest.approx(v_orig, abs=1e-8)

    def test_written_file_starts_with_header_line(self, soft_dataset, tmp_path):
        path = tmp_path / "soft.jsonl"
        write_soft_records(soft_dataset, path)
        head = json.loads(path.read_text().splitlines()[0])
        assert head == {"format": "veriscribe-soft", "version": 1}

    def test_nine_significant_digits(self, schema):
        rec = SampleRecord(
            "w", "s",
            tuple(0 for _ in schema.features),
            tuple(
                (1.0 - (1.0 / 3.0) * (f.cardinality - 1),)
                + ((1.0 / 3.0),) * (f.cardinality - 1)
                for f in schema.features
            ),
        )
        line = soft_record_line(rec)
        assert "0.333333333" in line
        assert "0.3333333333" not in line

    def test_rejects_unknown_keys(self, schema, tmp_path):
        path = tmp_path / "soft.jsonl"
        rec = {"writer_id": "w", "sample_id": "s", "soft": [], "extra": 1}
        path.write_text(json.dumps(rec) + "\n")
        with pytest.raises(ParseError, match="extra"):
            read_soft_records(path, schema)

    def test_wrong_version_rejected(self, schema, tmp_path):
        path = tmp_path / "soft.jsonl"
        path.write_text('{"format": "veriscribe-soft", "version": 2}\n')
        with pytest.raises(ParseError, match="version"):
            read_soft_records(path, schema)

    def test_renormalizes_sums_within_tolerance(self, schema, tmp_path):
        vecs = []
        for f in schema.features:
            v = [0.0] * f.cardinality
            v[0] = 1.0 + 5e-7  # inside the 1e-6 acceptance band
            vecs.append(v)
        doc = {"writer_id": "w", "sample_id": "s", "soft": vecs}
        path = tmp_path / "soft.jsonl"
        path.write_text(json.dumps(doc) + "\n")
        ds = read_soft_records(path, schema)
        for vec in ds.records[0].soft:
            assert math.fsum(vec) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_sums_beyond_tolerance(self, schema, tmp_path):
        vecs = [[1.0 / f.cardinality] * f.cardinality for f in schema.features]
        vecs[3][0] += 1e-4
        doc = {"writer_id": "w", "sample_id": "s", "soft": vecs}
        path = tmp_path / "soft.jsonl"
        path.write_text(json.dumps(doc) + "\n")
        with pytest.raises(ValidationError, match="f4"):
            read_soft_records(path, schema)

    def test_rejects_negative_probability(self, schema, tmp_path):
        vecs = [[1.0 / f.cardinality] * f.cardinality for f in schema.features]
        vecs[0] = [1.2, -0.2]
        doc = {"writer_id": "w", "sample_id": "s", "soft": vecs}
        path = tmp_path / "soft.jsonl"
        path.write_text(json.dumps(doc) + "\n")
        with pytest.raises(ValidationError, match="negative"):
            read_soft_records(path, schema)

    def test_labels_are_argmax(self, schema, soft_dataset, tmp_path):
        path = tmp_path / "soft.jsonl"
        write_soft_records(soft_dataset, path)
        ds = read_soft_records(path, schema)
        for rec in ds.records:
            assert rec.labels == argmax_assignment(rec)


class TestArgmax:
    def test_tie_breaks_to_lowest_index(self, schema):
        soft = tuple(
            (1.0 / f.cardinality,) * f.cardinality for f in schema.features
        )
        rec = SampleRecord("w", "s", (0,) * 15, soft)
        assert argmax_assignment(rec) == (0,) * 15

    def test_missing_soft_raises(self, schema):
        rec = _record(schema)
        with pytest.raises(MissingSoft):
            argmax_assignment(rec)


class TestArrayViews:
    def test_labels_array_shape_and_values(self, tiny_dataset):
        arr = labels_array(tiny_dataset.records)
        assert arr.shape == (len(tiny_dataset), 15)
        assert arr.dtype == np.int64
        assert tuple(arr[0]) == tiny_dataset.records[0].labels

    def test_soft_array_matches_cardinality(self, soft_dataset):
        arr = soft_array(soft_dataset.records[:7], 3)
        assert arr.shape == (7, 4)
        np.testing.assert_allclose(arr.sum(axis=1), 1.0, atol=1e-9)

    def test_soft_array_without_soft_raises(self, tiny_dataset):
        with pytest.raises(MissingSoft):
            soft_array(tiny_dataset.records, 0)


class TestAtomicWrite:
    def test_writes_content(self, tmp_path):
        target = tmp_path / "out.txt"
        atomic_write_text(target, "hello\n")
        assert target.read_text() == "hello\n"

    def test_leaves_no_temp_files(self, tmp_path):
        target = tmp_path / "out.txt"
        atomic_write_text(target, "one\n")
        atomic_write_text(target, "two\n")
        assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]
        assert target.read_text() == "two\n"
