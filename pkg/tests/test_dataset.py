"""Feature-table records and their CSV round trip."""

import numpy as np
import pytest

from accentgram.dataset import (
    SpeakerRecord,
    feature_column_names,
    group_labels,
    group_matrices,
    read_features_csv,
    write_features_csv,
)
from accentgram.errors import DataError
from conftest import make_records


def test_record_validation():
    with pytest.raises(DataError):
        SpeakerRecord("s1", "g", np.array([[1.0]]))  # not 1-D
    with pytest.raises(DataError):
        SpeakerRecord("s1", "g", np.array([1.0, np.inf]))
    rec = SpeakerRecord("s1", "g", np.arange(3, dtype=np.float64))
    assert rec.n_features == 3


def test_group_labels_sorted_and_validated():
    records = make_records(np.random.default_rng(0), 3, 3, 2, labels=("zeta", "alpha"))
    assert group_labels(records) == ("alpha", "zeta")
    only_one = [r for r in records if r.group == "alpha"]
    with pytest.raises(DataError):
        group_labels(only_one)


def test_group_matrices_ordering():
    records = make_records(np.random.default_rng(1), 3, 4, 2, labels=("b", "a"))
    pairs = group_matrices(records)
    assert [label for label, _ in pairs] == ["a", "b"]
    assert pairs[0][1].shape == (4, 2)
    assert pairs[1][1].shape == (3, 2)


def test_feature_column_names():
    assert feature_column_names(3) == ["mfcc_01", "mfcc_02", "mfcc_03"]
    assert feature_column_names(13)[-1] == "mfcc_13"


def test_csv_round_trip_exact(tmp_path):
    records = make_records(np.random.default_rng(2), 4, 4, 13)
    path = tmp_path / "features.csv"
    write_features_csv(path, records)
    loaded = read_features_csv(path)
    assert [r.speaker_id for r in loaded] == sorted(r.speaker_id for r in records)
    by_id = {r.speaker_id: r for r in records}
    for rec in loaded:
        # written with 6 decimals, so equality holds only to that precision
        assert np.allclose(rec.features, by_id[rec.speaker_id].features, atol=5e-7)
        assert rec.group == by_id[rec.speaker_id].group


def test_csv_write_is_deterministic(tmp_path):
    records = make_records(np.random.default_rng(3), 5, 5, 4)
    write_features_csv(tmp_path / "one.csv", records)
    write_features_csv(tmp_path / "two.csv", list(reversed(records)))
    assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()


def test_csv_header_and_sorting(tmp_path):
    records = make_records(np.random.default_rng(4), 2, 2, 2)
    path = tmp_path / "features.csv"
    write_features_csv(path, records)
    lines = path.read_text().splitlines()
    assert lines[0] == "speaker_id,group,mfcc_01,mfcc_02"
    ids = [line.split(",")[0] for line in lines[1:]]
    assert ids == sorted(ids)


def test_read_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,group,mfcc_01\na,g,1.0\n")
    with pytest.raises(DataError):
        read_features_csv(path)


def test_duplicate_speaker_ids_rejected(tmp_path):
    rec = SpeakerRecord("same", "a", np.array([1.0]))
    other = SpeakerRecord("same", "b", np.array([2.0]))
    with pytest.raises(DataError):
        group_matrices([rec, other])
    with pytest.raises(DataError):
        write_features_csv(tmp_path / "dup.csv", [rec, other])


def test_inconsistent_width_rejected():
    a = SpeakerRecord("s1", "a", np.array([1.0, 2.0]))
    b = SpeakerRecord("s2", "b", np.array([1.0]))
    with pytest.raises(DataError):
        group_matrices([a, b])
