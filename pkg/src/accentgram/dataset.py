"""Speaker-level feature table.

One record per speaker: id, group label, and a fixed-length feature vector.
The on-disk form is a plain CSV (`speaker_id,group,mfcc_01,...`) with
6-decimal fixed formatting and rows sorted by speaker_id, so reruns are
byte-identical and diffs are readable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class SpeakerRecord:
    speaker_id: str
    group: str
    features: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        object.__setattr__(self, "features", features)
        if not self.speaker_id or not self.group:
            raise DataError("speaker_id and group must be non-empty")
        if features.ndim != 1 or features.size < 1:
            raise DataError(f"speaker {self.speaker_id!r}: features must be a non-empty vector")
        if not np.all(np.isfinite(features)):
            raise DataError(f"speaker {self.speaker_id!r}: features must be finite")

    @property
    def n_features(self) -> int:
        return self.features.size


def _checked(records: Sequence[SpeakerRecord]) -> Sequence[SpeakerRecord]:
    if not records:
        raise DataError("dataset is empty")
    p = records[0].n_features
    seen: set[str] = set()
    for record in records:
        if record.n_features != p:
            raise DataError(
                f"speaker {record.speaker_id!r}: {record.n_features} features, expected {p}"
            )
        if record.speaker_id in seen:
            raise DataError(f"duplicate speaker_id {record.speaker_id!r}")
        seen.add(record.speaker_id)
    return records


def group_labels(records: Sequence[SpeakerRecord]) -> tuple[str, str]:
    """The two group labels, lexicographically ordered (group A first)."""
    labels = sorted({r.group for r in records})
    if len(labels) != 2:
        raise DataError(f"expected exactly 2 groups, got {len(labels)}: {labels}")
    return labels[0], labels[1]


def group_matrices(records: Sequence[SpeakerRecord]) -> list[tuple[str, np.ndarray]]:
    """(label, n_i x p matrix) pairs, labels sorted, rows sorted by speaker_id."""
    _checked(records)
    label_a, label_b = group_labels(records)
    out = []
    for label in (label_a, label_b):
        members = sorted((r for r in records if r.group == label), key=lambda r: r.speaker_id)
        out.append((label, np.vstack([r.features for r in members])))
    return out


def feature_column_names(n_features: int) -> list[str]:
    return [f"mfcc_{j:02d}" for j in range(1, n_features + 1)]


def write_features_csv(path: Path | str, records: Sequence[SpeakerRecord]) -> None:
    records = sorted(_checked(records), key=lambda r: r.speaker_id)
    p = records[0].n_features
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["speaker_id", "group"] + feature_column_names(p))
        for record in records:
            writer.writerow([record.speaker_id, record.group] + [f"{v:.6f}" for v in record.features])


def read_features_csv(path: Path | str) -> list[SpeakerRecord]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"features file not found: {path}")
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty features file") from None
        if header[:2] != ["speaker_id", "group"] or len(header) < 3:
            raise DataError(f"{path}: expected header speaker_id,group,mfcc_01,..., got {header!r}")
        if header[2:] != feature_column_names(len(header) - 2):
            raise DataError(f"{path}: malformed feature columns {header[2:]!r}")
        records = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
            try:
                values = np.array([float(v) for v in row[2:]])
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from None
            records.append(SpeakerRecord(speaker_id=row[0], group=row[1], features=values))
    return list(_checked(records))


def records_from_matrix(
    labels_and_values: Iterable[tuple[str, np.ndarray]], id_prefix: str = "spk"
) -> list[SpeakerRecord]:
    """Build records from (label, matrix) pairs with synthetic speaker ids.

    Mainly for tests and synthetic fixtures; ids carry the group label so
    they stay unique and sort stably within each group.
    """
    records = []
    for label, values in labels_and_values:
        values = np.asarray(values, dtype=np.float64)
        for i, row in enumerate(values):
            records.append(
                SpeakerRecord(speaker_id=f"{id_prefix}_{label}_{i:04d}", group=label, features=row)
            )
    return list(_checked(records))
