"""Pipeline stages: manifest to features to reports to figures.

Each stage is a plain function writing its artifacts into an output
directory; `run_all` chains them fail-fast and records per-stage status in
run.json. Serialization rules are fixed so reruns diff cleanly: CSV values
carry 6 decimals (df columns 2), JSON floats are rounded to 9 significant
digits, rows sort by speaker_id, and the lexicographically smaller group
label is group A everywhere.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .audio_io import load_wav
from .dataset import (
    SpeakerRecord,
    feature_column_names,
    group_matrices,
    read_features_csv,
    write_features_csv,
)
from .errors import DataError
from .forest import ForestConfig, ModelComparison, SplitPlan, compare_models, repeated_compare
from .mfcc import MfccConfig, extract_mfcc, pool_mean
from .multivariate import CdaResult, ManovaResult, cda, run_manova
from .svgplot import boxplot_svg, strip_svg
from .univariate import FeatureTestReport, run_feature_tests

_MANIFEST_HEADER = ["path", "group", "speaker_id"]


@dataclass(frozen=True)
class ManifestRow:
    path: Path
    group: str
    speaker_id: str


@dataclass(frozen=True)
class Manifest:
    rows: tuple[ManifestRow, ...]

    @property
    def groups(self) -> tuple[str, str]:
        labels = sorted({r.group for r in self.rows})
        if len(labels) != 2:
            raise DataError(f"expected exactly 2 groups, got {len(labels)}: {labels}")
        return labels[0], labels[1]


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs besides the manifest and output directory."""

    mfcc: MfccConfig = MfccConfig()
    alpha: float = 0.05
    seed: int = 42
    test_fraction: float = 0.30
    n_trees: int = 500
    reduced_features: tuple[int, ...] = (1, 2, 5)
    repeats: int = 1
    keep_going: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be positive, got {self.n_trees}")
        if self.repeats < 1:
            raise ValueError(f"repeats must be positive, got {self.repeats}")
        if not self.reduced_features:
            raise ValueError("reduced feature set is empty")

    def echo(self) -> dict:
        """Flat config dict for report headers; complete enough to rerun."""
        return {
            "window_ms": self.mfcc.window_ms,
            "hop_ms": self.mfcc.hop_ms,
            "n_mels": self.mfcc.n_mels,
            "n_mfcc": self.mfcc.n_mfcc,
            "fmin_hz": self.mfcc.fmin_hz,
            "fmax_hz": self.mfcc.fmax_hz,
            "alpha": self.alpha,
            "seed": self.seed,
            "test_fraction": self.test_fraction,
            "n_trees": self.n_trees,
            "reduced_features": list(self.reduced_features),
            "repeats": self.repeats,
            "keep_going": self.keep_going,
        }


def load_manifest(path: Path | str, audio_root: Path | str | None = None) -> Manifest:
    """Read and validate a `path,group,speaker_id` CSV.

    Relative paths resolve against audio_root, defaulting to the manifest's
    own directory. Every referenced file must exist.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"manifest not found: {path}")
    root = Path(audio_root) if audio_root is not None else path.parent

    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty manifest") from None
        if header != _MANIFEST_HEADER:
            raise DataError(f"{path}: header must be exactly {','.join(_MANIFEST_HEADER)!r}, got {header!r}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{line_no}: expected 3 fields, got {len(row)}")
            wav_path, group, speaker_id = (field.strip() for field in row)
            if not wav_path or not group or not speaker_id:
                raise DataError(f"{path}:{line_no}: empty field")
            rows.append(ManifestRow(path=Path(wav_path), group=group, speaker_id=speaker_id))

    if not rows:
        raise DataError(f"{path}: manifest has no data rows")
    seen_ids: set[str] = set()
    seen_paths: set[Path] = set()
    resolved = []
    for row in rows:
        wav = row.path if row.path.is_absolute() else root / row.path
        if row.speaker_id in seen_ids:
            raise DataError(f"duplicate speaker_id {row.speaker_id!r}")
        seen_ids.add(row.speaker_id)
        if wav in seen_paths:
            raise DataError(f"duplicate path {wav}")
        seen_paths.add(wav)
        if not wav.is_file():
            raise DataError(f"audio file not found: {wav}")
        resolved.append(ManifestRow(path=wav, group=row.group, speaker_id=row.speaker_id))
    manifest = Manifest(rows=tuple(resolved))
    manifest.groups  # validates the two-group invariant
    return manifest


def _round_sig(value: float) -> float:
    if value == 0.0 or not np.isfinite(value):
        return float(value)
    return float(f"{value:.9g}")


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_json_ready(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round_sig(float(obj))
    return obj


def write_json(path: Path | str, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(_json_ready(payload), handle, indent=2)
        handle.write("\n")


def _column_suffixes(label_a: str, label_b: str) -> tuple[str, str]:
    def slug(label: str) -> str:
        return re.sub(r"[^a-z0-9]+", "_", label.lower()).strip("_")

    a, b = slug(label_a), slug(label_b)
    if not a or not b or a == b:
        return "group_a", "group_b"
    return a, b


def run_extract(
    manifest: Manifest, config: RunConfig, out_dir: Path | str, n_workers: int = 4
) -> list[SpeakerRecord]:
    """Extract pooled coefficient vectors for every manifest row.

    Files are processed in parallel but collected in manifest order, and
    features.csv is written sorted by speaker_id, so output bytes do not
    depend on worker count. With keep_going, per-file failures land in
    extract_failures.log instead of aborting.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(row: ManifestRow) -> SpeakerRecord | Exception:
        try:
            clip = load_wav(row.path)
            vector = pool_mean(extract_mfcc(clip, config.mfcc))
            return SpeakerRecord(speaker_id=row.speaker_id, group=row.group, features=vector)
        except Exception as exc:  # noqa: BLE001 - kept for the failure log
            return exc

    with ThreadPoolExecutor(max_workers=max(1, n_workers)) as pool:
        results = list(pool.map(one, manifest.rows))

    records: list[SpeakerRecord] = []
    failures: list[tuple[ManifestRow, Exception]] = []
    for row, result in zip(manifest.rows, results):
        if isinstance(result, Exception):
            if not config.keep_going:
                raise result
            failures.append((row, result))
        else:
            records.append(result)
    if failures:
        with open(out_dir / "extract_failures.log", "w") as handle:
            for row, exc in failures:
                handle.write(f"{row.path}: {exc}\n")
    if not records:
        raise DataError("extraction produced no usable recordings")
    write_features_csv(out_dir / "features.csv", records)
    return sorted(records, key=lambda r: r.speaker_id)


def load_features(out_dir: Path | str) -> list[SpeakerRecord]:
    return read_features_csv(Path(out_dir) / "features.csv")


def _feature_label(feature: int) -> str:
    return f"mfcc_{feature:02d}"


def run_stats(records: Sequence[SpeakerRecord], config: RunConfig, out_dir: Path | str) -> FeatureTestReport:
    """Per-feature battery; writes table1.csv and assumptions.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (label_a, values_a), (label_b, values_b) = group_matrices(records)
    report = run_feature_tests(values_a, values_b, label_a, label_b, config.alpha)
    suffix_a, suffix_b = _column_suffixes(label_a, label_b)

    with open(out_dir / "table1.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "feature",
                "label",
                f"mean_{suffix_a}",
                f"sd_{suffix_a}",
                f"mean_{suffix_b}",
                f"sd_{suffix_b}",
                "test_used",
                "t",
                "df",
                "p_two_sided",
                "p_one_sided",
                "ci_low",
                "ci_high",
                "cohens_d",
                "significant_bonferroni",
            ]
        )
        for row in report.rows:
            writer.writerow(
                [
                    row.feature,
                    _feature_label(row.feature),
                    f"{row.mean_a:.6f}",
                    f"{row.sd_a:.6f}",
                    f"{row.mean_b:.6f}",
                    f"{row.sd_b:.6f}",
                    row.test_used,
                    f"{row.t:.6f}",
                    f"{row.df:.2f}",
                    f"{row.p_two_sided:.6f}",
                    f"{row.p_one_sided:.6f}",
                    f"{row.ci_low:.6f}",
                    f"{row.ci_high:.6f}",
                    f"{row.cohens_d:.6f}",
                    "true" if row.significant_bonferroni else "false",
                ]
            )

    levene_by_feature = {v.feature: v for v in report.variance}
    with open(out_dir / "assumptions.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["feature", "label", "group", "shapiro_w", "shapiro_p", "ks_d", "ks_p", "levene_w", "levene_p"]
        )
        for entry in report.normality:
            variance = levene_by_feature[entry.feature]
            writer.writerow(
                [
                    entry.feature,
                    _feature_label(entry.feature),
                    entry.group,
                    f"{entry.shapiro_w:.6f}",
                    f"{entry.shapiro_p:.6f}",
                    f"{entry.ks_d:.6f}",
                    f"{entry.ks_p:.6f}",
                    f"{variance.levene_w:.6f}",
                    f"{variance.levene_p:.6f}",
                ]
            )
    return report


def run_manova_stage(records: Sequence[SpeakerRecord], out_dir: Path | str) -> ManovaResult:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_manova(group_matrices(records))
    write_json(out_dir / "manova.json", dataclasses.asdict(result))
    return result


def run_cda_stage(records: Sequence[SpeakerRecord], out_dir: Path | str) -> CdaResult:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups = group_matrices(records)
    result = cda(groups)
    n_features = records[0].n_features
    write_json(
        out_dir / "cda.json",
        {
            "eigenvalue": result.eigenvalue,
            "features": feature_column_names(n_features),
            "raw_coeffs": result.raw_coeffs,
            "std_coeffs": result.std_coeffs,
            "centroids": {label: c for label, c in zip(result.group_labels, result.centroids)},
        },
    )

    scored = []
    for (label, _), scores in zip(groups, result.scores):
        members = sorted((r for r in records if r.group == label), key=lambda r: r.speaker_id)
        scored.extend((m.speaker_id, m.group, s) for m, s in zip(members, scores))
    scored.sort(key=lambda item: item[0])
    with open(out_dir / "cda_scores.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["speaker_id", "group", "score"])
        for speaker_id, group, score in scored:
            writer.writerow([speaker_id, group, f"{score:.6f}"])
    return result


def _comparison_payload(comparison: ModelComparison) -> dict:
    def eval_block(ev) -> dict:
        return {
            "feature_set": list(ev.feature_set),
            "n_correct": ev.n_correct,
            "accuracy": ev.accuracy,
            "ci_low": ev.ci_low,
            "ci_high": ev.ci_high,
        }

    return {
        "n_train": comparison.n_train,
        "n_test": len(comparison.test_ids),
        "full": eval_block(comparison.full),
        "reduced": eval_block(comparison.reduced),
        "mcnemar": {
            "b_full_only_correct": comparison.mcnemar.b,
            "c_reduced_only_correct": comparison.mcnemar.c,
            "chi2": comparison.mcnemar.chi2,
            "p": comparison.mcnemar.p,
            "method": comparison.mcnemar.method,
        },
        "predictions": [
            {"speaker_id": sid, "truth": truth, "full": pf, "reduced": pr}
            for sid, truth, pf, pr in zip(
                comparison.test_ids,
                comparison.truth,
                comparison.full.predictions,
                comparison.reduced.predictions,
            )
        ],
    }


def run_classify_stage(records: Sequence[SpeakerRecord], config: RunConfig, out_dir: Path | str) -> dict:
    """Full-vs-reduced forest comparison; writes classify.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    forest_config = ForestConfig(n_trees=config.n_trees, seed=config.seed)
    plan = SplitPlan(test_fraction=config.test_fraction, seed=config.seed)
    comparison = compare_models(records, forest_config, plan, reduced_set=config.reduced_features)
    payload = {"config": config.echo(), **_comparison_payload(comparison)}

    if config.repeats > 1:
        runs = repeated_compare(
            records, forest_config, plan, config.repeats, reduced_set=config.reduced_features
        )
        full_acc = np.array([c.full.accuracy for _, c in runs])
        reduced_acc = np.array([c.reduced.accuracy for _, c in runs])
        payload["repeats"] = {
            "n": config.repeats,
            "seeds": [seed for seed, _ in runs],
            "full_accuracies": full_acc,
            "reduced_accuracies": reduced_acc,
            "full_mean": full_acc.mean(),
            "full_sd": full_acc.std(ddof=1),
            "reduced_mean": reduced_acc.mean(),
            "reduced_sd": reduced_acc.std(ddof=1),
        }
    write_json(out_dir / "classify.json", payload)
    return payload


def run_plot_stage(records: Sequence[SpeakerRecord], config: RunConfig, out_dir: Path | str) -> list[Path]:
    """Boxplots for the selected features plus the canonical-score strip."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups = group_matrices(records)
    n_features = records[0].n_features
    written = []
    for feature in config.reduced_features:
        if not 1 <= feature <= n_features:
            raise DataError(f"plot feature {feature} outside 1..{n_features}")
        label = _feature_label(feature)
        svg = boxplot_svg(
            [(g, values[:, feature - 1]) for g, values in groups],
            title=f"{label} by group",
            value_label=label,
        )
        target = out_dir / f"boxplot_{label}.svg"
        target.write_text(svg)
        written.append(target)

    result = cda(groups)
    svg = strip_svg(
        list(zip(result.group_labels, result.scores)),
        title="Canonical scores by group",
        value_label="canonical score",
        centroids=result.centroids,
    )
    target = out_dir / "cda_scores.svg"
    target.write_text(svg)
    written.append(target)
    return written


def run_all(manifest: Manifest, config: RunConfig, out_dir: Path | str) -> dict:
    """Run every stage fail-fast; always leave run.json behind.

    On a stage failure the error is recorded in run.json and re-raised, so
    no downstream artifacts get written.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    label_a, label_b = manifest.groups
    stages: list[dict] = []
    meta = {
        "version": __version__,
        "started_at": datetime.now(timezone.utc).isoformat(),
        "config": config.echo(),
        "groups": [label_a, label_b],
        "n_recordings": len(manifest.rows),
        "stages": stages,
    }
    try:
        records = _run_stage(stages, "extract", lambda: run_extract(manifest, config, out_dir))
        _run_stage(stages, "stats", lambda: run_stats(records, config, out_dir))
        _run_stage(stages, "manova", lambda: run_manova_stage(records, out_dir))
        _run_stage(stages, "cda", lambda: run_cda_stage(records, out_dir))
        _run_stage(stages, "classify", lambda: run_classify_stage(records, config, out_dir))
        _run_stage(stages, "plot", lambda: run_plot_stage(records, config, out_dir))
    finally:
        meta["finished_at"] = datetime.now(timezone.utc).isoformat()
        write_json(out_dir / "run.json", meta)
    return meta


def _run_stage(stages: list[dict], name: str, action):
    try:
        result = action()
    except Exception as exc:
        stages.append({"stage": name, "status": "failed", "error": str(exc)})
        raise
    stages.append({"stage": name, "status": "ok"})
    return result
