"""Random Forest classification and paired model comparison.

CART trees grown on bootstrap samples with a random feature subset per
node; prediction by majority vote. Every random draw comes from a stream
keyed on (seed, purpose, tree index) so a fit is bit-identical regardless
of thread count, and the train/test split stream never interacts with the
tree streams.

Evaluation helpers: stratified split, accuracy with Wilson score CI, and
McNemar's test on aligned predictions (exact binomial for small discordant
counts, continuity-corrected chi-square otherwise).
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import SpeakerRecord, group_labels
from .errors import DataError
from .special import chisq_cdf, normal_ppf

EXACT_BINOMIAL = "exact_binomial"
CHI2_CORRECTED = "chi2_corrected"

# Discordant-pair count below which the chi-square approximation is
# unreliable and the exact binomial is used instead.
_EXACT_CUTOFF = 25


@dataclass(frozen=True)
class ForestConfig:
    """Breiman-style defaults: 500 trees, sqrt(p) features per split."""

    n_trees: int = 500
    max_features: int | None = None  # None means floor(sqrt(n_features_used))
    min_samples_leaf: int = 1
    max_depth: int | None = None
    bootstrap: bool = True
    seed: int = 42

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be positive, got {self.n_trees}")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError(f"max_features must be positive, got {self.max_features}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be positive, got {self.min_samples_leaf}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError(f"max_depth must be positive, got {self.max_depth}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class SplitPlan:
    test_fraction: float = 0.30
    seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class _Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_class: np.ndarray


@dataclass(frozen=True)
class ForestModel:
    config: ForestConfig
    feature_set: tuple[int, ...]  # 1-based indices into the full vector
    classes: tuple[str, ...]
    n_features_total: int
    trees: tuple[_Tree, ...]


@dataclass(frozen=True)
class ClassifierEval:
    feature_set: tuple[int, ...]
    predictions: tuple[str, ...]
    n_correct: int
    accuracy: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class McNemarResult:
    b: int  # model A correct, model B wrong
    c: int  # model A wrong, model B correct
    chi2: float | None
    p: float
    method: str


@dataclass(frozen=True)
class ModelComparison:
    """Two forests on one split, evaluated on the same test items."""

    full: ClassifierEval
    reduced: ClassifierEval
    mcnemar: McNemarResult
    n_train: int
    test_ids: tuple[str, ...]
    truth: tuple[str, ...]


def stratified_split(
    records: Sequence[SpeakerRecord], plan: SplitPlan
) -> tuple[list[SpeakerRecord], list[SpeakerRecord]]:
    """Seeded per-group split holding out round(n_i * test_fraction) members.

    Groups are processed in label order and members in speaker_id order
    before the shuffle, so the split depends only on (data, seed), not on
    input row order. Both partitions come back sorted by speaker_id.
    """
    records = list(records)
    label_a, label_b = group_labels(records)
    rng = np.random.default_rng([plan.seed, 0])
    train: list[SpeakerRecord] = []
    test: list[SpeakerRecord] = []
    for label in (label_a, label_b):
        members = sorted((r for r in records if r.group == label), key=lambda r: r.speaker_id)
        n_test = round(len(members) * plan.test_fraction)
        order = rng.permutation(len(members))
        chosen = set(order[:n_test].tolist())
        group_test = [m for i, m in enumerate(members) if i in chosen]
        group_train = [m for i, m in enumerate(members) if i not in chosen]
        if len(group_test) < 2 or len(group_train) < 2:
            raise DataError(
                f"group {label!r}: split leaves {len(group_train)} train / {len(group_test)} test, "
                "need at least 2 on each side"
            )
        train.extend(group_train)
        test.extend(group_test)
    train.sort(key=lambda r: r.speaker_id)
    test.sort(key=lambda r: r.speaker_id)
    return train, test


def gini(class_counts) -> float:
    """CART impurity 1 - sum((n_k / n)^2)."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.ndim != 1 or counts.size < 1 or np.any(counts < 0):
        raise ValueError("class counts must be a non-negative vector")
    total = counts.sum()
    if total <= 0:
        raise ValueError("class counts sum to zero")
    return float(1.0 - np.sum((counts / total) ** 2))


def _best_split(x, y, idx, n_classes, mtry, min_leaf, rng):
    """Best (feature, threshold) among a random feature subset, or None.

    Candidate thresholds are midpoints of consecutive distinct sorted
    values. Maximizes Gini decrease; ties resolve to the lower feature
    index, then the lower threshold; zero-decrease splits are rejected.
    """
    counts = np.bincount(y[idx], minlength=n_classes)
    parent = gini(counts)
    n = idx.size
    sampled = np.sort(rng.choice(x.shape[1], size=mtry, replace=False))

    best = None
    best_decrease = 0.0
    for f in sampled:
        col = x[idx, f]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        valid = xs[1:] != xs[:-1]
        if not valid.any():
            continue
        ys = y[idx][order]
        one_hot = np.zeros((n, n_classes))
        one_hot[np.arange(n), ys] = 1.0
        left_counts = one_hot.cumsum(axis=0)[:-1]
        n_left = np.arange(1, n, dtype=np.float64)
        n_right = n - n_left
        g_left = 1.0 - ((left_counts / n_left[:, None]) ** 2).sum(axis=1)
        g_right = 1.0 - (((counts - left_counts) / n_right[:, None]) ** 2).sum(axis=1)
        decrease = parent - (n_left * g_left + n_right * g_right) / n
        if min_leaf > 1:
            valid &= (n_left >= min_leaf) & (n_right >= min_leaf)
        decrease = np.where(valid, decrease, -np.inf)
        i = int(np.argmax(decrease))  # first max: lowest qualifying threshold
        if decrease[i] > best_decrease:
            best_decrease = float(decrease[i])
            best = (int(f), float((xs[i] + xs[i + 1]) / 2.0))
    return best


def _grow_tree(x, y, n_classes, mtry, min_leaf, max_depth, rng) -> _Tree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf_class: list[int] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        leaf_class.append(-1)
        return len(feature) - 1

    def build(idx: np.ndarray, depth: int) -> int:
        node = new_node()
        counts = np.bincount(y[idx], minlength=n_classes)
        depth_capped = max_depth is not None and depth >= max_depth
        split = None
        if idx.size > 1 and np.max(counts) < idx.size and not depth_capped:
            split = _best_split(x, y, idx, n_classes, mtry, min_leaf, rng)
        if split is None:
            leaf_class[node] = int(np.argmax(counts))  # tie: lowest class index
            return node
        f, thr = split
        feature[node] = f
        threshold[node] = thr
        mask = x[idx, f] <= thr
        left[node] = build(idx[mask], depth + 1)
        right[node] = build(idx[~mask], depth + 1)
        return node

    build(np.arange(x.shape[0]), 0)
    return _Tree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        leaf_class=np.array(leaf_class, dtype=np.int32),
    )


def _checked_feature_set(feature_set, n_features_total: int) -> tuple[int, ...]:
    chosen = sorted(set(int(f) for f in feature_set))
    if not chosen:
        raise DataError("feature set is empty")
    bad = [f for f in chosen if not 1 <= f <= n_features_total]
    if bad:
        raise DataError(f"feature indices {bad} outside 1..{n_features_total}")
    return tuple(chosen)


def fit_forest(
    records: Sequence[SpeakerRecord],
    feature_set: Sequence[int] | None = None,
    config: ForestConfig = ForestConfig(),
    n_jobs: int = 1,
) -> ForestModel:
    """Train a forest on the given records, restricted to feature_set.

    Tree t draws its bootstrap sample and all node-level feature subsets
    from np.random.default_rng([seed, 1, t]), so results do not depend on
    n_jobs or scheduling.
    """
    records = list(records)
    if not records:
        raise DataError("empty training set")
    n_features_total = records[0].n_features
    if any(r.n_features != n_features_total for r in records):
        raise DataError("records disagree on feature count")
    if feature_set is None:
        feature_set = range(1, n_features_total + 1)
    chosen = _checked_feature_set(feature_set, n_features_total)

    classes = tuple(sorted({r.group for r in records}))
    class_index = {label: i for i, label in enumerate(classes)}
    x = np.vstack([r.features for r in records])[:, [f - 1 for f in chosen]]
    y = np.array([class_index[r.group] for r in records], dtype=np.int64)

    p_used = len(chosen)
    mtry = config.max_features if config.max_features is not None else max(1, int(math.isqrt(p_used)))
    if mtry > p_used:
        raise DataError(f"max_features {mtry} exceeds the {p_used} features in use")

    def grow(t: int) -> _Tree:
        rng = np.random.default_rng([config.seed, 1, t])
        if config.bootstrap:
            sample = rng.integers(0, x.shape[0], size=x.shape[0])
        else:
            sample = np.arange(x.shape[0])
        return _grow_tree(
            x[sample], y[sample], len(classes), mtry, config.min_samples_leaf, config.max_depth, rng
        )

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = tuple(pool.map(grow, range(config.n_trees)))
    else:
        trees = tuple(grow(t) for t in range(config.n_trees))
    return ForestModel(
        config=config,
        feature_set=chosen,
        classes=classes,
        n_features_total=n_features_total,
        trees=trees,
    )


def _tree_votes(tree: _Tree, x: np.ndarray) -> np.ndarray:
    out = np.empty(x.shape[0], dtype=np.int64)
    for i, row in enumerate(x):
        node = 0
        while tree.leaf_class[node] < 0:
            node = tree.left[node] if row[tree.feature[node]] <= tree.threshold[node] else tree.right[node]
        out[i] = tree.leaf_class[node]
    return out


def predict(model: ForestModel, records: Sequence[SpeakerRecord]) -> list[str]:
    """Majority-vote labels; vote ties go to the lexicographically first class."""
    records = list(records)
    if not records:
        return []
    if any(r.n_features != model.n_features_total for r in records):
        raise DataError(f"model expects {model.n_features_total} features per record")
    x = np.vstack([r.features for r in records])[:, [f - 1 for f in model.feature_set]]
    votes = np.zeros((x.shape[0], len(model.classes)), dtype=np.int64)
    for tree in model.trees:
        votes[np.arange(x.shape[0]), _tree_votes(tree, x)] += 1
    return [model.classes[i] for i in votes.argmax(axis=1)]


def wilson_ci(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion k/n."""
    if n < 1:
        raise ValueError("wilson_ci needs at least one trial")
    if not 0 <= k <= n:
        raise ValueError(f"successes {k} outside 0..{n}")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    z = normal_ppf(1.0 - (1.0 - confidence) / 2.0)
    p_hat = k / n
    denom = 1.0 + z**2 / n
    center = p_hat + z**2 / (2.0 * n)
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / n + z**2 / (4.0 * n**2))
    return max(0.0, (center - half) / denom), min(1.0, (center + half) / denom)


def mcnemar(pred_a: Sequence[str], pred_b: Sequence[str], truth: Sequence[str]) -> McNemarResult:
    """Paired comparison of two classifiers via discordant counts.

    Exact two-sided binomial when b + c < 25, else the continuity-corrected
    chi-square (|b - c| - 1)^2 / (b + c) on 1 df.
    """
    if not len(pred_a) == len(pred_b) == len(truth):
        raise DataError(
            f"prediction/truth lengths differ: {len(pred_a)}, {len(pred_b)}, {len(truth)}"
        )
    correct_a = np.array([p == t for p, t in zip(pred_a, truth)])
    correct_b = np.array([p == t for p, t in zip(pred_b, truth)])
    b = int(np.sum(correct_a & ~correct_b))
    c = int(np.sum(~correct_a & correct_b))
    if b + c == 0:
        return McNemarResult(b=0, c=0, chi2=None, p=1.0, method=EXACT_BINOMIAL)
    if b + c < _EXACT_CUTOFF:
        m = b + c
        tail = sum(math.comb(m, i) for i in range(min(b, c) + 1)) / 2.0**m
        return McNemarResult(b=b, c=c, chi2=None, p=min(1.0, 2.0 * tail), method=EXACT_BINOMIAL)
    chi2 = (abs(b - c) - 1.0) ** 2 / (b + c)
    return McNemarResult(b=b, c=c, chi2=chi2, p=1.0 - chisq_cdf(chi2, 1.0), method=CHI2_CORRECTED)


def evaluate(
    model: ForestModel, test: Sequence[SpeakerRecord], confidence: float = 0.95
) -> ClassifierEval:
    test = list(test)
    if not test:
        raise DataError("empty test set")
    predictions = predict(model, test)
    n_correct = sum(p == r.group for p, r in zip(predictions, test))
    low, high = wilson_ci(n_correct, len(test), confidence)
    return ClassifierEval(
        feature_set=model.feature_set,
        predictions=tuple(predictions),
        n_correct=n_correct,
        accuracy=n_correct / len(test),
        ci_low=low,
        ci_high=high,
    )


def compare_models(
    records: Sequence[SpeakerRecord],
    config: ForestConfig,
    plan: SplitPlan,
    full_set: Sequence[int] | None = None,
    reduced_set: Sequence[int] = (1, 2, 5),
    confidence: float = 0.95,
    n_jobs: int = 1,
) -> ModelComparison:
    """One stratified split; both forests share the train partition and are
    scored on the same test items, so McNemar sees aligned predictions."""
    train, test = stratified_split(records, plan)
    model_full = fit_forest(train, full_set, config, n_jobs)
    model_reduced = fit_forest(train, reduced_set, config, n_jobs)
    eval_full = evaluate(model_full, test, confidence)
    eval_reduced = evaluate(model_reduced, test, confidence)
    truth = tuple(r.group for r in test)
    return ModelComparison(
        full=eval_full,
        reduced=eval_reduced,
        mcnemar=mcnemar(eval_full.predictions, eval_reduced.predictions, truth),
        n_train=len(train),
        test_ids=tuple(r.speaker_id for r in test),
        truth=truth,
    )


def repeated_compare(
    records: Sequence[SpeakerRecord],
    config: ForestConfig,
    plan: SplitPlan,
    repeats: int,
    full_set: Sequence[int] | None = None,
    reduced_set: Sequence[int] = (1, 2, 5),
    confidence: float = 0.95,
    n_jobs: int = 1,
) -> list[tuple[int, ModelComparison]]:
    """Re-run the comparison on `repeats` consecutive seeds (base seed + i).

    A single split is statistically fragile; this reports the spread.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be positive, got {repeats}")
    out = []
    for i in range(repeats):
        comparison = compare_models(
            records,
            dataclasses.replace(config, seed=config.seed + i),
            dataclasses.replace(plan, seed=plan.seed + i),
            full_set,
            reduced_set,
            confidence,
            n_jobs,
        )
        out.append((plan.seed + i, comparison))
    return out
