"""Reference augmentation methods to compare against.

Six of the seven balance every class up to the majority count: upsample,
noise, smote, mixup, we (within-class extrapolation) and ld (linear delta).
ge3 instead mirrors the cross-class scheme, emitting one mean-shifted copy
per (ordered class pair, source record) with no balancing.

Every method returns only the synthetic records, as a soft-labeled set
(one-hot rows except for mixup).  Randomness is keyed per (seed, class), so
output never depends on scheduling.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyClassError
from .geometry import center, fit_all_geometries, fixed_rank
from .store import LabeledEmbeddingSet, SoftLabeledSet

BASELINE_METHODS = ("upsample", "noise", "smote", "mixup", "we", "ld", "ge3")

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class BaselineConfig:
    method: str
    noise_sigma: float = 0.1
    smote_k: int = 5
    mixup_alpha: float = 0.75
    we_lambda: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.method not in BASELINE_METHODS:
            raise ValueError(f"unknown baseline method {self.method!r}")
        if self.noise_sigma < 0.0:
            raise ValueError("noise sigma must be >= 0")
        if self.smote_k < 1:
            raise ValueError("smote k must be >= 1")
        if self.mixup_alpha <= 0.0:
            raise ValueError("mixup alpha must be > 0")


def class_rng(seed: int, class_id: int) -> np.random.Generator:
    """Counter-keyed generator: one stream per (seed, class)."""
    key = (seed & _SEED_MASK, class_id)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def _deficits(dataset: LabeledEmbeddingSet) -> tuple[np.ndarray, int]:
    counts = dataset.class_counts()
    majority = int(counts.max()) if counts.size else 0
    for c, count in enumerate(counts):
        if count == 0 and majority > 0:
            raise EmptyClassError(
                f"class {dataset.vocab.names[c]!r} has no records to synthesize from"
            )
    return counts, majority

def _one_hot_rows(n: int, class_id: int, k: int) -> np.ndarray:
    rows = np.zeros((n, k), dtype=np.float32)
    rows[:, class_id] = 1.0
    return rows


def _assemble(dataset, vec_blocks, label_blocks) -> SoftLabeledSet:
    k = dataset.vocab.num_classes
    if vec_blocks:
        vecs = np.concatenate(vec_blocks, axis=0)
        labels = np.concatenate(label_blocks, axis=0)
    else:
        vecs = np.zeros((0, dataset.dim), dtype=np.float32)
        labels = np.zeros((0, k), dtype=np.float32)
    return SoftLabeledSet(dataset.vocab, vecs, labels)


def upsample(dataset: LabeledEmbeddingSet, seed: int = 0) -> SoftLabeledSet:
    """Duplicate uniformly drawn records until every class hits the majority."""
    counts, majority = _deficits(dataset)
    k = dataset.vocab.num_classes
    vec_blocks, label_blocks = [], []
    for c in range(k):
        deficit = majority - int(counts[c])
        if deficit == 0:
            continue
        rng = class_rng(seed, c)
        base = dataset.vectors[dataset.class_indices(c)]
        picks = rng.integers(0, base.shape[0], size=deficit)
        vec_blocks.append(base[picks])
        label_blocks.append(_one_hot_rows(deficit, c, k))
    return _assemble(dataset, vec_blocks, label_blocks)


def gaussian_noise(dataset: LabeledEmbeddingSet, sigma: float = 0.1, seed: int = 0) -> SoftLabeledSet:
    """Upsample plus isotropic gaussian jitter of scale sigma."""
    counts, majority = _deficits(dataset)
    k = dataset.vocab.num_classes
    vec_blocks, label_blocks = [], []
    for c in range(k):
        deficit = majority - int(counts[c])
        if deficit == 0:
            continue
        rng = class_rng(seed, c)
        base = dataset.vectors[dataset.class_indices(c)]
        # same first draw as upsample, so sigma -> 0 reduces to it exactly
        picks = rng.integers(0, base.shape[0], size=deficit)
        noise = rng.normal(0.0, sigma, size=(deficit, dataset.dim))
        vec_blocks.append((base[picks].astype(np.float64) + noise).astype(np.float32))
        label_blocks.append(_one_hot_rows(deficit, c, k))
    return _assemble(dataset, vec_blocks, label_blocks)


def nearest_same_class(vectors: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k euclidean nearest neighbors of each row, self excluded."""
    n = vectors.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    tree = cKDTree(np.asarray(vectors, dtype=np.float64))
    _, idx = tree.query(vectors, k=k + 1)
    idx = idx.reshape(n, k + 1)
    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        row = idx[i]
        hits = np.nonzero(row == i)[0]
        # under exact distance ties the query may not list the point itself
        out[i] = np.delete(row, hits[0] if hits.size else k)
    return out


def smote(dataset: LabeledEmbeddingSet, k_neighbors: int = 5, seed: int = 0) -> SoftLabeledSet:
    """Interpolate each draw toward one of its k nearest same-class records."""
    counts, majority = _deficits(dataset)
    k = dataset.vocab.num_classes
    vec_blocks, label_blocks = [], []
    for c in range(k):
        deficit = majority - int(counts[c])
        if deficit == 0:
            continue
        rng = class_rng(seed, c)
        base = dataset.vectors[dataset.class_indices(c)].astype(np.float64)
        n_c = base.shape[0]
        if n_c == 1:
            warnings.warn(
                f"class {dataset.vocab.names[c]!r} has a single record; "
                "smote falls back to duplication"
            )
            new = np.repeat(base, deficit, axis=0)
        else:
            k_eff = min(k_neighbors, n_c - 1)
            neighbors = nearest_same_class(base, k_eff)
            anchors = rng.integers(0, n_c, size=deficit)
            picks = rng.integers(0, k_eff, size=deficit)
            steps = rng.random(size=deficit)
            partners = neighbors[anchors, picks]
            new = base[anchors] + steps[:, None] * (base[partners] - base[anchors])
        vec_blocks.append(new.astype(np.float32))
        label_blocks.append(_one_hot_rows(deficit, c, k))
    return _assemble(dataset, vec_blocks, label_blocks)


def mixup_h(dataset: LabeledEmbeddingSet, alpha: float = 0.75, seed: int = 0) -> SoftLabeledSet:
    """Convex-combine minority records with records of other classes.

    Weights are Beta(alpha, alpha); the soft label mixes the two one-hots
    with the same weight.
    """
    counts, majority = _deficits(dataset)
    k = dataset.vocab.num_classes
    vec_blocks, label_blocks = [], []
    for c in range(k):
        deficit = majority - int(counts[c])
        if deficit == 0:
            continue
        other_idx = np.nonzero(dataset.labels != c)[0]
        if other_idx.size == 0:
            raise EmptyClassError("mixup needs records outside the minority class")
        rng = class_rng(seed, c)
        base = dataset.vectors[dataset.class_indices(c)].astype(np.float64)
        anchors = rng.integers(0, base.shape[0], size=deficit)
        partners = other_idx[rng.integers(0, other_idx.size, size=deficit)]
        lam = rng.beta(alpha, alpha, size=deficit)
        new = lam[:, None] * base[anchors] + (1.0 - lam[:, None]) * dataset.vectors[partners].astype(np.float64)
        rows = np.zeros((deficit, k), dtype=np.float64)
        rows[np.arange(deficit), c] = lam
        rows[np.arange(deficit), dataset.labels[partners]] += 1.0 - lam
        vec_blocks.append(new.astype(np.float32))
        label_blocks.append(rows.astype(np.float32))
    return _assemble(dataset, vec_blocks, label_blocks)


def within_extrapolate(dataset: LabeledEmbeddingSet, lam: float = 0.5, seed: int = 0) -> SoftLabeledSet:
    """Push a record away from a distinct same-class record: x + lam (x - x')."""
    counts, majority = _deficits(dataset)
    k = dataset.vocab.num_classes
    vec_blocks, label_blocks = [], []
    for c in range(k):
        deficit = majority - int(counts[c])
        if deficit == 0:
            continue
        rng = class_rng(seed, c)
        base = dataset.vectors[dataset.class_indices(c)].astype(np.float64)
        n_c = base.shape[0]
        if n_c == 1:
            warnings.warn(
                f"class {dataset.vocab.names[c]!r} has a single record; "
                "we falls back to duplication"
            )
            new = np.repeat(base, deficit, axis=0)
        else:
            anchors = rng.integers(0, n_c, size=deficit)
            offsets = rng.integers(1, n_c, size=deficit)
            partners = (anchors + offsets) % n_c
            new = base[anchors] + lam * (base[anchors] - base[partners])
        vec_blocks.append(new.astype(np.float32))
        label_blocks.append(_one_hot_rows(deficit, c, k))
    return _assemble(dataset, vec_blocks, label_blocks)


def linear_delta(dataset: LabeledEmbeddingSet, seed: int = 0) -> SoftLabeledSet:
    """Transplant the difference of two same-class records onto a third."""
    counts, majority = _deficits(dataset)
    k = dataset.vocab.num_classes
    vec_blocks, label_blocks = [], []
    for c in range(k):
        deficit = majority - int(counts[c])
        if deficit == 0:
            continue
        rng = class_rng(seed, c)
        base = dataset.vectors[dataset.class_indices(c)].astype(np.float64)
        n_c = base.shape[0]
        if n_c < 3:
            warnings.warn(
                f"class {dataset.vocab.names[c]!r} has fewer than 3 records; "
                "ld draws with replacement"
            )
            first = rng.integers(0, n_c, size=deficit)
            second = rng.integers(0, n_c, size=deficit)
            third = rng.integers(0, n_c, size=deficit)
        else:
            first = rng.integers(0, n_c, size=deficit)
            off = rng.integers(1, n_c, size=deficit)
            second = (first + off) % n_c
            lo = np.minimum(first, second)
            hi = np.maximum(first, second)
            third = rng.integers(0, n_c - 2, size=deficit)
            third = third + (third >= lo)
            third = third + (third >= hi)
        new = base[first] - base[second] + base[third]
        vec_blocks.append(new.astype(np.float32))
        label_blocks.append(_one_hot_rows(deficit, c, k))
    return _assemble(dataset, vec_blocks, label_blocks)


def ge3(dataset: LabeledEmbeddingSet) -> SoftLabeledSet:
    """Mean-shift every record into every other class: x - mu_s + mu_t.

    Same pair ordering and emission count as the cross-class augmenter, with
    plain one-hot target labels and no randomness.
    """
    geos = fit_all_geometries(dataset, fixed_rank(0))
    k = dataset.vocab.num_classes
    class_vectors = {c: dataset.vectors[dataset.class_indices(c)] for c in range(k)}
    vec_blocks, label_blocks = [], []
    for c_s in range(k):
        for c_t in range(k):
            if c_t == c_s:
                continue
            block = np.stack(
                [center(geos[c_s], x) + geos[c_t].mean for x in class_vectors[c_s]]
            )
            vec_blocks.append(block.astype(np.float32))
            label_blocks.append(_one_hot_rows(block.shape[0], c_t, k))
    return _assemble(dataset, vec_blocks, label_blocks)


def augment_with_baseline(dataset: LabeledEmbeddingSet, config: BaselineConfig) -> SoftLabeledSet:
    """Dispatch on config.method."""
    if config.method == "upsample":
        return upsample(dataset, config.seed)
    if config.method == "noise":
        return gaussian_noise(dataset, config.noise_sigma, config.seed)
    if config.method == "smote":
        return smote(dataset, config.smote_k, config.seed)
    if config.method == "mixup":
        return mixup_h(dataset, config.mixup_alpha, config.seed)
    if config.method == "we":
        return within_extrapolate(dataset, config.we_lambda, config.seed)
    if config.method == "ld":
        return linear_delta(dataset, config.seed)
    return ge3(dataset)
