"""End-to-end experiment pipeline.

Builds class-imbalanced scenarios from a balanced pool, runs a grid of
(method, n_small, seed) cells, each one subsample -> augment -> train ->
evaluate, and writes per-cell and aggregated CSV reports.  Cells are
independent and each derives all randomness from its own key, so results
are byte-identical no matter how many workers run them.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .baselines import BASELINE_METHODS, BaselineConfig, augment_with_baseline
from .classifier import MlpConfig, evaluate, train
from .errors import (
    BenchmarkCellError,
    DegenerateVarianceError,
    DimError,
    FormatError,
    IoError,
    PoolError,
)
from .geometry import _fix_signs, fixed_rank
from .reprint import ReprintConfig, augment_dataset
from .store import ClassVocabulary, LabeledEmbeddingSet, SoftLabeledSet, merge_soft

_SEED_MASK = (1 << 64) - 1

WORKERS_ENV_VAR = "HSAUG_MAX_WORKERS"


# ---------------------------------------------------------------------------
# synthetic data


@dataclass(frozen=True)
class SynthSpec:
    """Anisotropic gaussian classes with a planted covariance spectrum.

    Each class gets a random mean of scale mean_scale and the given
    eigenvalue spectrum (padded with zeros up to dim) along its own random
    orthonormal directions.
    """

    num_classes: int = 4
    dim: int = 32
    mean_scale: float = 1.0
    spectrum: tuple[float, ...] = (1.0,)
    train_per_class: int = 500
    test_per_class: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError("need at least 2 classes")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if len(self.spectrum) > self.dim:
            raise ValueError("spectrum longer than dim")
        if any(v < 0 for v in self.spectrum):
            raise ValueError("spectrum entries must be >= 0")
        if self.train_per_class < 1 or self.test_per_class < 1:
            raise ValueError("per-class sizes must be >= 1")


def _haar_rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


def synth_dataset(spec: SynthSpec, return_params: bool = False):
    """Draw a balanced train pool and a disjoint test set.

    Returns (train_pool, test_set) and, if asked, a per-class list of
    (mean, rotation, eigenvalues) giving the planted population geometry.
    """
    rng = np.random.default_rng(np.random.SeedSequence((spec.seed & _SEED_MASK, 7)))
    eigs = np.zeros(spec.dim)
    eigs[: len(spec.spectrum)] = spec.spectrum
    scale = np.sqrt(eigs)

    vocab = ClassVocabulary(tuple(f"class_{c}" for c in range(spec.num_classes)))
    train_blocks, test_blocks, params = [], [], []
    for _ in range(spec.num_classes):
        mean = spec.mean_scale * rng.standard_normal(spec.dim)
        rot = _haar_rotation(rng, spec.dim)
        z_train = rng.standard_normal((spec.train_per_class, spec.dim))
        z_test = rng.standard_normal((spec.test_per_class, spec.dim))
        train_blocks.append(mean + (z_train * scale) @ rot.T)
        test_blocks.append(mean + (z_test * scale) @ rot.T)
        params.append((mean, rot, eigs.copy()))

    def pack(blocks, per_class):
        vecs = np.concatenate(blocks, axis=0).astype(np.float32)
        labels = np.repeat(np.arange(spec.num_classes), per_class)
        return LabeledEmbeddingSet(vocab, vecs, labels)

    train_pool = pack(train_blocks, spec.train_per_class)
    test_set = pack(test_blocks, spec.test_per_class)
    if return_params:
        return train_pool, test_set, params
    return train_pool, test_set


# ---------------------------------------------------------------------------
# imbalance scenarios


@dataclass(frozen=True)
class ScenarioSpec:
    minority_classes: tuple[int, ...]
    n_small: int
    n_large: int
    seed: int


def make_scenario(
    pool: LabeledEmbeddingSet,
    n_small: int,
    n_large: int,
    seed: int,
    minority_classes=None,
) -> tuple[LabeledEmbeddingSet, ScenarioSpec]:
    """Subsample the pool into an imbalanced training set.

    Half the classes (rounded down) become minorities with n_small records,
    the rest keep n_large; the draw is without replacement.  Pass
    minority_classes to pin the split instead of drawing it.
    """
    k = pool.vocab.num_classes
    if k < 2:
        raise ValueError("need at least 2 classes to build a scenario")
    if not 1 <= n_small <= n_large:
        raise ValueError("need 1 <= n_small <= n_large")
    rng = np.random.default_rng(np.random.SeedSequence((seed & _SEED_MASK, 11)))
    if minority_classes is None:
        minority = np.sort(rng.choice(k, size=k // 2, replace=False))
    else:
        minority = np.sort(np.asarray(list(minority_classes), dtype=np.int64))
        if minority.size and (minority.min() < 0 or minority.max() >= k):
            raise ValueError("pinned minority class outside the vocabulary")
    minority_set = set(int(c) for c in minority)

    keep = []
    for c in range(k):
        want = n_small if c in minority_set else n_large
        idx = pool.class_indices(c)
        if idx.size < want:
            raise PoolError(
                f"class {pool.vocab.names[c]!r} has {idx.size} records, need {want}",
                class_name=pool.vocab.names[c],
            )
        keep.append(np.sort(rng.choice(idx, size=want, replace=False)))
    train = pool.subset(np.concatenate(keep))
    spec = ScenarioSpec(tuple(int(c) for c in minority), n_small, n_large, seed)
    return train, spec


# ---------------------------------------------------------------------------
# benchmark grid


@dataclass(frozen=True)
class MethodSpec:
    """One row-group of the benchmark: a label, a method kind, a config.

    kind is "none", "reprint", or a baseline name; config is the matching
    config object (None picks defaults).  The cell seed always overrides the
    config's seed.
    """

    label: str
    kind: str
    config: object = None

    def __post_init__(self):
        if self.kind not in ("none", "reprint") + BASELINE_METHODS:
            raise ValueError(f"unknown method kind {self.kind!r}")


@dataclass(frozen=True)
class BenchRow:
    dataset: str
    method: str
    n_small: int
    seed: int
    accuracy: float


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    method: str
    n_small: int
    mean: float
    std: float | None


def _coerce_spec(entry) -> MethodSpec:
    if isinstance(entry, MethodSpec):
        return entry
    return MethodSpec(label=str(entry), kind=str(entry))


def _augment_for(train: LabeledEmbeddingSet, spec: MethodSpec, seed: int) -> SoftLabeledSet | None:
    if spec.kind == "none":
        return None
    if spec.kind == "reprint":
        config = spec.config or ReprintConfig(fixed_rank(5), fixed_rank(5))
        return augment_dataset(train, replace(config, seed=seed))
    config = spec.config or BaselineConfig(method=spec.kind)
    return augment_with_baseline(train, replace(config, method=spec.kind, seed=seed))


def _run_cell(
    pool: LabeledEmbeddingSet,
    test: LabeledEmbeddingSet,
    spec: MethodSpec,
    n_small: int,
    n_large: int,
    seed: int,
    mlp_config: MlpConfig,
    minority_classes,
) -> float:
    train_set, _ = make_scenario(pool, n_small, n_large, seed, minority_classes)
    soft = train_set.to_soft()
    extra = _augment_for(train_set, spec, seed)
    if extra is not None and extra.n:
        soft = merge_soft(soft, extra)
    model = train(soft, replace(mlp_config, seed=seed))
    return evaluate(model, test)


def resolve_max_workers(max_workers: int | None) -> int | None:
    """Explicit argument wins, then the environment cap, then the default."""
    if max_workers is not None:
        return max(1, int(max_workers))
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        return max(1, int(env))
    return None


def run_benchmark(
    pool: LabeledEmbeddingSet,
    test: LabeledEmbeddingSet,
    method_specs,
    n_small_values,
    seeds,
    mlp_config: MlpConfig | None = None,
    n_large: int | None = None,
    dataset_name: str = "synthetic",
    max_workers: int | None = None,
    minority_classes=None,
) -> list[BenchRow]:
    """Run every (method, n_small, seed) cell and return rows in grid order.

    A failing cell aborts the run with an error naming the cell.
    """
    specs = [_coerce_spec(s) for s in method_specs]
    mlp_config = mlp_config or MlpConfig()
    if n_large is None:
        n_large = int(pool.class_counts().min())

    cells = [
        (spec, int(n_small), int(seed))
        for spec in specs
        for n_small in n_small_values
        for seed in seeds
    ]

    def job(cell):
        spec, n_small, seed = cell
        try:
            return _run_cell(
                pool, test, spec, n_small, n_large, seed, mlp_config, minority_classes
            )
        except Exception as exc:
            raise BenchmarkCellError(
                f"cell method={spec.label} n_small={n_small} seed={seed}: {exc}"
            ) from exc

    with ThreadPoolExecutor(max_workers=resolve_max_workers(max_workers)) as pool_exec:
        accuracies = list(pool_exec.map(job, cells))

    return [
        BenchRow(dataset_name, spec.label, n_small, seed, acc)
        for (spec, n_small, seed), acc in zip(cells, accuracies)
    ]


def summarize(rows) -> list[SummaryRow]:
    """Mean and sample std of accuracy over seeds, grouped in row order."""
    groups: dict[tuple, list[float]] = {}
    order = []
    for row in rows:
        key = (row.dataset, row.method, row.n_small)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row.accuracy)
    out = []
    for key in order:
        accs = np.asarray(groups[key], dtype=np.float64)
        std = float(np.std(accs, ddof=1)) if accs.size > 1 else None
        out.append(SummaryRow(key[0], key[1], key[2], float(accs.mean()), std))
    return out


def write_rows_csv(rows, path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["dataset", "method", "n_small", "seed", "accuracy"])
            for row in rows:
                writer.writerow(
                    [row.dataset, row.method, row.n_small, row.seed, repr(row.accuracy)]
                )
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_summary_csv(rows, path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["dataset", "method", "n_small", "mean", "std"])
            for row in summarize(rows):
                std = "" if row.std is None else repr(row.std)
                writer.writerow([row.dataset, row.method, row.n_small, repr(row.mean), std])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# 2-D projection export


def export_2d(named_sets) -> list[tuple[str, float, float]]:
    """Project several vector sets onto the top-2 joint principal directions.

    named_sets is a sequence of (name, (n_i, d) array) pairs; the output is
    one (name, x, y) row per vector, in input order.
    """
    names, blocks = [], []
    for name, vectors in named_sets:
        arr = np.asarray(vectors, dtype=np.float64)
        if arr.ndim != 2:
            raise DimError(f"set {name!r} must be a 2-D array")
        names.append(str(name))
        blocks.append(arr)
    if not blocks:
        raise DegenerateVarianceError("nothing to project")
    dims = {b.shape[1] for b in blocks}
    if len(dims) != 1:
        raise DimError(f"sets disagree on dimension: {sorted(dims)}")

    stacked = np.concatenate(blocks, axis=0)
    centered = stacked - stacked.mean(axis=0)
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    informative = int(np.sum(svals >= 1e-7 * svals[0])) if svals.size and svals[0] > 0 else 0
    if informative < 2:
        raise DegenerateVarianceError(
            f"joint data has numerical rank {informative}, need 2"
        )
    axes = _fix_signs(vt[:2].T)
    coords = centered @ axes

    out, offset = [], 0
    for name, block in zip(names, blocks):
        for i in range(block.shape[0]):
            out.append((name, float(coords[offset + i, 0]), float(coords[offset + i, 1])))
        offset += block.shape[0]
    return out


def write_projection_csv(rows, path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["set", "x", "y"])
            for name, x_val, y_val in rows:
                writer.writerow([name, repr(x_val), repr(y_val)])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# flat config files


def load_config(path) -> dict:
    """Flat JSON object of option overrides for the command line."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path}: config must be a JSON object")
    return data
