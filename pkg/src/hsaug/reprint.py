"""Cross-class extrapolation in embedding space.

For every ordered pair of distinct classes (source, target) and every source
record x, one synthetic example is built from a randomly drawn target record
x_J:

    new = (x - mu_s) - proj_s(x - mu_s) + proj_t(x_J - mu_t) + mu_t

i.e. the part of x the source subspace cannot explain, re-dressed with the
in-subspace part of a target example and moved to the target mean.  The soft
label splits mass between source and target class; several weighting
strategies are provided, gated on both energies being positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyClassError
from .geometry import ClassGeometry, RankPolicy, center, fit_all_geometries, project, residual
from .store import LabeledEmbeddingSet, SoftLabeledSet

LABEL_STRATEGIES = (
    "literal_determinant",
    "pseudo_determinant",
    "trace_ratio",
    "residual_energy",
)

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ReprintConfig:
    source_policy: RankPolicy
    target_policy: RankPolicy
    label_strategy: str = "residual_energy"
    positivity_epsilon: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.label_strategy not in LABEL_STRATEGIES:
            raise ValueError(f"unknown label strategy {self.label_strategy!r}")
        if self.positivity_epsilon < 0.0:
            raise ValueError("positivity epsilon must be >= 0")


@dataclass(frozen=True)
class AugmentedExample:
    vector: np.ndarray       # (d,) float32
    soft_label: np.ndarray   # (K,) float32
    source_class: int
    target_class: int
    source_index: int        # position within the source class
    candidate_index: int     # position within the target class

    def __post_init__(self):
        total = float(np.sum(self.soft_label, dtype=np.float64))
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"soft label sums to {total}, expected 1")


def pair_rng(seed: int, source_class: int, target_class: int, index: int) -> np.random.Generator:
    """Counter-keyed generator: one stream per (pair, source record).

    Keying on the coordinates instead of drawing from a shared stream makes
    every example's randomness independent of iteration or worker order.
    """
    key = (seed & _SEED_MASK, source_class, target_class, index)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def sample_candidate(
    target_geometry: ClassGeometry, target_vectors: np.ndarray, rng: np.random.Generator
) -> tuple[int, np.ndarray]:
    """Draw a uniform target record and return (index, centered vector)."""
    n_t = target_vectors.shape[0]
    if n_t == 0:
        raise EmptyClassError(f"class {target_geometry.class_id} has no records")
    j = int(rng.integers(n_t))
    return j, center(target_geometry, target_vectors[j])


def extrapolate(
    source_geometry: ClassGeometry,
    target_geometry: ClassGeometry,
    x_source,
    candidate_centered,
) -> np.ndarray:
    """Swap the source in-subspace part for the candidate's target part."""
    res = residual(source_geometry, center(source_geometry, x_source))
    if target_geometry.rank == 0:
        return res + target_geometry.mean
    return res + project(target_geometry, candidate_centered) + target_geometry.mean


def refine_label(
    source_geometry: ClassGeometry,
    target_geometry: ClassGeometry,
    source_centered,
    candidate_centered,
    num_classes: int,
    strategy: str = "residual_energy",
    epsilon: float = 0.0,
) -> np.ndarray:
    """Soft label for one synthetic example.

    Mass lambda goes to the source class and 1 - lambda to the target class,
    but only when both the off-subspace energy of the source vector and the
    in-subspace energy of the candidate exceed epsilon; otherwise all mass
    goes to the target class.
    """
    if strategy not in LABEL_STRATEGIES:
        raise ValueError(f"unknown label strategy {strategy!r}")
    label = np.zeros(num_classes, dtype=np.float64)

    res_s = residual(source_geometry, source_centered)
    proj_t = project(target_geometry, candidate_centered)
    energy_s = float(res_s @ res_s)
    energy_t = float(proj_t @ proj_t)
    if not (energy_s > epsilon and energy_t > epsilon):
        label[target_geometry.class_id] = 1.0
        return label

    d = source_geometry.dim
    h, q = source_geometry.rank, target_geometry.rank
    if strategy == "literal_determinant":
        # det(I - A A^T) is 0 once any direction is kept; det(A A^T) is 0
        # until the subspace fills the whole space
        weight_s = 1.0 if h == 0 else 0.0
        weight_t = 1.0 if q == d else 0.0
    elif strategy == "pseudo_determinant":
        # products of the nonzero eigenvalues, which are all 1
        weight_s, weight_t = 1.0, 1.0
    elif strategy == "trace_ratio":
        weight_s, weight_t = float(d - h), float(q)
    else:
        weight_s, weight_t = energy_s, energy_t

    denom = weight_s + weight_t
    if denom <= 0.0:
        label[target_geometry.class_id] = 1.0
        return label
    lam = weight_s / denom
    label[source_geometry.class_id] += lam
    label[target_geometry.class_id] += 1.0 - lam
    return label


def augment_examples(
    dataset: LabeledEmbeddingSet, config: ReprintConfig
) -> list[AugmentedExample]:
    """One synthetic example per (ordered class pair, source record).

    Iteration is ascending in (source, target, record position); the output
    depends only on the config seed and the dataset, never on scheduling.
    """
    source_geos = fit_all_geometries(dataset, config.source_policy)
    target_geos = fit_all_geometries(dataset, config.target_policy)
    class_vectors = {
        c: dataset.vectors[dataset.class_indices(c)]
        for c in range(dataset.vocab.num_classes)
    }
    k = dataset.vocab.num_classes

    out: list[AugmentedExample] = []
    for c_s in range(k):
        geo_s = source_geos[c_s]
        for c_t in range(k):
            if c_t == c_s:
                continue
            geo_t = target_geos[c_t]
            for i, x in enumerate(class_vectors[c_s]):
                rng = pair_rng(config.seed, c_s, c_t, i)
                j, cand = sample_candidate(geo_t, class_vectors[c_t], rng)
                vec = extrapolate(geo_s, geo_t, x, cand)
                soft = refine_label(
                    geo_s,
                    geo_t,
                    center(geo_s, x),
                    cand,
                    k,
                    config.label_strategy,
                    config.positivity_epsilon,
                )
                out.append(
                    AugmentedExample(
                        vector=vec.astype(np.float32),
                        soft_label=soft.astype(np.float32),
                        source_class=c_s,
                        target_class=c_t,
                        source_index=i,
                        candidate_index=j,
                    )
                )
    return out


def augment_dataset(dataset: LabeledEmbeddingSet, config: ReprintConfig) -> SoftLabeledSet:
    """Assemble the synthetic examples into a soft-labeled set."""
    examples = augment_examples(dataset, config)
    vectors = np.stack([e.vector for e in examples]) if examples else np.zeros((0, dataset.dim), np.float32)
    soft = np.stack([e.soft_label for e in examples]) if examples else np.zeros((0, dataset.vocab.num_classes), np.float32)
    return SoftLabeledSet(dataset.vocab, vectors, soft)
