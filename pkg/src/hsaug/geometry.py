"""Per-class principal subspaces.

Each class gets a mean vector and an orthonormal basis of its top principal
directions, fitted by thin SVD of the centered class matrix in float64.
Projection onto the subspace spanned by basis A is A (A^T x); the residual
is x minus that projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVarianceError, DimError, EmptyClassError
from .store import LabeledEmbeddingSet

# relative singular value below which a direction counts as numerically null
_RANK_RTOL = 1e-7


@dataclass(frozen=True)
class RankPolicy:
    """How many principal components to keep for a class."""

    kind: str
    rank: int = 0
    threshold: float = 0.0

    def __post_init__(self):
        if self.kind == "fixed_rank":
            if self.rank < 0:
                raise ValueError("fixed rank must be >= 0")
        elif self.kind == "explained_variance":
            if not 0.0 < self.threshold <= 1.0:
                raise ValueError("variance threshold must be in (0, 1]")
        else:
            raise ValueError(f"unknown rank policy {self.kind!r}")


def fixed_rank(rank: int) -> RankPolicy:
    return RankPolicy("fixed_rank", rank=rank)


def explained_variance(threshold: float) -> RankPolicy:
    return RankPolicy("explained_variance", threshold=threshold)


@dataclass(frozen=True)
class ClassGeometry:
    """Mean and top-h principal directions of one class."""

    class_id: int
    mean: np.ndarray            # (d,) float64
    components: np.ndarray      # (d, h) float64, orthonormal columns
    singular_values: np.ndarray  # (h,) float64, descending
    n_records: int
    total_variance: float       # sum of all eigenvalues, not just the kept ones

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    @property
    def rank(self) -> int:
        return int(self.components.shape[1])


def _fix_signs(components: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive.

    Ties pick the lowest index, so the convention is deterministic.
    """
    if components.size == 0:
        return components
    lead = np.argmax(np.abs(components), axis=0)
    signs = np.sign(components[lead, np.arange(components.shape[1])])
    signs[signs == 0] = 1.0
    return components * signs


def fit_class_geometry(
    dataset: LabeledEmbeddingSet, class_id: int, policy: RankPolicy
) -> ClassGeometry:
    """Fit the mean and principal subspace of one class.

    The requested rank is clamped to the numerical rank of the centered
    class matrix, which itself is at most min(n_c, d).
    """
    idx = dataset.class_indices(class_id)
    if idx.size == 0:
        name = dataset.vocab.names[class_id] if 0 <= class_id < dataset.vocab.num_classes else class_id
        raise EmptyClassError(f"class {name!r} has no records")
    x = dataset.vectors[idx].astype(np.float64)
    n_c = x.shape[0]
    mean = x.mean(axis=0)
    centered = x - mean

    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    sumsq = float(np.sum(svals**2))
    total_variance = sumsq / (n_c - 1) if n_c > 1 else 0.0

    if svals.size == 0 or svals[0] <= 0.0:
        num_rank = 0
    else:
        num_rank = int(np.sum(svals >= _RANK_RTOL * svals[0]))

    if policy.kind == "fixed_rank":
        requested = policy.rank
    else:
        if sumsq == 0.0:
            requested = 0
        else:
            cumulative = np.cumsum(svals**2) / sumsq
            hits = np.nonzero(cumulative >= policy.threshold)[0]
            requested = int(hits[0]) + 1 if hits.size else svals.size

    rank = min(requested, num_rank)
    components = _fix_signs(vt[:rank].T.copy())
    components.flags.writeable = False
    mean.flags.writeable = False
    kept = svals[:rank].copy()
    kept.flags.writeable = False
    return ClassGeometry(
        class_id=class_id,
        mean=mean,
        components=components,
        singular_values=kept,
        n_records=n_c,
        total_variance=total_variance,
    )


def fit_all_geometries(
    dataset: LabeledEmbeddingSet, policy: RankPolicy
) -> dict[int, ClassGeometry]:
    return {
        c: fit_class_geometry(dataset, c, policy)
        for c in range(dataset.vocab.num_classes)
    }


def _check_dim(geometry: ClassGeometry, x: np.ndarray) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != (geometry.dim,):
        raise DimError(f"expected a vector of dim {geometry.dim}, got shape {arr.shape}")
    return arr


def center(geometry: ClassGeometry, x) -> np.ndarray:
    """Subtract the class mean from a raw vector."""
    return _check_dim(geometry, x) - geometry.mean


def project(geometry: ClassGeometry, centered) -> np.ndarray:
    """Project a centered vector onto the class subspace: A (A^T x)."""
    arr = _check_dim(geometry, centered)
    if geometry.rank == 0:
        return np.zeros_like(arr)
    if geometry.rank == geometry.dim:
        return arr.copy()
    return geometry.components @ (geometry.components.T @ arr)


def residual(geometry: ClassGeometry, centered) -> np.ndarray:
    """Component of a centered vector orthogonal to the class subspace."""
    arr = _check_dim(geometry, centered)
    if geometry.rank == 0:
        return arr.copy()
    if geometry.rank == geometry.dim:
        return np.zeros_like(arr)
    return arr - geometry.components @ (geometry.components.T @ arr)


def eigenvalues(geometry: ClassGeometry) -> np.ndarray:
    """Sample covariance eigenvalues of the kept directions."""
    if geometry.n_records < 2:
        return np.zeros_like(geometry.singular_values)
    return geometry.singular_values**2 / (geometry.n_records - 1)


def explained_variance_ratios(geometry: ClassGeometry) -> np.ndarray:
    """Per-component share of the class's total variance."""
    if geometry.total_variance <= 0.0:
        raise DegenerateVarianceError(
            f"class {geometry.class_id} has zero total variance"
        )
    return eigenvalues(geometry) / geometry.total_variance
