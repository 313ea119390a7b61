"""Labeled embedding containers and their on-disk formats.

Two in-memory shapes: hard-labeled sets (one class id per vector) and
soft-labeled sets (a distribution over classes per vector).  Vectors are
stored float32; statistics elsewhere accumulate in float64.

On disk:
  * binary hard container: magic ``EMBV``, little-endian u32 header
    (version, n, d, K), K length-prefixed UTF-8 names, then per record
    a u32 label id and d float32 components.
  * binary soft container: magic ``EMBS``, same header, per record K
    float32 class weights followed by the d float32 components.
  * jsonl: a header line ``{"dim": d, "classes": [...]}`` then one
    ``{"label": name, "vec": [...]}`` object per line.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DimError, FormatError, IoError, VocabError

MAGIC_HARD = b"EMBV"
MAGIC_SOFT = b"EMBS"
FORMAT_VERSION = 1

_SOFT_SUM_TOL = 1e-6


@dataclass(frozen=True)
class ClassVocabulary:
    """Ordered class names; a label id is a position in this tuple."""

    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.names) == 0:
            raise VocabError("vocabulary must declare at least one class")
        if any(not isinstance(n, str) or n == "" for n in self.names):
            raise VocabError("class names must be non-empty strings")
        if len(set(self.names)) != len(self.names):
            raise VocabError("class names must be unique")

    @property
    def num_classes(self) -> int:
        return len(self.names)

    def id_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise VocabError(f"unknown class name {name!r}") from None


def _as_float32_matrix(vectors, dim: int | None) -> np.ndarray:
    arr = np.asarray(vectors, dtype=np.float32)
    if arr.ndim != 2:
        raise DimError(f"vectors must be a 2-D array, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise DimError(f"expected dim {dim}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise DataError("vectors contain non-finite values")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LabeledEmbeddingSet:
    """Immutable (n, d) float32 vectors with one class id per row."""

    vocab: ClassVocabulary
    vectors: np.ndarray
    labels: np.ndarray
    dim: int = field(default=-1)

    def __post_init__(self):
        vecs = _as_float32_matrix(self.vectors, self.dim if self.dim >= 0 else None)
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.shape[0] != vecs.shape[0]:
            raise DimError("labels must be 1-D and match the number of vectors")
        if labels.size and (labels.min() < 0 or labels.max() >= self.vocab.num_classes):
            raise VocabError("label id outside the declared vocabulary")
        labels = labels.copy()
        labels.flags.writeable = False
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dim", int(vecs.shape[1]))

    @property
    def n(self) -> int:
        return int(self.vectors.shape[0])

    def class_indices(self, class_id: int) -> np.ndarray:
        return np.nonzero(self.labels == class_id)[0]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.vocab.num_classes)

    def subset(self, indices) -> "LabeledEmbeddingSet":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledEmbeddingSet(self.vocab, self.vectors[idx], self.labels[idx])

    def to_soft(self) -> "SoftLabeledSet":
        soft = np.zeros((self.n, self.vocab.num_classes), dtype=np.float32)
        if self.n:
            soft[np.arange(self.n), self.labels] = 1.0
        return SoftLabeledSet(self.vocab, self.vectors, soft)


@dataclass(frozen=True)
class SoftLabeledSet:
    """Vectors paired with a float32 distribution over the vocabulary."""

    vocab: ClassVocabulary
    vectors: np.ndarray
    soft_labels: np.ndarray

    def __post_init__(self):
        vecs = _as_float32_matrix(self.vectors, None)
        soft = np.asarray(self.soft_labels, dtype=np.float32)
        if soft.ndim != 2 or soft.shape != (vecs.shape[0], self.vocab.num_classes):
            raise DimError(
                f"soft labels must have shape (n, {self.vocab.num_classes}), got {soft.shape}"
            )
        if not np.all(np.isfinite(soft)):
            raise DataError("soft labels contain non-finite values")
        if soft.size:
            if soft.min() < -_SOFT_SUM_TOL or soft.max() > 1.0 + _SOFT_SUM_TOL:
                raise DataError("soft label entries must lie in [0, 1]")
            sums = soft.sum(axis=1, dtype=np.float64)
            if np.max(np.abs(sums - 1.0)) > _SOFT_SUM_TOL:
                raise DataError("each soft label must sum to 1")
        soft = soft.copy()
        soft.flags.writeable = False
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "soft_labels", soft)

    @property
    def n(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def to_hard(self) -> LabeledEmbeddingSet:
        # np.argmax resolves ties toward the lowest class id
        labels = np.argmax(self.soft_labels, axis=1) if self.n else np.zeros(0, np.int64)
        return LabeledEmbeddingSet(self.vocab, self.vectors, labels)


def merge_soft(first: SoftLabeledSet, *rest: SoftLabeledSet) -> SoftLabeledSet:
    """Concatenate soft sets that share a vocabulary and dimension."""
    for other in rest:
        if other.vocab.names != first.vocab.names:
            raise VocabError("cannot merge sets with different vocabularies")
        if other.dim != first.dim:
            raise DimError("cannot merge sets with different dimensions")
    vecs = np.concatenate([first.vectors] + [s.vectors for s in rest], axis=0)
    soft = np.concatenate([first.soft_labels] + [s.soft_labels for s in rest], axis=0)
    return SoftLabeledSet(first.vocab, vecs, soft)


# ---------------------------------------------------------------------------
# binary containers


def _read_file(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _write_file(path, payload: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _pack_header(magic: bytes, n: int, d: int, names: tuple[str, ...]) -> bytes:
    parts = [struct.pack("<4sIIII", magic, FORMAT_VERSION, n, d, len(names))]
    for name in names:
        raw = name.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
    return b"".join(parts)


class _Cursor:
    def __init__(self, buf: bytes, path):
        self.buf = buf
        self.off = 0
        self.path = path

    def take(self, count: int) -> bytes:
        if self.off + count > len(self.buf):
            raise FormatError(f"{self.path}: truncated container")
        out = self.buf[self.off : self.off + count]
        self.off += count
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def done(self) -> None:
        if self.off != len(self.buf):
            raise FormatError(f"{self.path}: {len(self.buf) - self.off} trailing bytes")


def _parse_header(cur: _Cursor, magic: bytes) -> tuple[int, int, ClassVocabulary]:
    got = cur.take(4)
    if got != magic:
        raise FormatError(f"{cur.path}: bad magic {got!r}, expected {magic!r}")
    version = cur.u32()
    if version != FORMAT_VERSION:
        raise FormatError(f"{cur.path}: unsupported version {version}")
    n, d, k = cur.u32(), cur.u32(), cur.u32()
    names = []
    for _ in range(k):
        length = cur.u32()
        raw = cur.take(length)
        try:
            names.append(raw.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise FormatError(f"{cur.path}: class name is not valid UTF-8") from exc
    return n, d, ClassVocabulary(tuple(names))


def write_hard_binary(dataset: LabeledEmbeddingSet, path) -> None:
    header = _pack_header(MAGIC_HARD, dataset.n, dataset.dim, dataset.vocab.names)
    rec = np.empty(dataset.n, dtype=[("label", "<u4"), ("vec", "<f4", (dataset.dim,))])
    rec["label"] = dataset.labels
    rec["vec"] = dataset.vectors
    _write_file(path, header + rec.tobytes())


def read_hard_binary(path) -> LabeledEmbeddingSet:
    cur = _Cursor(_read_file(path), path)
    n, d, vocab = _parse_header(cur, MAGIC_HARD)
    rec_dtype = np.dtype([("label", "<u4"), ("vec", "<f4", (d,))])
    raw = cur.take(n * rec_dtype.itemsize)
    cur.done()
    rec = np.frombuffer(raw, dtype=rec_dtype)
    labels = rec["label"].astype(np.int64)
    if labels.size and labels.max() >= vocab.num_classes:
        raise VocabError(f"{path}: label id {labels.max()} outside vocabulary")
    vectors = rec["vec"].reshape(n, d)
    return LabeledEmbeddingSet(vocab, vectors, labels)


def write_soft_binary(dataset: SoftLabeledSet, path) -> None:
    k = dataset.vocab.num_classes
    header = _pack_header(MAGIC_SOFT, dataset.n, dataset.dim, dataset.vocab.names)
    rec = np.empty(dataset.n, dtype=[("soft", "<f4", (k,)), ("vec", "<f4", (dataset.dim,))])
    rec["soft"] = dataset.soft_labels
    rec["vec"] = dataset.vectors
    _write_file(path, header + rec.tobytes())


def read_soft_binary(path) -> SoftLabeledSet:
    cur = _Cursor(_read_file(path), path)
    n, d, vocab = _parse_header(cur, MAGIC_SOFT)
    k = vocab.num_classes
    rec_dtype = np.dtype([("soft", "<f4", (k,)), ("vec", "<f4", (d,))])
    raw = cur.take(n * rec_dtype.itemsize)
    cur.done()
    rec = np.frombuffer(raw, dtype=rec_dtype)
    return SoftLabeledSet(vocab, rec["vec"].reshape(n, d), rec["soft"].reshape(n, k))


# ---------------------------------------------------------------------------
# jsonl


def write_hard_jsonl(dataset: LabeledEmbeddingSet, path) -> None:
    lines = [json.dumps({"dim": dataset.dim, "classes": list(dataset.vocab.names)})]
    for label, vec in zip(dataset.labels, dataset.vectors):
        lines.append(
            json.dumps({"label": dataset.vocab.names[label], "vec": [float(v) for v in vec]})
        )
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_hard_jsonl(path) -> LabeledEmbeddingSet:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise FormatError(f"{path}: missing jsonl header line")

    def parse(line: str, lineno: int) -> dict:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}:{lineno}: invalid JSON") from exc
        if not isinstance(obj, dict):
            raise FormatError(f"{path}:{lineno}: expected an object")
        return obj

    header = parse(lines[0], 1)
    if "dim" not in header or "classes" not in header:
        raise FormatError(f"{path}: header must declare dim and classes")
    dim = header["dim"]
    if not isinstance(dim, int) or dim < 0:
        raise FormatError(f"{path}: dim must be a non-negative integer")
    if not isinstance(header["classes"], list):
        raise FormatError(f"{path}: classes must be a list")
    vocab = ClassVocabulary(tuple(header["classes"]))

    labels, rows = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        obj = parse(line, lineno)
        if "label" not in obj or "vec" not in obj:
            raise FormatError(f"{path}:{lineno}: record needs label and vec")
        labels.append(vocab.id_of(obj["label"]))
        vec = obj["vec"]
        if not isinstance(vec, list) or len(vec) != dim:
            raise FormatError(f"{path}:{lineno}: vec must be a list of {dim} numbers")
        rows.append(vec)
    vectors = np.asarray(rows, dtype=np.float32).reshape(len(rows), dim)
    return LabeledEmbeddingSet(vocab, vectors, np.asarray(labels, dtype=np.int64))


# ---------------------------------------------------------------------------
# format dispatch


def write_embeddings(dataset: LabeledEmbeddingSet, path, fmt: str = "binary") -> None:
    if fmt == "binary":
        write_hard_binary(dataset, path)
    elif fmt == "jsonl":
        write_hard_jsonl(dataset, path)
    else:
        raise FormatError(f"unknown format {fmt!r}")


def read_embeddings(path, fmt: str = "binary") -> LabeledEmbeddingSet:
    if fmt == "binary":
        return read_hard_binary(path)
    if fmt == "jsonl":
        return read_hard_jsonl(path)
    raise FormatError(f"unknown format {fmt!r}")


def read_any_binary(path) -> LabeledEmbeddingSet | SoftLabeledSet:
    """Sniff the magic and return whichever container the file holds."""
    head = _read_file(path)[:4]
    if head == MAGIC_HARD:
        return read_hard_binary(path)
    if head == MAGIC_SOFT:
        return read_soft_binary(path)
    raise FormatError(f"{path}: bad magic {head!r}")
