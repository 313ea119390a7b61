"""Small feed-forward softmax classifier trained on soft labels.

Pure numpy, float64 parameters, ReLU hidden layers, cross-entropy against
the full label distribution.  Deliberately minimal: just enough model to
measure what an augmentation method buys.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataError,
    DimError,
    DivergenceError,
    EmptyTestError,
    FormatError,
    IoError,
    VocabError,
)
from .store import ClassVocabulary, LabeledEmbeddingSet, SoftLabeledSet, _Cursor

_SEED_MASK = (1 << 64) - 1

MODEL_MAGIC = b"MLP1"
MODEL_VERSION = 1

OPTIMIZERS = ("adam", "sgd")


@dataclass(frozen=True)
class MlpConfig:
    hidden: tuple[int, ...] = (128,)
    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 30
    optimizer: str = "adam"
    weight_decay: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if any(h < 1 for h in self.hidden):
            raise ValueError("hidden sizes must be >= 1")
        if self.learning_rate <= 0.0:
            raise ValueError("learning rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.weight_decay < 0.0:
            raise ValueError("weight decay must be >= 0")


@dataclass(frozen=True)
class MlpModel:
    vocab: ClassVocabulary
    dim: int
    weights: tuple[np.ndarray, ...]  # layer l: (fan_in, fan_out) float64
    biases: tuple[np.ndarray, ...]   # layer l: (fan_out,) float64
    loss_history: tuple[float, ...] = ()

    @property
    def final_loss(self) -> float:
        return self.loss_history[-1] if self.loss_history else float("nan")


def init_params(dim: int, hidden: tuple[int, ...], num_classes: int, seed: int):
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases."""
    rng = np.random.default_rng(seed & _SEED_MASK)
    sizes = [dim, *hidden, num_classes]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = 1.0 / np.sqrt(fan_in) if fan_in > 0 else 1.0
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _forward(weights, biases, x):
    """Return the per-layer inputs (post-activation) and the final logits."""
    layer_inputs = [x]
    h = x
    for w, b in zip(weights[:-1], biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
        layer_inputs.append(h)
    logits = h @ weights[-1] + biases[-1]
    return layer_inputs, logits


def _log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def loss_and_grads(weights, biases, x, y, weight_decay: float = 0.0):
    """Mean soft-label cross-entropy (+ L2 penalty) and its gradients."""
    batch = x.shape[0]
    layer_inputs, logits = _forward(weights, biases, x)
    logp = _log_softmax(logits)
    loss = -float(np.sum(y * logp) / batch)
    if weight_decay:
        loss += 0.5 * weight_decay * sum(float(np.sum(w * w)) for w in weights)

    probs = np.exp(logp)
    delta = (probs - y) / batch
    grad_w = [None] * len(weights)
    grad_b = [None] * len(biases)
    for layer in range(len(weights) - 1, -1, -1):
        grad_w[layer] = layer_inputs[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if weight_decay:
            grad_w[layer] = grad_w[layer] + weight_decay * weights[layer]
        if layer > 0:
            delta = (delta @ weights[layer].T) * (layer_inputs[layer] > 0.0)
    return loss, grad_w, grad_b


def train(dataset: SoftLabeledSet, config: MlpConfig) -> MlpModel:
    """Mini-batch training with a fresh shuffle each epoch.

    The recorded history holds one mean epoch loss per epoch.  A non-finite
    loss aborts with the offending epoch in the error.
    """
    if dataset.n == 0:
        raise DataError("cannot train on an empty set")
    x = dataset.vectors.astype(np.float64)
    y = dataset.soft_labels.astype(np.float64)
    k = dataset.vocab.num_classes
    weights, biases = init_params(dataset.dim, config.hidden, k, config.seed)

    rng = np.random.default_rng((config.seed & _SEED_MASK) + 1)
    lr = config.learning_rate
    adam = config.optimizer == "adam"
    if adam:
        m_w = [np.zeros_like(w) for w in weights]
        v_w = [np.zeros_like(w) for w in weights]
        m_b = [np.zeros_like(b) for b in biases]
        v_b = [np.zeros_like(b) for b in biases]
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        step = 0

    history = []
    n = dataset.n
    for epoch in range(config.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            sel = perm[start : start + config.batch_size]
            loss, grad_w, grad_b = loss_and_grads(
                weights, biases, x[sel], y[sel], config.weight_decay
            )
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"non-finite loss {loss} at epoch {epoch}", epoch=epoch
                )
            epoch_loss += loss * sel.size
            if adam:
                step += 1
                c1 = 1.0 - beta1**step
                c2 = 1.0 - beta2**step
                for layer in range(len(weights)):
                    m_w[layer] = beta1 * m_w[layer] + (1 - beta1) * grad_w[layer]
                    v_w[layer] = beta2 * v_w[layer] + (1 - beta2) * grad_w[layer] ** 2
                    weights[layer] = weights[layer] - lr * (m_w[layer] / c1) / (
                        np.sqrt(v_w[layer] / c2) + eps
                    )
                    m_b[layer] = beta1 * m_b[layer] + (1 - beta1) * grad_b[layer]
                    v_b[layer] = beta2 * v_b[layer] + (1 - beta2) * grad_b[layer] ** 2
                    biases[layer] = biases[layer] - lr * (m_b[layer] / c1) / (
                        np.sqrt(v_b[layer] / c2) + eps
                    )
            else:
                for layer in range(len(weights)):
                    weights[layer] = weights[layer] - lr * grad_w[layer]
                    biases[layer] = biases[layer] - lr * grad_b[layer]
        history.append(epoch_loss / n)

    return MlpModel(
        vocab=dataset.vocab,
        dim=dataset.dim,
        weights=tuple(weights),
        biases=tuple(biases),
        loss_history=tuple(history),
    )


def predict_proba(model: MlpModel, vectors) -> np.ndarray:
    """Class probabilities for a (n, d) batch of vectors."""
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.dim:
        raise DimError(f"expected vectors of shape (n, {model.dim}), got {x.shape}")
    _, logits = _forward(model.weights, model.biases, x)
    return np.exp(_log_softmax(logits))


def predict(model: MlpModel, vectors) -> np.ndarray:
    # argmax resolves ties toward the lowest class id
    return np.argmax(predict_proba(model, vectors), axis=1)


def evaluate(model: MlpModel, test: LabeledEmbeddingSet) -> float:
    """Plain accuracy on a hard-labeled test set."""
    if test.n == 0:
        raise EmptyTestError("test set is empty")
    if test.vocab.names != model.vocab.names:
        raise VocabError("test vocabulary differs from the model's")
    preds = predict(model, test.vectors)
    return float(np.mean(preds == test.labels))


def save_model(model: MlpModel, path) -> None:
    parts = [struct.pack("<4sIII", MODEL_MAGIC, MODEL_VERSION, model.dim, model.vocab.num_classes)]
    for name in model.vocab.names:
        raw = name.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
    parts.append(struct.pack("<I", len(model.weights)))
    for w, b in zip(model.weights, model.biases):
        parts.append(struct.pack("<II", w.shape[0], w.shape[1]))
        parts.append(w.astype("<f4").tobytes())
        parts.append(b.astype("<f4").tobytes())
    try:
        with open(path, "wb") as fh:
            fh.write(b"".join(parts))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_model(path) -> MlpModel:
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    cur = _Cursor(buf, path)
    magic = cur.take(4)
    if magic != MODEL_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    version = cur.u32()
    if version != MODEL_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    dim, k = cur.u32(), cur.u32()
    names = []
    for _ in range(k):
        length = cur.u32()
        names.append(cur.take(length).decode("utf-8"))
    n_layers = cur.u32()
    weights, biases = [], []
    expect = dim
    for _ in range(n_layers):
        rows, cols = cur.u32(), cur.u32()
        if rows != expect:
            raise FormatError(f"{path}: layer shapes do not chain")
        w = np.frombuffer(cur.take(rows * cols * 4), dtype="<f4").astype(np.float64)
        b = np.frombuffer(cur.take(cols * 4), dtype="<f4").astype(np.float64)
        weights.append(w.reshape(rows, cols))
        biases.append(b)
        expect = cols
    cur.done()
    if expect != k:
        raise FormatError(f"{path}: final layer width {expect} != {k} classes")
    return MlpModel(
        vocab=ClassVocabulary(tuple(names)),
        dim=dim,
        weights=tuple(weights),
        biases=tuple(biases),
    )
