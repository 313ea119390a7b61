"""Gradient correctness, training behavior, and model serialization."""

import numpy as np
import pytest

from hsaug import (
    ClassVocabulary,
    DataError,
    DimError,
    DivergenceError,
    EmptyTestError,
    FormatError,
    LabeledEmbeddingSet,
    MlpConfig,
    MlpModel,
    SoftLabeledSet,
    VocabError,
    evaluate,
    load_model,
    predict,
    predict_proba,
    save_model,
    train,
)
from hsaug.classifier import init_params, loss_and_grads


def soft_batch(rng, n=7, d=4, k=3):
    x = rng.standard_normal((n, d))
    y = rng.random((n, k))
    y /= y.sum(axis=1, keepdims=True)
    return x, y


def blob_set(rng, means, per_class, d, scale=1.0):
    vocab = ClassVocabulary(tuple(f"b{i}" for i in range(len(means))))
    blocks, labels = [], []
    for c, mu in enumerate(means):
        blocks.append(mu + scale * rng.standard_normal((per_class, d)))
        labels.extend([c] * per_class)
    vecs = np.concatenate(blocks).astype(np.float32)
    return LabeledEmbeddingSet(vocab, vecs, np.array(labels))


# --- gradients ---------------------------------------------------------------


def numeric_grad(weights, biases, x, y, wd, where, index, eps=1e-6):
    kind, layer = where
    params = weights if kind == "w" else biases
    original = params[layer].copy()
    params[layer].flat[index] = original.flat[index] + eps
    up, _, _ = loss_and_grads(weights, biases, x, y, wd)
    params[layer].flat[index] = original.flat[index] - eps
    down, _, _ = loss_and_grads(weights, biases, x, y, wd)
    params[layer] = original
    return (up - down) / (2 * eps)


@pytest.mark.parametrize("wd", [0.0, 0.01])
def test_gradients_match_finite_differences(wd):
    rng = np.random.default_rng(0)
    x, y = soft_batch(rng)
    weights, biases = init_params(4, (5,), 3, seed=1)
    _, grad_w, grad_b = loss_and_grads(weights, biases, x, y, wd)
    worst = 0.0
    for layer in range(len(weights)):
        for index in range(weights[layer].size):
            num = numeric_grad(weights, biases, x, y, wd, ("w", layer), index)
            got = grad_w[layer].flat[index]
            worst = max(worst, abs(num - got) / max(abs(num) + abs(got), 1e-8))
        for index in range(biases[layer].size):
            num = numeric_grad(weights, biases, x, y, wd, ("b", layer), index)
            got = grad_b[layer].flat[index]
            worst = max(worst, abs(num - got) / max(abs(num) + abs(got), 1e-8))
    assert worst <= 1e-4


def test_gradients_without_hidden_layer():
    rng = np.random.default_rng(1)
    x, y = soft_batch(rng, n=5, d=3, k=2)
    weights, biases = init_params(3, (), 2, seed=2)
    _, grad_w, _ = loss_and_grads(weights, biases, x, y, 0.0)
    for index in range(weights[0].size):
        num = numeric_grad(weights, biases, x, y, 0.0, ("w", 0), index)
        got = grad_w[0].flat[index]
        assert abs(num - got) / max(abs(num) + abs(got), 1e-8) <= 1e-4


# --- training ------------------------------------------------------------------


def test_training_is_bitwise_deterministic():
    rng = np.random.default_rng(2)
    ds = blob_set(rng, [np.zeros(5), np.ones(5)], 30, 5).to_soft()
    config = MlpConfig(hidden=(8,), epochs=5, batch_size=16, seed=7)
    a = train(ds, config)
    b = train(ds, config)
    assert a.loss_history == b.loss_history
    for wa, wb in zip(a.weights, b.weights):
        assert np.array_equal(wa, wb)
    c = train(ds, MlpConfig(hidden=(8,), epochs=5, batch_size=16, seed=8))
    assert a.loss_history != c.loss_history


def test_loss_decreases_with_both_optimizers():
    rng = np.random.default_rng(3)
    ds = blob_set(rng, [np.zeros(4), 2 * np.ones(4)], 40, 4).to_soft()
    for optimizer in ("adam", "sgd"):
        model = train(ds, MlpConfig(epochs=10, optimizer=optimizer, learning_rate=1e-2, seed=1))
        assert model.loss_history[-1] < model.loss_history[0]
        assert model.final_loss == model.loss_history[-1]


def test_separable_blobs_reach_perfect_train_accuracy():
    rng = np.random.default_rng(4)
    means = [np.zeros(6), np.full(6, 8.0), np.r_[np.full(3, -8.0), np.zeros(3)]]
    ds = blob_set(rng, means, 50, 6)
    model = train(ds.to_soft(), MlpConfig(epochs=60, seed=0))
    assert evaluate(model, ds) == 1.0


def test_divergence_is_reported_with_epoch():
    rng = np.random.default_rng(5)
    ds = blob_set(rng, [np.zeros(3), np.ones(3)], 20, 3).to_soft()
    config = MlpConfig(
        hidden=(4,), epochs=3, batch_size=8, optimizer="sgd",
        learning_rate=1.0, weight_decay=1e200, seed=0,
    )
    with np.errstate(over="ignore", invalid="ignore"), pytest.raises(DivergenceError) as info:
        train(ds, config)
    assert info.value.epoch is not None


def test_empty_training_set_is_an_error():
    vocab = ClassVocabulary(("a", "b"))
    empty = SoftLabeledSet(vocab, np.zeros((0, 3), np.float32), np.zeros((0, 2), np.float32))
    with pytest.raises(DataError):
        train(empty, MlpConfig())


def test_config_validation():
    with pytest.raises(ValueError):
        MlpConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        MlpConfig(batch_size=0)
    with pytest.raises(ValueError):
        MlpConfig(optimizer="rmsprop")
    with pytest.raises(ValueError):
        MlpConfig(hidden=(0,))


# --- prediction and evaluation ---------------------------------------------------


def hand_model(d=3):
    # logits equal the inputs: prediction is the argmax coordinate
    vocab = ClassVocabulary(tuple(f"k{i}" for i in range(d)))
    return MlpModel(
        vocab=vocab,
        dim=d,
        weights=(np.eye(d),),
        biases=(np.zeros(d),),
    )


def test_predict_proba_is_a_distribution():
    rng = np.random.default_rng(6)
    model = hand_model()
    probs = predict_proba(model, rng.standard_normal((10, 3)))
    assert np.all(probs >= 0)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_predict_ties_break_low():
    model = hand_model()
    assert predict(model, np.zeros((1, 3)))[0] == 0


def test_evaluate_against_hand_model():
    model = hand_model()
    vecs = np.array([[5, 0, 0], [0, 5, 0], [0, 0, 5], [5, 0, 0]], dtype=np.float32)
    test = LabeledEmbeddingSet(model.vocab, vecs, np.array([0, 1, 2, 1]))
    assert evaluate(model, test) == pytest.approx(0.75)


def test_evaluate_errors():
    model = hand_model()
    empty = LabeledEmbeddingSet(model.vocab, np.zeros((0, 3), np.float32), np.zeros(0, np.int64))
    with pytest.raises(EmptyTestError):
        evaluate(model, empty)
    other = LabeledEmbeddingSet(
        ClassVocabulary(("x", "y", "z")), np.zeros((1, 3), np.float32), np.array([0])
    )
    with pytest.raises(VocabError):
        evaluate(model, other)
    with pytest.raises(DimError):
        predict_proba(model, np.zeros((2, 4)))


# --- serialization -----------------------------------------------------------------


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    ds = blob_set(rng, [np.zeros(4), np.ones(4) * 3], 25, 4)
    model = train(ds.to_soft(), MlpConfig(hidden=(6,), epochs=8, seed=3))
    path = tmp_path / "model.mlp"
    save_model(model, path)
    back = load_model(path)
    assert back.vocab.names == model.vocab.names
    assert back.dim == model.dim
    probe = rng.standard_normal((12, 4))
    # weights pass through float32, so predictions agree to that precision
    assert np.allclose(predict_proba(back, probe), predict_proba(model, probe), atol=1e-5)
    save_model(back, tmp_path / "again.mlp")
    assert (tmp_path / "again.mlp").read_bytes() == path.read_bytes()


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.mlp"
    path.write_bytes(b"WHAT" + b"\x00" * 20)
    with pytest.raises(FormatError):
        load_model(path)
    save_model(hand_model(), path)
    raw = path.read_bytes()
    (tmp_path / "cut.mlp").write_bytes(raw[:-2])
    with pytest.raises(FormatError):
        load_model(tmp_path / "cut.mlp")
