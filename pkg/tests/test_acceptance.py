"""End-to-end acceptance checks, one per shipped guarantee.

Each test prints a single "ACCEPTANCE <name>: PASS/FAIL" line on the real
terminal and enforces its own wall-clock budget.
"""

import time
from contextlib import contextmanager

import numpy as np
from scipy.linalg import subspace_angles

from hsaug import (
    BaselineConfig,
    ClassVocabulary,
    LabeledEmbeddingSet,
    MethodSpec,
    MlpConfig,
    ReprintConfig,
    SynthSpec,
    augment_dataset,
    augment_examples,
    augment_with_baseline,
    center,
    explained_variance,
    fit_class_geometry,
    fixed_rank,
    ge3,
    make_scenario,
    nearest_same_class,
    predict,
    project,
    refine_label,
    residual,
    run_benchmark,
    summarize,
    synth_dataset,
    train,
    write_rows_csv,
    write_summary_csv,
)
from hsaug.classifier import init_params, loss_and_grads

# Shared benchmark setting: 4 anisotropic Gaussian classes whose identity
# lives in 4 strong planted directions over a weak isotropic tail, so that
# 16-record minorities under-cover the class structure.
EXPERIMENT = dict(
    spec=SynthSpec(
        num_classes=4,
        dim=32,
        mean_scale=0.0,
        spectrum=(150.0, 130.0, 110.0, 90.0) + (1.0,) * 28,
        train_per_class=500,
        test_per_class=250,
        seed=2024,
    ),
    n_small=16,
    n_large=500,
    seeds=(0, 1, 2, 3, 4),
)
REPRINT_55 = ReprintConfig(fixed_rank(5), fixed_rank(5))


@contextmanager
def criterion(name, capsys, budget_seconds=None):
    start = time.monotonic()
    try:
        yield
        elapsed = time.monotonic() - start
        if budget_seconds is not None:
            assert elapsed < budget_seconds, f"{name} took {elapsed:.1f}s"
    except BaseException:
        with capsys.disabled():
            print(f"\nACCEPTANCE {name}: FAIL")
        raise
    with capsys.disabled():
        print(f"\nACCEPTANCE {name}: PASS ({elapsed:.1f}s)")


def random_dataset(rng, num_classes, d, low, high):
    counts = rng.integers(low, high + 1, size=num_classes)
    vocab = ClassVocabulary(tuple(f"c{i}" for i in range(num_classes)))
    blocks, labels = [], []
    for c, n in enumerate(counts):
        blocks.append(rng.standard_normal((n, d)) + rng.standard_normal(d))
        labels.extend([c] * int(n))
    vecs = np.concatenate(blocks).astype(np.float32)
    return LabeledEmbeddingSet(vocab, vecs, np.array(labels))


def test_reduction_suite(capsys):
    # rank 0 collapses to plain mean-shift transfer; full rank collapses to
    # resampling the target originals, both bitwise
    with criterion("reduction_suite", capsys, budget_seconds=10):
        rng = np.random.default_rng(11)
        for trial in range(20):
            k = int(rng.integers(2, 6))
            d = int(rng.integers(2, 33))
            ds = random_dataset(rng, k, d, d + 2, d + 10)

            zero = augment_dataset(ds, ReprintConfig(fixed_rank(0), fixed_rank(0), seed=trial))
            plain = ge3(ds)
            assert zero.vectors.tobytes() == plain.vectors.tobytes()
            assert zero.soft_labels.tobytes() == plain.soft_labels.tobytes()

            full_policy = explained_variance(1.0)
            for c in range(k):
                assert fit_class_geometry(ds, c, full_policy).rank == d
            examples = augment_examples(ds, ReprintConfig(full_policy, full_policy, seed=trial))
            for ex in examples:
                original = ds.vectors[ds.class_indices(ex.target_class)][ex.candidate_index]
                assert ex.vector.tobytes() == original.tobytes()
                expected = np.zeros(k, np.float32)
                expected[ex.target_class] = 1.0
                assert ex.soft_label.tobytes() == expected.tobytes()


def test_geometry_suite(capsys):
    # orthonormal basis, idempotent projector, energy split, and agreement
    # with an independent covariance-eigendecomposition route
    with criterion("geometry_suite", capsys, budget_seconds=30):
        rng = np.random.default_rng(23)
        angle_checks = 0
        for _ in range(20):
            d = int(rng.integers(2, 11))
            ds = random_dataset(rng, 2, d, 8, 50)
            for c in range(2):
                raw = ds.vectors[ds.class_indices(c)].astype(np.float64)
                evals = np.linalg.eigvalsh(np.cov(raw, rowvar=False, ddof=1))[::-1]
                limit = min(raw.shape[0] - 1, d)
                gaps = [
                    h
                    for h in range(1, limit)
                    if (evals[h - 1] - evals[h]) / evals[0] > 0.05
                ]
                h = gaps[0] if gaps else 1
                geo = fit_class_geometry(ds, c, fixed_rank(h))

                basis = geo.components
                gram = basis.T @ basis
                assert np.abs(gram - np.eye(geo.rank)).max() <= 1e-5

                for x in raw[:10]:
                    tilde = center(geo, x)
                    p = project(geo, tilde)
                    r = residual(geo, tilde)
                    assert np.allclose(project(geo, p), p, rtol=1e-7, atol=1e-9)
                    lhs = float(tilde @ tilde)
                    rhs = float(p @ p) + float(r @ r)
                    assert abs(lhs - rhs) <= 1e-4 * max(lhs, 1e-12)

                if gaps:
                    top = np.linalg.eigh(np.cov(raw, rowvar=False, ddof=1))[1][:, ::-1][:, :h]
                    assert subspace_angles(basis, top).max() <= 1e-4
                    angle_checks += 1
        assert angle_checks >= 15


def test_label_suite(capsys):
    # labels stay on the simplex; the determinant rule degenerates to hard
    # target labels for any 1 <= h with q < d; energy-ratio mass is a weight
    with criterion("label_suite", capsys, budget_seconds=10):
        rng = np.random.default_rng(37)
        ds = random_dataset(rng, 3, 6, 10, 20)
        for strategy in ("literal_determinant", "pseudo_determinant", "trace_ratio", "residual_energy"):
            out = augment_dataset(ds, ReprintConfig(fixed_rank(2), fixed_rank(2), strategy, seed=5))
            soft = out.soft_labels.astype(np.float64)
            assert np.all(soft >= 0.0) and np.all(soft <= 1.0)
            assert np.abs(soft.sum(axis=1) - 1.0).max() <= 1e-6

        d = 6
        pair = random_dataset(rng, 2, d, 12, 24)
        for h in (1, 2, 3):
            for q in (1, 3, d - 1):
                geo_s = fit_class_geometry(pair, 0, fixed_rank(h))
                geo_t = fit_class_geometry(pair, 1, fixed_rank(q))
                x = rng.standard_normal(d)
                cand = rng.standard_normal(d)
                soft = refine_label(geo_s, geo_t, x, cand, 2, "literal_determinant")
                assert soft[1] == 1.0 and soft[0] == 0.0

        geo_s = fit_class_geometry(pair, 0, fixed_rank(2))
        geo_t = fit_class_geometry(pair, 1, fixed_rank(2))
        xs = rng.standard_normal((100_000, d))
        cands = rng.standard_normal((100_000, d))
        for x, cand in zip(xs, cands):
            soft = refine_label(geo_s, geo_t, x, cand, 2, "residual_energy")
            lam = float(soft[0])
            assert 0.0 <= lam <= 1.0 and abs(float(soft.sum()) - 1.0) <= 1e-6


def test_baseline_oracles(capsys):
    # neighbor sets against a brute-force scan, noise scale against its
    # target, and exact fill-to-majority counts for every balancing method
    with criterion("baseline_oracles", capsys, budget_seconds=60):
        rng = np.random.default_rng(41)
        for _ in range(50):
            n = int(rng.integers(7, 41))
            d = int(rng.integers(2, 11))
            pts = rng.standard_normal((n, d)).astype(np.float32)
            k = min(5, n - 1)
            got = nearest_same_class(pts, k)
            dist = ((pts[:, None, :].astype(np.float64) - pts[None, :, :]) ** 2).sum(axis=2)
            np.fill_diagonal(dist, np.inf)
            oracle = np.argsort(dist, axis=1, kind="stable")[:, :k]
            for i in range(n):
                assert set(got[i]) == set(oracle[i])

        vocab = ClassVocabulary(("big", "small"))
        point = np.array([0.5, -1.0, 2.0, 0.25], np.float32)
        vecs = np.concatenate([np.zeros((100_001, 4), np.float32), point[None, :]])
        labels = np.array([0] * 100_001 + [1])
        lopsided = LabeledEmbeddingSet(vocab, vecs, labels)
        out = augment_with_baseline(lopsided, BaselineConfig("noise", noise_sigma=0.1, seed=0))
        assert out.n == 100_000
        offsets = out.vectors.astype(np.float64) - point
        assert abs(offsets.std(ddof=1) - 0.1) <= 0.002

        ds = random_dataset(rng, 4, 6, 7, 40)
        counts = ds.class_counts()
        deficits = counts.max() - counts
        for method in ("upsample", "noise", "smote", "mixup", "we", "ld"):
            filled = augment_with_baseline(ds, BaselineConfig(method, seed=3))
            assert filled.n == int(deficits.sum())
            start = 0
            for c, deficit in enumerate(deficits):
                block = filled.soft_labels[start : start + int(deficit)]
                start += int(deficit)
                assert np.all(block[:, c] > 0.0)
                if method != "mixup":
                    assert np.all(block[:, c] == 1.0)
            assert np.array_equal(counts + deficits, np.full(4, counts.max()))


def test_classifier_suite(capsys):
    # analytic gradients against central differences, then a sanity fit
    with criterion("classifier_suite", capsys, budget_seconds=60):
        rng = np.random.default_rng(53)
        for hidden, wd in (((5,), 0.0), ((4, 3), 0.01), ((), 0.0)):
            x = rng.standard_normal((12, 4))
            y = rng.random((12, 3))
            y /= y.sum(axis=1, keepdims=True)
            weights, biases = init_params(4, hidden, 3, seed=7)
            _, grad_w, grad_b = loss_and_grads(weights, biases, x, y, wd)
            for params, grads, kind in ((weights, grad_w, "w"), (biases, grad_b, "b")):
                for layer in range(len(params)):
                    for index in range(params[layer].size):
                        original = params[layer].copy()
                        params[layer].flat[index] = original.flat[index] + 1e-6
                        up, _, _ = loss_and_grads(weights, biases, x, y, wd)
                        params[layer].flat[index] = original.flat[index] - 1e-6
                        down, _, _ = loss_and_grads(weights, biases, x, y, wd)
                        params[layer] = original
                        num = (up - down) / 2e-6
                        got = grads[layer].flat[index]
                        assert abs(num - got) / max(abs(num) + abs(got), 1e-8) <= 1e-4

        vocab = ClassVocabulary(("left", "right"))
        blob = np.concatenate(
            [
                np.array([-3.0, 0.0]) + 0.5 * rng.standard_normal((40, 2)),
                np.array([3.0, 0.0]) + 0.5 * rng.standard_normal((40, 2)),
            ]
        ).astype(np.float32)
        blob_labels = np.array([0] * 40 + [1] * 40)
        blobs = LabeledEmbeddingSet(vocab, blob, blob_labels)
        model = train(blobs.to_soft(), MlpConfig(hidden=(16,), learning_rate=0.01, epochs=200, seed=0))
        assert np.array_equal(predict(model, blobs.vectors), blob_labels)


def test_scaled_imbalance_experiment(capsys):
    # cross-class transfer must beat duplication on average here and stay
    # within half a point of mean-shift transfer; synthetic examples must
    # stay centered on their target class
    with criterion("scaled_imbalance_experiment", capsys, budget_seconds=600):
        pool, test = synth_dataset(EXPERIMENT["spec"])
        methods = ["none", "upsample", "ge3", MethodSpec("reprint", "reprint", REPRINT_55)]
        rows = run_benchmark(
            pool,
            test,
            methods,
            [EXPERIMENT["n_small"]],
            seeds=list(EXPERIMENT["seeds"]),
            n_large=EXPERIMENT["n_large"],
        )
        means = {s.method: s.mean for s in summarize(rows)}
        assert means["reprint"] >= means["upsample"], means
        assert means["reprint"] >= means["ge3"] - 0.005, means

        worst_z = 0.0
        for seed in EXPERIMENT["seeds"]:
            scenario, _ = make_scenario(pool, EXPERIMENT["n_small"], EXPERIMENT["n_large"], seed)
            examples = augment_examples(scenario, ReprintConfig(fixed_rank(5), fixed_rank(5), seed=seed))
            by_target: dict[int, list] = {}
            for ex in examples:
                by_target.setdefault(ex.target_class, []).append(ex.vector)
            for c, vecs in by_target.items():
                arr = np.stack(vecs).astype(np.float64)
                class_mean = scenario.vectors[scenario.labels == c].astype(np.float64).mean(axis=0)
                sigma = arr.std(axis=0, ddof=1)
                z = np.abs(arr.mean(axis=0) - class_mean) / (sigma / np.sqrt(arr.shape[0]))
                worst_z = max(worst_z, float(z.max()))
        assert worst_z < 3.0, worst_z
    with capsys.disabled():
        print(
            "  reprint={reprint:.4f} upsample={upsample:.4f} "
            "ge3={ge3:.4f} none={none:.4f}".format(**means)
        )


def test_deterministic_reports(capsys, tmp_path):
    # identical configs must yield byte-identical reports at any worker count
    with criterion("deterministic_reports", capsys, budget_seconds=600):
        pool, test = synth_dataset(EXPERIMENT["spec"])
        methods = ["none", "upsample", "ge3", MethodSpec("reprint", "reprint", REPRINT_55)]
        outputs = []
        for workers in (1, 4):
            rows = run_benchmark(
                pool,
                test,
                methods,
                [EXPERIMENT["n_small"]],
                seeds=list(EXPERIMENT["seeds"]),
                n_large=EXPERIMENT["n_large"],
                max_workers=workers,
            )
            rows_path = tmp_path / f"rows_{workers}.csv"
            summary_path = tmp_path / f"summary_{workers}.csv"
            write_rows_csv(rows, rows_path)
            write_summary_csv(rows, summary_path)
            outputs.append((rows_path.read_bytes(), summary_path.read_bytes()))
        assert outputs[0][0] == outputs[1][0]
        assert outputs[0][1] == outputs[1][1]


def test_rank_sweep_ablation(capsys):
    # every rank setting must run end to end; no accuracy ordering asserted
    with criterion("rank_sweep_ablation", capsys):
        pool, test = synth_dataset(EXPERIMENT["spec"])
        methods = [
            MethodSpec(f"rank_{h}", "reprint", ReprintConfig(fixed_rank(h), fixed_rank(h)))
            for h in (1, 5, 10, 15)
        ] + [
            MethodSpec(
                f"evr_{threshold}",
                "reprint",
                ReprintConfig(explained_variance(threshold), explained_variance(threshold)),
            )
            for threshold in (0.5, 0.7, 0.95)
        ]
        rows = run_benchmark(
            pool,
            test,
            methods,
            [EXPERIMENT["n_small"]],
            seeds=[0],
            n_large=EXPERIMENT["n_large"],
        )
        summary = summarize(rows)
        assert len(summary) == 7
        assert all(0.0 <= s.mean <= 1.0 for s in summary)
