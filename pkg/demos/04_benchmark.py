"""Run the imbalance benchmark end to end and write CSV reports.

Each cell subsamples an imbalanced scenario from the pool, augments it with
one method, trains the bundled MLP, and scores accuracy on the held-out
test set.  Results are deterministic for a fixed grid, at any worker count.
"""

import tempfile
from pathlib import Path

from hsaug import (
    MethodSpec,
    MlpConfig,
    ReprintConfig,
    SynthSpec,
    fixed_rank,
    run_benchmark,
    summarize,
    synth_dataset,
    write_rows_csv,
    write_summary_csv,
)

spec = SynthSpec(
    num_classes=4,
    dim=32,
    mean_scale=0.0,
    spectrum=(150.0, 130.0, 110.0, 90.0) + (1.0,) * 28,
    train_per_class=500,
    test_per_class=250,
    seed=2024,
)
pool, test = synth_dataset(spec)

methods = [
    "none",
    "upsample",
    "smote",
    "ge3",
    MethodSpec("reprint", "reprint", ReprintConfig(fixed_rank(5), fixed_rank(5))),
]
rows = run_benchmark(
    pool,
    test,
    methods,
    n_small_values=[16],
    seeds=[0, 1, 2],
    n_large=500,
    mlp_config=MlpConfig(hidden=(64,), epochs=15),
)

print(f"{'method':10s} {'mean':>8s} {'std':>8s}")
for s in summarize(rows):
    std = f"{s.std:.4f}" if s.std is not None else ""
    print(f"{s.method:10s} {s.mean:8.4f} {std:>8s}")

out_dir = Path(tempfile.mkdtemp(prefix="bench_demo_"))
write_rows_csv(rows, out_dir / "rows.csv")
write_summary_csv(rows, out_dir / "summary.csv")
print(f"\nper-cell and summary CSVs written under {out_dir}")
