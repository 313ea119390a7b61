"""Round-trip the on-disk formats and drive the command line.

The toolkit reads and writes three formats: a hard-labeled binary
(magic EMBV), a soft-labeled binary (magic EMBS), and hard-labeled JSONL.
The same operations are exposed as CLI subcommands.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from hsaug import (
    SynthSpec,
    read_any_binary,
    read_hard_jsonl,
    synth_dataset,
    write_hard_binary,
    write_hard_jsonl,
)

work = Path(tempfile.mkdtemp(prefix="formats_demo_"))
pool, _ = synth_dataset(SynthSpec(num_classes=3, dim=6, train_per_class=20, test_per_class=5, seed=9))

binary_path = work / "pool.emb"
jsonl_path = work / "pool.jsonl"
write_hard_binary(pool, binary_path)
write_hard_jsonl(pool, jsonl_path)
print(f"binary file: {binary_path.stat().st_size} bytes for {pool.n} records of dim {pool.dim}")

again = read_any_binary(binary_path)
assert again.vectors.tobytes() == pool.vectors.tobytes()
print("binary round trip is byte-exact")

from_jsonl = read_hard_jsonl(jsonl_path)
assert from_jsonl.vocab.names == pool.vocab.names
print("jsonl round trip preserves vocabulary and order")

print("\n-- the same via the CLI --")
cmds = [
    [sys.executable, "-m", "hsaug.cli", "synth", "--classes", "3", "--dim", "6",
     "--train-per-class", "20", "--test-per-class", "5", "--seed", "9",
     "--out-train", str(work / "cli_pool.emb"), "--out-test", str(work / "cli_test.emb")],
    [sys.executable, "-m", "hsaug.cli", "pca-info", "--in", str(work / "cli_pool.emb"), "--pcs", "2"],
    [sys.executable, "-m", "hsaug.cli", "augment", "--in", str(work / "cli_pool.emb"),
     "--method", "reprint", "--pcs-source", "2", "--pcs-target", "2",
     "--out", str(work / "cli_aug.embs")],
    [sys.executable, "-m", "hsaug.cli", "train-eval", "--train", str(work / "cli_pool.emb"),
     "--test", str(work / "cli_test.emb"), "--epochs", "5"],
]
for cmd in cmds:
    print(f"\n$ {' '.join(cmd[2:])}")
    result = subprocess.run(cmd, capture_output=True, text=True, check=True)
    head = result.stdout.strip().splitlines()[:4]
    print("\n".join(head))
