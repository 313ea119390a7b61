// Binary embedding container, little-endian throughout:
//   magic "EMBV", u32 version=1, u32 n, u32 d, u32 K,
//   K x (u32 byte length + utf-8 class name),
//   n x (u32 label id + d x f32 vector)
import { writeFileSync } from "fs";

export const MAGIC = "EMBV";
export const VERSION = 1;

export function emb1Bytes(
  classNames: string[],
  labels: number[],
  vectors: Float32Array[],
  dim: number,
): Buffer {
  if (classNames.length === 0) throw new Error("empty class vocabulary");
  const n = vectors.length;
  if (labels.length !== n) throw new Error("labels and vectors disagree in length");

  const nameBlobs = classNames.map((name) => Buffer.from(name, "utf-8"));
  const nameBytes = nameBlobs.reduce((total, blob) => total + 4 + blob.length, 0);
  const out = Buffer.alloc(4 + 16 + nameBytes + n * (4 + 4 * dim));

  let at = 0;
  out.write(MAGIC, at, "ascii");
  at += 4;
  at = out.writeUInt32LE(VERSION, at);
  at = out.writeUInt32LE(n, at);
  at = out.writeUInt32LE(dim, at);
  at = out.writeUInt32LE(classNames.length, at);
  for (const blob of nameBlobs) {
    at = out.writeUInt32LE(blob.length, at);
    at += blob.copy(out, at);
  }
  for (let i = 0; i < n; i++) {
    const label = labels[i];
    if (!Number.isInteger(label) || label < 0 || label >= classNames.length) {
      throw new Error(`label id ${label} outside the vocabulary at row ${i}`);
    }
    const vec = vectors[i];
    if (vec.length !== dim) {
      throw new Error(`vector of length ${vec.length} at row ${i}, expected ${dim}`);
    }
    at = out.writeUInt32LE(label, at);
    for (let j = 0; j < dim; j++) at = out.writeFloatLE(vec[j], at);
  }
  return out;
}

export function writeEmb1(
  path: string,
  classNames: string[],
  labels: number[],
  vectors: Float32Array[],
  dim: number,
): void {
  writeFileSync(path, emb1Bytes(classNames, labels, vectors, dim));
}
