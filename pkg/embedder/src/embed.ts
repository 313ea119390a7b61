import { createEncoder, defaultOptions, DEFAULT_MODEL, EncoderOptions } from "./encoder.js";
import { loadRows } from "./input.js";
import { writeEmb1 } from "./format.js";

export interface EmbedJob {
  input: string;
  output: string;
  textCol: string;
  labelCol: string;
  model: string;
  batchSize: number;
  format?: "csv" | "jsonl";
  options: EncoderOptions;
}

export interface EmbedResult {
  rows: number;
  dim: number;
  classNames: string[];
  deterministic: boolean;
}

export function defaultJob(input: string, output: string): EmbedJob {
  return {
    input,
    output,
    textCol: "text",
    labelCol: "label",
    model: DEFAULT_MODEL,
    batchSize: 32,
    options: { ...defaultOptions },
  };
}

export async function runEmbedJob(job: EmbedJob): Promise<EmbedResult> {
  const { texts, labels, classNames } = loadRows(
    job.input,
    job.textCol,
    job.labelCol,
    job.format,
  );
  const encoder = createEncoder(job.model, job.options);
  if (!encoder.deterministic) {
    console.warn(
      "warning: encoder backend is not bit-deterministic; reruns match within 1e-5",
    );
  }

  const vectors: Float32Array[] = [];
  for (let at = 0; at < texts.length; at += job.batchSize) {
    const batch = await encoder.encode(texts.slice(at, at + job.batchSize));
    vectors.push(...batch);
  }
  const dim = encoder.dim();
  writeEmb1(job.output, classNames, labels, vectors, dim);
  return {
    rows: vectors.length,
    dim,
    classNames,
    deterministic: encoder.deterministic,
  };
}
