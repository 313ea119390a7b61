import { ModelError } from "./errors.js";

export interface Encoder {
  readonly model: string;
  readonly deterministic: boolean;
  dim(): number;
  encode(texts: string[]): Promise<Float32Array[]>;
}

export interface EncoderOptions {
  maxTokens: number;
  includeSpecial: boolean;
  maskPadding: boolean;
  offlineDim: number;
}

export const DEFAULT_MODEL = "bert-base-uncased";
export const OFFLINE_MODEL = "offline-hash";

export const defaultOptions: EncoderOptions = {
  maxTokens: 512,
  includeSpecial: true,
  maskPadding: true,
  offlineDim: 768,
};

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

// Deterministic stand-in for a frozen encoder: every token maps to a fixed
// pseudo-random gaussian vector keyed by its hash, and a text is the mean
// of its token vectors.  No weights, no network, bit-stable across runs.
export class OfflineHashEncoder implements Encoder {
  readonly model = OFFLINE_MODEL;
  readonly deterministic = true;

  constructor(private options: EncoderOptions) {}

  dim(): number {
    return this.options.offlineDim;
  }

  tokenize(text: string): string[] {
    const words = text.toLowerCase().match(/[a-z0-9]+/g) ?? [];
    const body = words.slice(0, Math.max(0, this.options.maxTokens - 2));
    const tokens = ["[CLS]", ...body, "[SEP]"];
    if (this.options.includeSpecial || body.length === 0) return tokens;
    return body;
  }

  private tokenVector(token: string): Float64Array {
    const next = mulberry32(fnv1a(token));
    const out = new Float64Array(this.dim());
    for (let j = 0; j < out.length; j += 2) {
      // Box-Muller pair
      const radius = Math.sqrt(-2 * Math.log(1 - next()));
      const angle = 2 * Math.PI * next();
      out[j] = radius * Math.cos(angle);
      if (j + 1 < out.length) out[j + 1] = radius * Math.sin(angle);
    }
    return out;
  }

  async encode(texts: string[]): Promise<Float32Array[]> {
    return texts.map((text) => {
      const tokens = this.tokenize(text);
      const sum = new Float64Array(this.dim());
      for (const token of tokens) {
        const vec = this.tokenVector(token);
        for (let j = 0; j < sum.length; j++) sum[j] += vec[j];
      }
      const mean = new Float32Array(this.dim());
      for (let j = 0; j < sum.length; j++) mean[j] = sum[j] / tokens.length;
      return mean;
    });
  }
}

// Frozen pretrained transformer via transformers.js, mean pooling over the
// last layer.  Loaded lazily so the offline path works without the package
// or its model files present.
export class TransformersEncoder implements Encoder {
  readonly deterministic = false;
  private extractor: any;
  private hiddenSize = 0;

  constructor(
    readonly model: string,
    private options: EncoderOptions,
  ) {}

  dim(): number {
    if (this.hiddenSize === 0) throw new ModelError("encoder not loaded yet");
    return this.hiddenSize;
  }

  private async load(): Promise<any> {
    if (this.extractor) return this.extractor;
    let pipeline: any;
    try {
      ({ pipeline } = await import("@xenova/transformers" as string));
    } catch {
      throw new ModelError(
        `transformer backend is not installed; use --model ${OFFLINE_MODEL} ` +
          "for the deterministic offline encoder",
      );
    }
    try {
      this.extractor = await pipeline("feature-extraction", this.model);
    } catch (cause) {
      throw new ModelError(`cannot load encoder "${this.model}": ${cause}`);
    }
    return this.extractor;
  }

  async encode(texts: string[]): Promise<Float32Array[]> {
    const extractor = await this.load();
    const out: Float32Array[] = [];
    for (const text of texts) {
      // token states of the last layer, then mean pooling; the library's
      // mean pooling already masks padding, so unmasked pooling reads the
      // raw token states instead
      const pooled = await extractor(text, {
        pooling: this.options.maskPadding ? "mean" : "none",
        truncation: true,
        max_length: this.options.maxTokens,
      });
      let vec: Float32Array;
      if (this.options.maskPadding) {
        vec = Float32Array.from(pooled.data);
      } else {
        const [tokens, hidden] = pooled.dims.slice(-2);
        vec = new Float32Array(hidden);
        for (let t = 0; t < tokens; t++) {
          for (let j = 0; j < hidden; j++) vec[j] += pooled.data[t * hidden + j];
        }
        for (let j = 0; j < hidden; j++) vec[j] /= tokens;
      }
      this.hiddenSize = vec.length;
      out.push(vec);
    }
    return out;
  }
}

export function createEncoder(model: string, options: EncoderOptions): Encoder {
  if (model === OFFLINE_MODEL) return new OfflineHashEncoder(options);
  return new TransformersEncoder(model, options);
}
