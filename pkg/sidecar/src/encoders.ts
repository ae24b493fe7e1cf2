/**
 * Text encoders producing fixed-width float32 vectors.
 *
 * Two implementations share one interface: the transformer encoder wraps
 * a local pretrained model and stores its raw final-layer CLS vector (no
 * pooling projection, no normalization), while the hashed encoder derives
 * vectors purely from the text bytes.  The hashed encoder exists so the
 * file contract, batching, and CLI can be exercised hermetically; it is
 * not a semantic embedding.
 */

import { createHash } from 'node:crypto';

export const VECTOR_DIM = 1024;

export interface Encoder {
  readonly name: string;
  readonly dim: number;
  readonly maxChars: number;
  encodeBatch(texts: string[]): Promise<Float32Array[]>;
}

/**
 * Deterministic stand-in encoder: sha256 of the text seeds an
 * xorshift128 stream that fills the vector with values in [-1, 1).
 * Identical text always yields identical bytes, on any platform.
 */
export class HashedEncoder implements Encoder {
  readonly name = 'hashed';
  readonly dim = VECTOR_DIM;
  readonly maxChars = 512;

  encodeVector(text: string): Float32Array {
    const digest = createHash('sha256').update(text, 'utf-8').digest();
    // Seed four 32-bit words from the digest; all-zero state is invalid.
    let x = digest.readUInt32LE(0) || 0x9e3779b9;
    let y = digest.readUInt32LE(4) || 0x85ebca6b;
    let z = digest.readUInt32LE(8) || 0xc2b2ae35;
    let w = digest.readUInt32LE(12) || 0x27d4eb2f;
    const out = new Float32Array(this.dim);
    for (let i = 0; i < this.dim; i++) {
      const t = x ^ (x << 11);
      x = y; y = z; z = w;
      w = (w ^ (w >>> 19) ^ (t ^ (t >>> 8))) >>> 0;
      // Top 24 bits -> [0, 1) exactly, rescaled to [-1, 1).
      out[i] = Math.fround((w >>> 8) / 0x1000000 * 2 - 1);
    }
    return out;
  }

  async encodeBatch(texts: string[]): Promise<Float32Array[]> {
    return texts.map((t) => this.encodeVector(t));
  }
}

/**
 * CLS-vector encoder over a local pretrained model directory.  The
 * transformers runtime is an optional install; model weights must be
 * available locally (no network fetch at encode time).
 */
export class TransformerClsEncoder implements Encoder {
  readonly name = 'transformer';
  readonly dim = VECTOR_DIM;
  readonly maxChars = 512;
  private extractor: ((texts: string[], opts: object) => Promise<{ dims: number[]; data: Float32Array }>) | null = null;

  constructor(private readonly model: string) {}

  private async load(): Promise<void> {
    if (this.extractor) return;
    let mod: any;
    // Optional dependency: resolved at runtime only, so builds stay hermetic.
    const runtime = '@huggingface/transformers';
    try {
      mod = await import(runtime);
    } catch {
      throw new Error(
        'transformer encoder needs the optional dependency: npm install @huggingface/transformers',
      );
    }
    mod.env.allowRemoteModels = false;
    this.extractor = await mod.pipeline('feature-extraction', this.model);
  }

  async encodeBatch(texts: string[]): Promise<Float32Array[]> {
    await this.load();
    // pooling "none" keeps per-token states; slice out the leading CLS row.
    const output = await this.extractor!(texts, { pooling: 'none' });
    const [batch, seqLen, hidden] = output.dims;
    if (hidden !== this.dim) {
      throw new Error(`model hidden size is ${hidden}, store expects ${this.dim}`);
    }
    const vectors: Float32Array[] = [];
    for (let b = 0; b < batch; b++) {
      const start = b * seqLen * hidden;
      vectors.push(output.data.slice(start, start + hidden));
    }
    return vectors;
  }
}

export function makeEncoder(kind: string, model: string): Encoder {
  if (kind === 'hashed') return new HashedEncoder();
  if (kind === 'transformer') return new TransformerClsEncoder(model);
  throw new Error(`unknown encoder ${JSON.stringify(kind)} (expected hashed|transformer)`);
}
