/**
 * Vector store byte format.
 *
 * The consumer validates these files byte-for-byte, so the layout is
 * fixed: `embeddings.bin` starts with a 16-byte header (ASCII magic
 * "BMEM", then version, row count and dimension as little-endian
 * uint32) followed by the row-major float32 matrix, little-endian.
 * `embeddings.index` holds one `headword<TAB>row` line per entry.
 */

import { promises as fs } from 'node:fs';
import path from 'node:path';

export const MAGIC = 'BMEM';
export const STORE_VERSION = 1;
export const HEADER_BYTES = 16;

export interface StoreRow {
  row: number;
  headword: string;
  vector: Float32Array;
}

export function encodeMatrix(rows: Float32Array[], dim: number): Buffer {
  const buf = Buffer.alloc(HEADER_BYTES + rows.length * dim * 4);
  buf.write(MAGIC, 0, 'ascii');
  buf.writeUInt32LE(STORE_VERSION, 4);
  buf.writeUInt32LE(rows.length, 8);
  buf.writeUInt32LE(dim, 12);
  for (let r = 0; r < rows.length; r++) {
    const vector = rows[r];
    if (vector.length !== dim) {
      throw new Error(`row ${r} has dimension ${vector.length}, expected ${dim}`);
    }
    const base = HEADER_BYTES + r * dim * 4;
    for (let i = 0; i < dim; i++) {
      buf.writeFloatLE(vector[i], base + i * 4);
    }
  }
  return buf;
}

export function encodeIndex(rows: StoreRow[]): string {
  return rows.map((r) => `${r.headword}\t${r.row}`).join('\n') + (rows.length ? '\n' : '');
}

/** Atomic write: temp file in the target directory, then rename. */
async function writeAtomic(target: string, data: Buffer | string): Promise<void> {
  await fs.mkdir(path.dirname(target), { recursive: true });
  const tmp = `${target}.${process.pid}.tmp`;
  await fs.writeFile(tmp, data);
  await fs.rename(tmp, target);
}

export async function writeStore(outDir: string, rows: StoreRow[], dim: number): Promise<void> {
  const ordered = [...rows].sort((a, b) => a.row - b.row);
  ordered.forEach((r, i) => {
    if (r.row !== i) {
      throw new Error(`row ids must form 0..${rows.length - 1}; saw ${r.row} at position ${i}`);
    }
    if (r.headword.includes('\t') || r.headword.includes('\n')) {
      throw new Error(`headword contains tab or newline: ${JSON.stringify(r.headword)}`);
    }
  });
  await writeAtomic(
    path.join(outDir, 'embeddings.bin'),
    encodeMatrix(ordered.map((r) => r.vector), dim),
  );
  await writeAtomic(path.join(outDir, 'embeddings.index'), encodeIndex(ordered));
}

export interface DecodedStore {
  version: number;
  rows: number;
  dim: number;
  matrix: Float32Array;
}

/** Reader used by tests to check round trips; the toolkit is the real consumer. */
export function decodeMatrix(buf: Buffer): DecodedStore {
  if (buf.length < HEADER_BYTES) throw new Error('truncated header');
  if (buf.toString('ascii', 0, 4) !== MAGIC) throw new Error('bad magic');
  const version = buf.readUInt32LE(4);
  const rows = buf.readUInt32LE(8);
  const dim = buf.readUInt32LE(12);
  if (buf.length !== HEADER_BYTES + rows * dim * 4) {
    throw new Error(`payload is ${buf.length - HEADER_BYTES} bytes, header implies ${rows * dim * 4}`);
  }
  const matrix = new Float32Array(rows * dim);
  for (let i = 0; i < matrix.length; i++) {
    matrix[i] = buf.readFloatLE(HEADER_BYTES + i * 4);
  }
  return { version, rows, dim, matrix };
}
