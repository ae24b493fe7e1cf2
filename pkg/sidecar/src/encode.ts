/**
 * Batch encode a worklist into the vector store files.
 *
 * Input rows are processed in row order in fixed-size batches.  Empty
 * basic-meaning texts fall back to encoding the headword itself; texts
 * beyond the encoder's maximum length are truncated.  Both conditions
 * are counted and logged, never fatal.
 */

import { Encoder } from './encoders.js';
import { StoreRow, writeStore } from './format.js';
import { WorkItem, readWorklist } from './worklist.js';

export interface EncodeStats {
  rows: number;
  emptyTexts: number;
  truncated: number;
}

export interface EncodeOptions {
  worklist: string;
  outDir: string;
  batchSize: number;
  log?: (message: string) => void;
}

function prepareText(item: WorkItem, maxChars: number, stats: EncodeStats): string {
  let text = item.text;
  if (text.trim().length === 0) {
    stats.emptyTexts++;
    text = item.headword;
  }
  if (text.length > maxChars) {
    stats.truncated++;
    text = text.slice(0, maxChars);
  }
  return text;
}

export async function encodeWorklist(encoder: Encoder, opts: EncodeOptions): Promise<EncodeStats> {
  const log = opts.log ?? ((msg) => console.error(msg));
  const items = await readWorklist(opts.worklist);
  const stats: EncodeStats = { rows: items.length, emptyTexts: 0, truncated: 0 };
  if (opts.batchSize < 1 || !Number.isInteger(opts.batchSize)) {
    throw new Error(`batch size must be a positive integer, got ${opts.batchSize}`);
  }

  const rows: StoreRow[] = [];
  for (let start = 0; start < items.length; start += opts.batchSize) {
    const batch = items.slice(start, start + opts.batchSize);
    const texts = batch.map((item) => prepareText(item, encoder.maxChars, stats));
    const vectors = await encoder.encodeBatch(texts);
    if (vectors.length !== batch.length) {
      throw new Error(`encoder returned ${vectors.length} vectors for ${batch.length} texts`);
    }
    for (let i = 0; i < batch.length; i++) {
      if (vectors[i].length !== encoder.dim) {
        throw new Error(`encoder returned dimension ${vectors[i].length}, expected ${encoder.dim}`);
      }
      rows.push({ row: batch[i].row, headword: batch[i].headword, vector: vectors[i] });
    }
  }
  await writeStore(opts.outDir, rows, encoder.dim);
  if (stats.emptyTexts) log(`encoded headword placeholder for ${stats.emptyTexts} empty texts`);
  if (stats.truncated) log(`truncated ${stats.truncated} texts to ${encoder.maxChars} chars`);
  return stats;
}
