/**
 * Worklist reader: one JSON object per line with `row`, `headword`,
 * `text`.  Rows must form a permutation of 0..n-1; output is returned
 * in row order regardless of file order.
 */

import { promises as fs } from 'node:fs';

export interface WorkItem {
  row: number;
  headword: string;
  text: string;
}

export async function readWorklist(path: string): Promise<WorkItem[]> {
  const raw = await fs.readFile(path, 'utf-8');
  const items: WorkItem[] = [];
  const lines = raw.split('\n');
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${i + 1}: invalid JSON: ${(err as Error).message}`);
    }
    const rec = parsed as Record<string, unknown>;
    if (
      typeof rec !== 'object' || rec === null ||
      typeof rec.row !== 'number' || !Number.isInteger(rec.row) || rec.row < 0 ||
      typeof rec.headword !== 'string' || rec.headword.length === 0 ||
      typeof rec.text !== 'string'
    ) {
      throw new Error(`${path}:${i + 1}: expected {row, headword, text}`);
    }
    items.push({ row: rec.row, headword: rec.headword, text: rec.text });
  }
  items.sort((a, b) => a.row - b.row);
  items.forEach((item, i) => {
    if (item.row !== i) {
      throw new Error(`${path}: row ids are not a permutation of 0..${items.length - 1}`);
    }
  });
  return items;
}
