#!/usr/bin/env node
/**
 * encode --worklist <path> --out <dir> [--batch-size N]
 *        [--encoder hashed|transformer] [--model <local path or id>]
 *
 * Reads the toolkit's worklist and writes embeddings.bin plus
 * embeddings.index into the output directory.
 */

import { parseArgs } from 'node:util';
import { encodeWorklist } from './encode.js';
import { makeEncoder, VECTOR_DIM } from './encoders.js';

const USAGE =
  'usage: bm-encode encode --worklist <path> --out <dir> ' +
  '[--batch-size N] [--encoder hashed|transformer] [--model <path>]';

export async function main(argv: string[]): Promise<number> {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        worklist: { type: 'string' },
        out: { type: 'string' },
        'batch-size': { type: 'string', default: '32' },
        encoder: { type: 'string', default: 'transformer' },
        model: { type: 'string', default: 'hfl/chinese-roberta-wwm-ext-large' },
      },
    });
  } catch (err) {
    console.error(`bm-encode: ${(err as Error).message}`);
    console.error(USAGE);
    return 2;
  }
  const command = parsed.positionals[0];
  const { worklist, out } = parsed.values;
  if (command !== 'encode' || !worklist || !out) {
    console.error(USAGE);
    return 2;
  }
  const batchSize = Number(parsed.values['batch-size']);
  try {
    const encoder = makeEncoder(parsed.values.encoder!, parsed.values.model!);
    const stats = await encodeWorklist(encoder, { worklist, outDir: out, batchSize });
    console.log(
      `encoded rows=${stats.rows} dim=${VECTOR_DIM} encoder=${encoder.name} ` +
      `empty=${stats.emptyTexts} truncated=${stats.truncated}`,
    );
    return 0;
  } catch (err) {
    console.error(`bm-encode: ${(err as Error).message}`);
    return 1;
  }
}

const entry = process.argv[1];
if (entry && (entry.endsWith('cli.js') || entry.endsWith('bm-encode'))) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
