import { describe, expect, it } from 'vitest';
import { decodeMatrix, encodeIndex, encodeMatrix, HEADER_BYTES } from '../src/format.js';

describe('matrix encoding', () => {
  it('writes the fixed 16-byte header little-endian', () => {
    const rows = [new Float32Array(4), new Float32Array(4), new Float32Array(4)];
    const buf = encodeMatrix(rows, 4);
    expect(buf.toString('ascii', 0, 4)).toBe('BMEM');
    expect(buf.readUInt32LE(4)).toBe(1);
    expect(buf.readUInt32LE(8)).toBe(3);
    expect(buf.readUInt32LE(12)).toBe(4);
    expect(buf.length).toBe(HEADER_BYTES + 3 * 4 * 4);
  });

  it('stores float32 values little-endian row-major', () => {
    const v = new Float32Array([1.5, -2.25]);
    const buf = encodeMatrix([v], 2);
    expect(buf.readFloatLE(HEADER_BYTES)).toBe(1.5);
    expect(buf.readFloatLE(HEADER_BYTES + 4)).toBe(-2.25);
    // 1.5 as IEEE-754 single, little-endian.
    expect([...buf.subarray(HEADER_BYTES, HEADER_BYTES + 4)]).toEqual([0x00, 0x00, 0xc0, 0x3f]);
  });

  it('round-trips through the test decoder', () => {
    const rows = [new Float32Array([0.25, 7]), new Float32Array([-1, 0.125])];
    const decoded = decodeMatrix(encodeMatrix(rows, 2));
    expect(decoded.rows).toBe(2);
    expect(decoded.dim).toBe(2);
    expect([...decoded.matrix]).toEqual([0.25, 7, -1, 0.125]);
  });

  it('rejects mismatched row dimensions', () => {
    expect(() => encodeMatrix([new Float32Array(3)], 4)).toThrow(/dimension/);
  });
});

describe('index encoding', () => {
  it('one headword<TAB>row line per entry', () => {
    const text = encodeIndex([
      { row: 0, headword: '一', vector: new Float32Array(0) },
      { row: 1, headword: '二', vector: new Float32Array(0) },
    ]);
    expect(text).toBe('一\t0\n二\t1\n');
  });

  it('empty store yields an empty file', () => {
    expect(encodeIndex([])).toBe('');
  });
});
