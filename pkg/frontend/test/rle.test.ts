import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { describe, expect, it } from 'vitest';

import { RleError, decodeRle, maskArea } from '../src/rle.js';

interface GoldenCase {
  height: number;
  width: number;
  counts: number[];
  rows: string[];
}

const here = dirname(fileURLToPath(import.meta.url));
const golden: GoldenCase[] = JSON.parse(
  readFileSync(join(here, 'fixtures', 'rle_golden.json'), 'utf-8'),
);

describe('decodeRle', () => {
  it('matches the service codec on all 100 golden pairs', () => {
    expect(golden.length).toBe(100);
    for (const [i, c] of golden.entries()) {
      const decoded = decodeRle(c.counts, c.height, c.width);
      const expected = new Uint8Array(c.height * c.width);
      c.rows.forEach((row, y) => {
        for (let x = 0; x < row.length; x++) expected[y * c.width + x] = row[x] === '1' ? 1 : 0;
      });
      expect(decoded, `golden case ${i}`).toEqual(expected);
    }
  });

  it('decodes column-major order', () => {
    // counts [1,2,1] on 2x2: scan (0,0),(1,0),(0,1),(1,1)
    const m = decodeRle([1, 2, 1], 2, 2);
    expect(Array.from(m)).toEqual([0, 1, 1, 0]);
  });

  it('handles the leading-zero foreground-first convention', () => {
    expect(Array.from(decodeRle([0, 4], 2, 2))).toEqual([1, 1, 1, 1]);
  });

  it('rejects bad counts', () => {
    expect(() => decodeRle([3], 2, 2)).toThrow(RleError);
    expect(() => decodeRle([2, 0, 2], 2, 2)).toThrow(RleError);
    expect(() => decodeRle([-1, 5], 2, 2)).toThrow(RleError);
    expect(() => decodeRle([4], 0, 4)).toThrow(RleError);
  });

  it('maskArea sums foreground runs', () => {
    for (const c of golden.slice(0, 20)) {
      const decoded = decodeRle(c.counts, c.height, c.width);
      const pixels = decoded.reduce((acc, v) => acc + v, 0);
      expect(maskArea(c.counts)).toBe(pixels);
    }
  });
});
