import { describe, expect, it } from 'vitest';

import { boxFromDrag, clampBoxToImage, maskToRgba } from '../src/canvas.js';

describe('boxFromDrag', () => {
  it('normalizes any drag direction', () => {
    expect(boxFromDrag(10, 5, 2, 20)).toEqual({ x: 2, y: 5, w: 8, h: 15 });
    expect(boxFromDrag(2, 20, 10, 5)).toEqual({ x: 2, y: 5, w: 8, h: 15 });
  });

  it('rounds fractional canvas coordinates', () => {
    expect(boxFromDrag(1.4, 1.6, 5.2, 9.9)).toEqual({ x: 1, y: 2, w: 4, h: 8 });
  });
});

describe('clampBoxToImage', () => {
  it('keeps an in-bounds box unchanged', () => {
    expect(clampBoxToImage({ x: 3, y: 4, w: 10, h: 5 }, 80, 60)).toEqual({ x: 3, y: 4, w: 10, h: 5 });
  });

  it('clamps boxes that spill past the edges', () => {
    expect(clampBoxToImage({ x: 70, y: 50, w: 30, h: 30 }, 80, 60)).toEqual({ x: 70, y: 50, w: 10, h: 10 });
    expect(clampBoxToImage({ x: -5, y: -5, w: 10, h: 10 }, 80, 60)).toEqual({ x: 0, y: 0, w: 10, h: 10 });
  });

  it('never returns an empty box', () => {
    expect(clampBoxToImage({ x: 79, y: 59, w: 0, h: 0 }, 80, 60)).toEqual({ x: 79, y: 59, w: 1, h: 1 });
  });
});

describe('maskToRgba', () => {
  it('colors only foreground pixels', () => {
    const mask = new Uint8Array([0, 1, 1, 0]);
    const rgba = maskToRgba(mask, 2, 2, [10, 20, 30, 40]);
    expect(Array.from(rgba.slice(0, 4))).toEqual([0, 0, 0, 0]);
    expect(Array.from(rgba.slice(4, 8))).toEqual([10, 20, 30, 40]);
    expect(Array.from(rgba.slice(8, 12))).toEqual([10, 20, 30, 40]);
    expect(Array.from(rgba.slice(12))).toEqual([0, 0, 0, 0]);
  });

  it('rejects size mismatches', () => {
    expect(() => maskToRgba(new Uint8Array(3), 2, 2)).toThrow();
  });
});
