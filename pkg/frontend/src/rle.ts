/**
 * Run-length mask decoder matching the review service's storage format:
 * column-major scan, alternating run lengths starting with background, a
 * leading 0 meaning the mask starts with foreground.
 *
 * Returns a row-major Uint8Array (index y * width + x) of 0/1 values.
 */

export class RleError extends Error {}

export function decodeRle(counts: number[], height: number, width: number): Uint8Array {
  if (height <= 0 || width <= 0) {
    throw new RleError(`invalid mask size ${height}x${width}`);
  }
  let total = 0;
  for (let i = 0; i < counts.length; i++) {
    const c = counts[i];
    if (!Number.isInteger(c) || c < 0) {
      throw new RleError(`run length ${c} at index ${i} is not a non-negative integer`);
    }
    if (c === 0 && i > 0) {
      throw new RleError(`zero-length run at interior index ${i}`);
    }
    total += c;
  }
  if (total !== height * width) {
    throw new RleError(`counts sum to ${total}, expected ${height * width}`);
  }

  const out = new Uint8Array(height * width);
  let pos = 0; // column-major position
  let value = 0;
  for (const c of counts) {
    if (value === 1) {
      for (let k = pos; k < pos + c; k++) {
        const col = Math.floor(k / height);
        const row = k % height;
        out[row * width + col] = 1;
      }
    }
    pos += c;
    value ^= 1;
  }
  return out;
}

export function maskArea(counts: number[]): number {
  let area = 0;
  for (let i = 1; i < counts.length; i += 2) area += counts[i];
  return area;
}
